#pragma once

#include <cstddef>

#include "maskopt/matrix.hpp"

namespace maskopt {

/// Precomputed G = X X^T (d_in x d_in) and H = W G (d_out x d_in).
/// Once built, FW iterations never touch X again.
class GramCache {
public:
    GramCache(DenseMatrix gram, DenseMatrix weighted);

    const DenseMatrix& G() const noexcept { return gram_; }
    const DenseMatrix& H() const noexcept { return weighted_; }

private:
    DenseMatrix gram_;
    DenseMatrix weighted_;
};

// Accumulates G over column batches of X, left to right, then H = W * G.
GramCache gram_precompute(const DenseMatrix& X, const DenseMatrix& W, std::size_t batch_cols);

// G = X X^T accumulated over batches of `batch_cols` columns.
DenseMatrix gram_matrix(const DenseMatrix& X, std::size_t batch_cols);

// Builds the cache from an existing G (e.g. loaded from a file).
GramCache gram_from_matrix(DenseMatrix G, const DenseMatrix& W);

} // namespace maskopt
