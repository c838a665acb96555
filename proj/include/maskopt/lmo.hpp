#pragma once

#include <cstddef>

#include "maskopt/mask.hpp"
#include "maskopt/matrix.hpp"
#include "maskopt/pattern.hpp"

namespace maskopt {

/// Linear minimization oracles over the relaxed mask polytopes
///   C = { M in [0,1]^{d_out x d_in} : every group sum <= budget }.
///
/// Each oracle sets a coordinate to one iff its gradient entry is strictly
/// negative and among the `budget` smallest entries of its group; ties go
/// to the lowest row-major index. Frozen coordinates are never selected.
struct LmoRequest {
    const DenseMatrix& grad;
    SparsityPattern pattern;
    const BinaryMask* frozen = nullptr; // optional
};

BinaryMask lmo_unstructured(const LmoRequest& req, std::size_t k);
BinaryMask lmo_per_row(const LmoRequest& req, std::size_t k_row);
BinaryMask lmo_nm(const LmoRequest& req, std::size_t n, std::size_t m);

// Dispatches on req.pattern.
BinaryMask lmo(const LmoRequest& req);

} // namespace maskopt
