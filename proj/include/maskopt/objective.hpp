#pragma once

#include <cstddef>
#include <span>

#include "maskopt/gram.hpp"
#include "maskopt/mask.hpp"
#include "maskopt/matrix.hpp"

namespace maskopt {

/// Layer reconstruction objective L(M) = || W X - (M (.) W) X ||_F^2,
/// evaluated through the Gram cache only.
class ObjectiveContext {
public:
    ObjectiveContext(DenseMatrix W, GramCache cache);

    const DenseMatrix& W() const noexcept { return weights_; }
    const GramCache& cache() const noexcept { return cache_; }
    const DenseMatrix& G() const noexcept { return cache_.G(); }
    const DenseMatrix& H() const noexcept { return cache_.H(); }
    std::size_t d_out() const noexcept { return weights_.rows(); }
    std::size_t d_in() const noexcept { return weights_.cols(); }

    // ||W X||_F^2, the loss of the all-zero mask. Used as the scale for
    // relative tolerances and relative losses.
    double dense_loss() const noexcept { return dense_loss_; }

private:
    DenseMatrix weights_;
    GramCache cache_;
    double dense_loss_ = 0.0;
};

// Tr(D G D^T) with D = W (.) (1 - M).
double loss(const ObjectiveContext& ctx, const DenseMatrix& mask);
double loss(const ObjectiveContext& ctx, const MaskState& mask);
double loss(const ObjectiveContext& ctx, const BinaryMask& mask);

// -2 W (.) (H - (W (.) M) G).
DenseMatrix gradient(const ObjectiveContext& ctx, const DenseMatrix& mask);
DenseMatrix gradient(const ObjectiveContext& ctx, const MaskState& mask);

// Q = Diag(w) G Diag(w); the Hessian (up to a factor 2) of one row's loss
// f(m) = (1 - m)^T Q (1 - m).
DenseMatrix row_hessian(std::span<const double> w_row, const DenseMatrix& G);

// Largest eigenvalue of a symmetric PSD matrix by power iteration. Stops
// once ||Q v - lambda v|| <= tol * lambda or after `iters` iterations.
double lambda_max(const DenseMatrix& Q, std::size_t iters = 20000, double tol = 1e-12);

// max over rows i of lambda_max(row_hessian(W_i, G)), the top eigenvalue of
// the block-diagonal Hessian of the full-matrix objective.
double lambda_max_rows(const DenseMatrix& W, const DenseMatrix& G);

// FW gap <M - V, grad>.
double fw_gap(const DenseMatrix& grad, const DenseMatrix& M, const DenseMatrix& V);
double fw_gap(const DenseMatrix& grad, const MaskState& M, const BinaryMask& V);

} // namespace maskopt
