#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maskopt/mask.hpp"
#include "maskopt/matrix.hpp"
#include "maskopt/pattern.hpp"

namespace maskopt {

// Nonnegative per-weight importance scores, d_out x d_in.
class SaliencyMatrix {
public:
    explicit SaliencyMatrix(DenseMatrix scores);

    const DenseMatrix& scores() const noexcept { return scores_; }

private:
    DenseMatrix scores_;
};

// S_ij = |W_ij|
SaliencyMatrix magnitude_scores(const DenseMatrix& W);

// S_ij = |W_ij| sqrt(G_jj), i.e. |W_ij| ||X_j,:||_2.
SaliencyMatrix wanda_scores(const DenseMatrix& W, const DenseMatrix& G);

// S_ij = |W_ij| (1/sum_k |W_ik| + 1/sum_k |W_kj|) sqrt(G_jj). A zero row
// or column sum contributes a zero reciprocal.
SaliencyMatrix ria_scores(const DenseMatrix& W, const DenseMatrix& G);

// W'_ij = W_ij (1/sum_k |W_ik| + 1/sum_k |W_kj|), so that
// ria_scores(W, G) == wanda_scores(ria_rescaled(W), G).
DenseMatrix ria_rescaled(const DenseMatrix& W);

// Keeps the top-budget scores of every pattern group.
BinaryMask saliency_mask(const SaliencyMatrix& S, const SparsityPattern& pattern);

// Removes one weight at a time, always the one with the smallest
// w_q^2 G_qq among survivors (ties: highest index first), until k remain.
std::vector<double> greedy_single_weight_mask(std::span<const double> w_row, const DenseMatrix& G,
                                              std::size_t k);

struct SparseGptRow {
    std::vector<double> mask;    // 0/1 per input coordinate
    std::vector<double> weights; // reconstructed weights, zero where pruned
};

// 0.01 * mean(diag(G)).
double default_damping(const DenseMatrix& G);

// Greedy single-weight pruning with optimal reconstruction of the
// survivors. With Hinv = (G + damping I)^-1 restricted to the unpruned
// coordinates, each step prunes q = argmin w_q^2 / Hinv_qq, updates
// w <- w - (w_q / Hinv_qq) Hinv e_q and downdates Hinv by
// Hinv <- Hinv - Hinv e_q e_q^T Hinv / Hinv_qq.
//
// If `block` > 0, only coordinates whose block of `block` consecutive
// entries still holds more than `block_keep` survivors are eligible, and
// pruning stops once every block holds `block_keep` (k is ignored).
SparseGptRow sparsegpt_greedy_row(std::span<const double> w_row, const DenseMatrix& G,
                                  std::size_t k, double damping, std::size_t block = 0,
                                  std::size_t block_keep = 0);

// (dw)^T G (dw) for dw = w_hat - w, the row reconstruction error.
double row_reconstruction_error(std::span<const double> w_hat, std::span<const double> w,
                                const DenseMatrix& G);

} // namespace maskopt
