#include "maskopt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "maskopt/error.hpp"
#include "maskopt/selection.hpp"

namespace maskopt {

namespace {

void require_gram_for(const DenseMatrix& W, const DenseMatrix& G) {
    if (G.rows() != G.cols() || G.rows() != W.cols()) {
        throw ShapeError("Gram matrix is " + std::to_string(G.rows()) + "x" + std::to_string(G.cols()) +
                         " but W has " + std::to_string(W.cols()) + " columns");
    }
}

// sqrt(G_jj) with tiny negative round-off clamped to zero.
std::vector<double> activation_norms(const DenseMatrix& G) {
    double scale = 1.0;
    for (std::size_t j = 0; j < G.rows(); ++j) scale = std::max(scale, std::abs(G(j, j)));
    std::vector<double> norms(G.rows());
    for (std::size_t j = 0; j < G.rows(); ++j) {
        const double g = G(j, j);
        if (g < -1e-12 * scale) {
            throw NumericalError("Gram diagonal entry " + std::to_string(j) + " is negative (" +
                                 std::to_string(g) + ")");
        }
        norms[j] = std::sqrt(std::max(g, 0.0));
    }
    return norms;
}

double safe_reciprocal(double s) { return s == 0.0 ? 0.0 : 1.0 / s; }

// Gauss-Jordan inverse with partial pivoting.
DenseMatrix invert(DenseMatrix a) {
    const std::size_t n = a.rows();
    DenseMatrix inv = DenseMatrix::identity(n);
    const double scale = std::max(max_abs(a), std::numeric_limits<double>::min());
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) <= 1e-13 * scale) {
            throw NumericalError("Hessian is singular after damping");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(pivot, c), a(col, c));
                std::swap(inv(pivot, c), inv(col, c));
            }
        }
        const double p = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= p;
            inv(col, c) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

} // namespace

SaliencyMatrix::SaliencyMatrix(DenseMatrix scores) : scores_(std::move(scores)) {
    for (double v : scores_.data()) {
        if (!std::isfinite(v) || v < 0.0) throw NumericalError("saliency scores must be finite and >= 0");
    }
}

SaliencyMatrix magnitude_scores(const DenseMatrix& W) {
    DenseMatrix S = W;
    for (double& v : S.data()) v = std::abs(v);
    return SaliencyMatrix(std::move(S));
}

SaliencyMatrix wanda_scores(const DenseMatrix& W, const DenseMatrix& G) {
    require_gram_for(W, G);
    const auto norms = activation_norms(G);
    DenseMatrix S(W.rows(), W.cols());
    for (std::size_t i = 0; i < W.rows(); ++i)
        for (std::size_t j = 0; j < W.cols(); ++j) S(i, j) = std::abs(W(i, j)) * norms[j];
    return SaliencyMatrix(std::move(S));
}

namespace {

std::vector<double> ria_factors_rows(const DenseMatrix& W) {
    std::vector<double> rows(W.rows(), 0.0);
    for (std::size_t i = 0; i < W.rows(); ++i)
        for (double v : W.row(i)) rows[i] += std::abs(v);
    for (double& r : rows) r = safe_reciprocal(r);
    return rows;
}

std::vector<double> ria_factors_cols(const DenseMatrix& W) {
    std::vector<double> cols(W.cols(), 0.0);
    for (std::size_t i = 0; i < W.rows(); ++i)
        for (std::size_t j = 0; j < W.cols(); ++j) cols[j] += std::abs(W(i, j));
    for (double& c : cols) c = safe_reciprocal(c);
    return cols;
}

} // namespace

SaliencyMatrix ria_scores(const DenseMatrix& W, const DenseMatrix& G) {
    require_gram_for(W, G);
    const auto norms = activation_norms(G);
    const auto inv_row = ria_factors_rows(W);
    const auto inv_col = ria_factors_cols(W);
    DenseMatrix S(W.rows(), W.cols());
    for (std::size_t i = 0; i < W.rows(); ++i)
        for (std::size_t j = 0; j < W.cols(); ++j)
            S(i, j) = std::abs(W(i, j)) * (inv_row[i] + inv_col[j]) * norms[j];
    return SaliencyMatrix(std::move(S));
}

DenseMatrix ria_rescaled(const DenseMatrix& W) {
    const auto inv_row = ria_factors_rows(W);
    const auto inv_col = ria_factors_cols(W);
    DenseMatrix out(W.rows(), W.cols());
    for (std::size_t i = 0; i < W.rows(); ++i)
        for (std::size_t j = 0; j < W.cols(); ++j) out(i, j) = W(i, j) * (inv_row[i] + inv_col[j]);
    return out;
}

BinaryMask saliency_mask(const SaliencyMatrix& S, const SparsityPattern& pattern) {
    const auto& scores = S.scores();
    const auto layout = pattern.layout(scores.rows(), scores.cols());
    return BinaryMask(select_per_group(scores, layout), pattern);
}

std::vector<double> greedy_single_weight_mask(std::span<const double> w_row, const DenseMatrix& G,
                                              std::size_t k) {
    const std::size_t d = w_row.size();
    if (G.rows() != d || G.cols() != d) throw ShapeError("greedy pruning: Gram matrix does not match row");
    if (k > d) throw BudgetError("greedy pruning: k exceeds row length");
    std::vector<double> mask(d, 1.0);
    for (std::size_t removed = 0; removed < d - k; ++removed) {
        std::size_t best = d;
        double best_cost = 0.0;
        for (std::size_t q = 0; q < d; ++q) {
            if (mask[q] == 0.0) continue;
            // Error of dropping q alone while keeping every other survivor.
            const double cost = w_row[q] * w_row[q] * G(q, q);
            if (best == d || cost <= best_cost) {
                best = q;
                best_cost = cost;
            }
        }
        mask[best] = 0.0;
    }
    return mask;
}

double default_damping(const DenseMatrix& G) {
    if (G.rows() == 0) return 0.0;
    double trace = 0.0;
    for (std::size_t j = 0; j < G.rows(); ++j) trace += G(j, j);
    return 0.01 * trace / static_cast<double>(G.rows());
}

SparseGptRow sparsegpt_greedy_row(std::span<const double> w_row, const DenseMatrix& G, std::size_t k,
                                  double damping, std::size_t block, std::size_t block_keep) {
    const std::size_t d = w_row.size();
    if (G.rows() != d || G.cols() != d) throw ShapeError("sparsegpt: Gram matrix does not match row");
    if (block == 0 && k > d) throw BudgetError("sparsegpt: k exceeds row length");
    if (block != 0 && (d % block != 0 || block_keep > block)) {
        throw PatternError("sparsegpt: invalid block constraint");
    }

    DenseMatrix H = G;
    for (std::size_t j = 0; j < d; ++j) H(j, j) += damping;
    DenseMatrix Hinv = invert(std::move(H));

    SparseGptRow out{std::vector<double>(d, 1.0), std::vector<double>(w_row.begin(), w_row.end())};
    auto& w = out.weights;
    auto& alive = out.mask;
    std::vector<std::size_t> block_alive(block == 0 ? 0 : d / block, block);

    const std::size_t steps = block == 0 ? d - k : (d / block) * (block - block_keep);
    for (std::size_t step = 0; step < steps; ++step) {
        std::size_t q = d;
        double best = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (alive[j] == 0.0) continue;
            if (block != 0 && block_alive[j / block] <= block_keep) continue;
            const double h = Hinv(j, j);
            if (!(h > 0.0)) throw NumericalError("sparsegpt: non-positive inverse Hessian diagonal");
            const double score = w[j] * w[j] / h;
            if (q == d || score <= best) { // ties: the highest index goes first
                q = j;
                best = score;
            }
        }
        const double hqq = Hinv(q, q);
        const double f = w[q] / hqq;
        for (std::size_t j = 0; j < d; ++j)
            if (alive[j] != 0.0) w[j] -= f * Hinv(j, q);
        w[q] = 0.0;
        alive[q] = 0.0;
        if (block != 0) --block_alive[q / block];

        // Inverse of H restricted to the survivors.
        std::vector<double> col(d);
        for (std::size_t j = 0; j < d; ++j) col[j] = Hinv(j, q);
        for (std::size_t i = 0; i < d; ++i) {
            if (alive[i] == 0.0) continue;
            const double ci = col[i] / hqq;
            for (std::size_t j = 0; j < d; ++j)
                if (alive[j] != 0.0) Hinv(i, j) -= ci * col[j];
        }
    }
    return out;
}

double row_reconstruction_error(std::span<const double> w_hat, std::span<const double> w,
                                 const DenseMatrix& G) {
    const std::size_t d = w.size();
    if (w_hat.size() != d || G.rows() != d || G.cols() != d) {
        throw ShapeError("row_reconstruction_error: shapes differ");
    }
    std::vector<double> dw(d);
    for (std::size_t j = 0; j < d; ++j) dw[j] = w_hat[j] - w[j];
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < d; ++j) row += G(i, j) * dw[j];
        s += dw[i] * row;
    }
    return s;
}

} // namespace maskopt
