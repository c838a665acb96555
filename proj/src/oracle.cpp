#include "maskopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "maskopt/baselines.hpp"
#include "maskopt/error.hpp"
#include "maskopt/gram.hpp"
#include "maskopt/lmo.hpp"
#include "maskopt/objective.hpp"
#include "maskopt/selection.hpp"
#include "maskopt/solver.hpp"

namespace maskopt {

namespace {

void require_enumerable(std::size_t n, std::size_t k) {
    if (n > kEnumerationLimit) {
        throw CapacityError("enumeration over " + std::to_string(n) + " coordinates exceeds the limit of " +
                            std::to_string(kEnumerationLimit));
    }
    if (k > n) throw BudgetError("budget " + std::to_string(k) + " exceeds " + std::to_string(n) + " coordinates");
}

// Advances `idx` (strictly increasing, values < n) to the next k-combination
// in lexicographic order. Returns false after the last one.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
    const std::size_t k = idx.size();
    std::size_t i = k;
    while (i > 0) {
        --i;
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Sum of Q over the pruned coordinates of each row, i.e. the loss of a mask
// given by its kept flat indices.
class PrunedLoss {
public:
    PrunedLoss(const DenseMatrix& W, const DenseMatrix& G) : d_in_(W.cols()) {
        for (std::size_t i = 0; i < W.rows(); ++i) hessians_.push_back(row_hessian(W.row(i), G));
        pruned_.reserve(d_in_);
    }

    double operator()(const std::vector<double>& keep) {
        double total = 0.0;
        for (std::size_t i = 0; i < hessians_.size(); ++i) {
            pruned_.clear();
            for (std::size_t j = 0; j < d_in_; ++j)
                if (keep[i * d_in_ + j] == 0.0) pruned_.push_back(j);
            const auto& Q = hessians_[i];
            for (std::size_t p : pruned_)
                for (std::size_t q : pruned_) total += Q(p, q);
        }
        return total;
    }

private:
    std::size_t d_in_;
    std::vector<DenseMatrix> hessians_;
    std::vector<std::size_t> pruned_;
};

MatrixOptimum enumerate(const DenseMatrix& W, const DenseMatrix& G, std::size_t k) {
    const std::size_t n = W.size();
    require_enumerable(n, k);
    PrunedLoss evaluate(W, G);
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> keep(n);
    MatrixOptimum best{DenseMatrix(W.rows(), W.cols()), 0.0};
    bool first = true;
    do {
        std::fill(keep.begin(), keep.end(), 0.0);
        for (std::size_t i : idx) keep[i] = 1.0;
        const double value = evaluate(keep);
        if (first || value < best.loss) {
            first = false;
            best.loss = value;
            std::copy(keep.begin(), keep.end(), best.mask.data().begin());
        }
    } while (next_combination(idx, n));
    return best;
}

} // namespace

double row_loss(std::span<const double> w_row, const DenseMatrix& G, std::span<const double> mask) {
    const std::size_t d = w_row.size();
    if (mask.size() != d || G.rows() != d || G.cols() != d) throw ShapeError("row_loss: shapes differ");
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) z[j] = w_row[j] * (1.0 - mask[j]);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < d; ++j) row += G(i, j) * z[j];
        s += z[i] * row;
    }
    return s;
}

RowOptimum brute_force_row(std::span<const double> w_row, const DenseMatrix& G, std::size_t k) {
    if (G.rows() != w_row.size() || G.cols() != w_row.size()) {
        throw ShapeError("brute_force_row: Gram matrix does not match row");
    }
    auto best = enumerate(DenseMatrix::row_vector(w_row), G, k);
    const auto data = best.mask.data();
    return {std::vector<double>(data.begin(), data.end()), best.loss};
}

MatrixOptimum brute_force_unstructured(const DenseMatrix& W, const DenseMatrix& G, std::size_t k) {
    if (G.rows() != W.cols() || G.cols() != W.cols()) {
        throw ShapeError("brute_force_unstructured: Gram matrix does not match W");
    }
    return enumerate(W, G, k);
}

double lemma_bound(double epsilon, double lambda, std::size_t k, std::size_t r) {
    const double small = static_cast<double>(std::min(k, r));
    return epsilon + 2.0 * lambda * (small + std::sqrt(2.0 * static_cast<double>(r) * small));
}

bool complete_mass(std::vector<double>& m, std::size_t k) {
    double deficit = static_cast<double>(k) - std::accumulate(m.begin(), m.end(), 0.0);
    if (!(deficit > 1e-12)) return false;

    const DenseMatrix values = DenseMatrix::row_vector(m);
    const DenseMatrix top = select_per_group(values, GroupLayout{m.size(), 1, k});
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (top(0, j) != 0.0) open.push_back(j);

    // Water-filling: spread the deficit evenly, capping each entry at 1.
    while (deficit > 1e-15 && !open.empty()) {
        const double share = deficit / static_cast<double>(open.size());
        std::vector<std::size_t> still_open;
        for (std::size_t j : open) {
            const double add = std::min(share, 1.0 - m[j]);
            m[j] += add;
            deficit -= add;
            if (m[j] < 1.0) still_open.push_back(j);
        }
        open.swap(still_open);
    }
    return true;
}

BoundReport verify_lemma_bound(std::span<const double> w_row, const DenseMatrix& G, std::size_t k,
                               std::size_t T) {
    const std::size_t d = w_row.size();
    require_enumerable(d, k);
    if (G.rows() != d || G.cols() != d) throw ShapeError("verify_lemma_bound: Gram matrix does not match row");

    const DenseMatrix W = DenseMatrix::row_vector(w_row);
    const ObjectiveContext ctx(W, gram_from_matrix(G, W));
    const auto pattern = SparsityPattern::unstructured(k);
    const BinaryMask start = saliency_mask(wanda_scores(W, G), pattern);

    SolverConfig cfg;
    cfg.pattern = pattern;
    cfg.trace_every = 0;
    cfg.iterations = T;
    const DenseMatrix relaxed = fw_solve(ctx, cfg, start).iterate.values();
    cfg.iterations = 100 * std::max<std::size_t>(T, 1);
    const DenseMatrix reference = fw_solve(ctx, cfg, start).iterate.values();

    BoundReport rep;
    rep.k = k;
    rep.r = d - k;
    rep.relaxed_mask.assign(relaxed.data().begin(), relaxed.data().end());
    rep.raw_mass = std::accumulate(rep.relaxed_mask.begin(), rep.relaxed_mask.end(), 0.0);
    rep.mass_adjusted = complete_mass(rep.relaxed_mask, k);

    // f(reference) - gap(reference) lower-bounds the relaxed optimum, so
    // epsilon below is an upper bound on the true optimization error.
    const DenseMatrix ref_grad = gradient(ctx, reference);
    const BinaryMask ref_vertex = lmo(LmoRequest{ref_grad, pattern, nullptr});
    rep.reference_gap = std::max(0.0, fw_gap(ref_grad, reference, ref_vertex.values()));
    rep.f_reference = loss(ctx, reference);
    rep.f_relaxed = row_loss(w_row, G, rep.relaxed_mask);
    rep.epsilon = std::max(0.0, rep.f_relaxed - rep.f_reference + rep.reference_gap);

    rep.lambda_max = lambda_max(row_hessian(w_row, G));

    const DenseMatrix top =
        select_per_group(DenseMatrix::row_vector(rep.relaxed_mask), GroupLayout{d, 1, k});
    const auto rounded = top.data();
    rep.tau = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        if (rounded[j] == 0.0) rep.tau += rep.relaxed_mask[j];

    rep.f_hat = row_loss(w_row, G, rounded);
    rep.f_int = brute_force_row(w_row, G, k).loss;
    rep.bound_value = lemma_bound(rep.epsilon, rep.lambda_max, k, rep.r);
    const double scale = ctx.dense_loss();
    rep.satisfied = rep.f_hat - rep.f_int <= rep.bound_value + 1e-9 * scale;
    return rep;
}

} // namespace maskopt
