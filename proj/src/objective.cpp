#include "maskopt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "maskopt/error.hpp"
#include "maskopt/synthetic.hpp"

namespace maskopt {

ObjectiveContext::ObjectiveContext(DenseMatrix W, GramCache cache)
    : weights_(std::move(W)), cache_(std::move(cache)) {
    if (cache_.G().rows() != weights_.cols() || !cache_.H().same_shape(weights_)) {
        throw ShapeError("Gram cache does not match a " + std::to_string(weights_.rows()) + "x" +
                         std::to_string(weights_.cols()) + " weight matrix");
    }
    dense_loss_ = loss(*this, DenseMatrix(weights_.rows(), weights_.cols()));
}

double loss(const ObjectiveContext& ctx, const DenseMatrix& mask) {
    require_same_shape(ctx.W(), mask, "loss mask");
    DenseMatrix residual(mask.rows(), mask.cols());
    auto r = residual.data();
    const auto w = ctx.W().data();
    const auto m = mask.data();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = w[i] * (1.0 - m[i]);
    const DenseMatrix rg = matmul(residual, ctx.G());
    return frobenius_dot(rg, residual);
}

double loss(const ObjectiveContext& ctx, const MaskState& mask) { return loss(ctx, mask.values()); }

double loss(const ObjectiveContext& ctx, const BinaryMask& mask) { return loss(ctx, mask.values()); }

DenseMatrix gradient(const ObjectiveContext& ctx, const DenseMatrix& mask) {
    require_same_shape(ctx.W(), mask, "gradient mask");
    const DenseMatrix masked = hadamard(ctx.W(), mask);
    DenseMatrix grad = matmul(masked, ctx.G());
    auto g = grad.data();
    const auto h = ctx.H().data();
    const auto w = ctx.W().data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -2.0 * w[i] * (h[i] - g[i]);
    return grad;
}

DenseMatrix gradient(const ObjectiveContext& ctx, const MaskState& mask) {
    return gradient(ctx, mask.values());
}

DenseMatrix row_hessian(std::span<const double> w_row, const DenseMatrix& G) {
    if (G.rows() != G.cols() || G.rows() != w_row.size()) {
        throw ShapeError("row of length " + std::to_string(w_row.size()) + " against a " +
                         std::to_string(G.rows()) + "x" + std::to_string(G.cols()) + " Gram matrix");
    }
    DenseMatrix Q(G.rows(), G.cols());
    for (std::size_t i = 0; i < Q.rows(); ++i)
        for (std::size_t j = 0; j < Q.cols(); ++j) Q(i, j) = w_row[i] * G(i, j) * w_row[j];
    return Q;
}

double lambda_max(const DenseMatrix& Q, std::size_t iters, double tol) {
    if (Q.rows() != Q.cols()) throw ShapeError("lambda_max needs a square matrix");
    const std::size_t d = Q.rows();
    if (d == 0 || max_abs(Q) == 0.0) return 0.0;

    // A random start is almost surely not orthogonal to the top eigenvector.
    NormalStream rng(0x9e3779b97f4a7c15ULL);
    std::vector<double> v(d), qv(d);
    double norm = 0.0;
    for (double& x : v) {
        x = rng.next();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;

    double lambda = 0.0;
    for (std::size_t it = 0; it < std::max<std::size_t>(iters, 1); ++it) {
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += Q(i, j) * v[j];
            qv[i] = s;
        }
        lambda = 0.0;
        for (std::size_t i = 0; i < d; ++i) lambda += v[i] * qv[i];
        double residual = 0.0;
        double qnorm = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double e = qv[i] - lambda * v[i];
            residual += e * e;
            qnorm += qv[i] * qv[i];
        }
        if (qnorm == 0.0) return 0.0;
        if (std::sqrt(residual) <= tol * std::abs(lambda)) break;
        qnorm = std::sqrt(qnorm);
        for (std::size_t i = 0; i < d; ++i) v[i] = qv[i] / qnorm;
    }
    return lambda;
}

double lambda_max_rows(const DenseMatrix& W, const DenseMatrix& G) {
    double best = 0.0;
    for (std::size_t i = 0; i < W.rows(); ++i) best = std::max(best, lambda_max(row_hessian(W.row(i), G)));
    return best;
}

double fw_gap(const DenseMatrix& grad, const DenseMatrix& M, const DenseMatrix& V) {
    require_same_shape(grad, M, "fw_gap iterate");
    require_same_shape(grad, V, "fw_gap vertex");
    double s = 0.0;
    const auto g = grad.data();
    const auto m = M.data();
    const auto v = V.data();
    for (std::size_t i = 0; i < g.size(); ++i) s += (m[i] - v[i]) * g[i];
    return s;
}

double fw_gap(const DenseMatrix& grad, const MaskState& M, const BinaryMask& V) {
    return fw_gap(grad, M.values(), V.values());
}

} // namespace maskopt
