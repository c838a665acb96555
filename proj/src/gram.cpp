#include "maskopt/gram.hpp"

#include <algorithm>

#include "maskopt/error.hpp"

namespace maskopt {

GramCache::GramCache(DenseMatrix gram, DenseMatrix weighted)
    : gram_(std::move(gram)), weighted_(std::move(weighted)) {
    if (gram_.rows() != gram_.cols()) throw ShapeError("Gram matrix must be square");
    if (weighted_.cols() != gram_.rows()) throw ShapeError("H = W G has the wrong number of columns");
}

DenseMatrix gram_matrix(const DenseMatrix& X, std::size_t batch_cols) {
    if (batch_cols == 0) throw ShapeError("gram batch size must be at least 1");
    const std::size_t d = X.rows();
    const std::size_t B = X.cols();
    DenseMatrix G(d, d);
    DenseMatrix partial(d, d);
    for (std::size_t c0 = 0; c0 < B; c0 += batch_cols) {
        const std::size_t c1 = std::min(B, c0 + batch_cols);
        for (std::size_t i = 0; i < d; ++i) {
            const auto xi = X.row(i);
            for (std::size_t j = 0; j <= i; ++j) {
                const auto xj = X.row(j);
                double s = 0.0;
                for (std::size_t c = c0; c < c1; ++c) s += xi[c] * xj[c];
                partial(i, j) = s;
            }
        }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j <= i; ++j) G(i, j) += partial(i, j);
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j) G(j, i) = G(i, j);
    return G;
}

GramCache gram_from_matrix(DenseMatrix G, const DenseMatrix& W) {
    if (G.rows() != G.cols() || W.cols() != G.rows()) {
        throw ShapeError("Gram matrix is " + std::to_string(G.rows()) + "x" + std::to_string(G.cols()) +
                         " but W has " + std::to_string(W.cols()) + " columns");
    }
    DenseMatrix H = matmul(W, G);
    return GramCache(std::move(G), std::move(H));
}

GramCache gram_precompute(const DenseMatrix& X, const DenseMatrix& W, std::size_t batch_cols) {
    if (X.rows() != W.cols()) {
        throw ShapeError("activations have " + std::to_string(X.rows()) + " rows but W has " +
                         std::to_string(W.cols()) + " columns");
    }
    return gram_from_matrix(gram_matrix(X, batch_cols), W);
}

} // namespace maskopt
