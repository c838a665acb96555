#include "maskopt/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maskopt/error.hpp"

namespace maskopt {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("matrix payload has " + std::to_string(data_.size()) + " values, expected " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
    DenseMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged rows in matrix literal");
        data.insert(data.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::row_vector(std::span<const double> values) {
    return DenseMatrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " does not match " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
    }
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " differ");
    }
    DenseMatrix out(a.rows(), b.cols());
    const std::size_t inner = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        const auto a_row = a.row(i);
        for (std::size_t p = 0; p < inner; ++p) {
            const double s = a_row[p];
            if (s == 0.0) continue;
            const auto b_row = b.row(p);
            for (std::size_t j = 0; j < out_row.size(); ++j) out_row[j] += s * b_row[j];
        }
    }
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

namespace {

template <class Op>
DenseMatrix elementwise(const DenseMatrix& a, const DenseMatrix& b, const char* what, Op op) {
    require_same_shape(a, b, what);
    DenseMatrix out(a.rows(), a.cols());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = op(x[i], y[i]);
    return out;
}

} // namespace

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
    return elementwise(a, b, "hadamard", [](double x, double y) { return x * y; });
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
    return elementwise(a, b, "subtract", [](double x, double y) { return x - y; });
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
    return elementwise(a, b, "add", [](double x, double y) { return x + y; });
}

DenseMatrix scaled(const DenseMatrix& a, double factor) {
    DenseMatrix out = a;
    for (double& v : out.data()) v *= factor;
    return out;
}

double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "frobenius_dot");
    double s = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double frobenius_norm(const DenseMatrix& a) { return std::sqrt(frobenius_dot(a, a)); }

double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

} // namespace maskopt
