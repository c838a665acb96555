#include "maskopt/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "maskopt/error.hpp"

namespace maskopt {

double NormalStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

SyntheticLayer generate_synthetic_layer(std::size_t d_out, std::size_t d_in, std::size_t batch,
                                        std::uint64_t seed, std::size_t outlier_cols,
                                        double outlier_scale) {
    if (d_out == 0 || d_in == 0 || batch == 0) {
        throw ShapeError("synthetic layer dimensions must be at least 1");
    }
    if (outlier_cols > d_in) throw ShapeError("more outlier features than input dimensions");
    if (!std::isfinite(outlier_scale)) throw NumericalError("outlier scale must be finite");

    NormalStream rng(seed);
    DenseMatrix W(d_out, d_in);
    for (double& v : W.data()) v = rng.next();
    DenseMatrix X(d_in, batch);
    for (double& v : X.data()) v = rng.next();
    for (std::size_t j = 0; j < outlier_cols; ++j)
        for (double& v : X.row(j)) v *= outlier_scale;
    return {std::move(W), std::move(X)};
}

} // namespace maskopt
