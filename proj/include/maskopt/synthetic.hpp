#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "maskopt/matrix.hpp"

namespace maskopt {

/// Standard normal stream used for all synthetic data.
///
/// Uniforms come from std::mt19937_64 (fully specified by the C++
/// standard) as u = (x >> 11) * 2^-53. Normals use the Box-Muller pair
///   z0 = sqrt(-2 ln(1 - u1)) cos(2 pi u2),  z1 = sqrt(-2 ln(1 - u1)) sin(2 pi u2)
/// emitted in the order z0, z1. Reimplementations that follow this recipe
/// reproduce the same values up to libm rounding.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double uniform();
    double next();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct SyntheticLayer {
    DenseMatrix W; // d_out x d_in
    DenseMatrix X; // d_in x B
};

// W then X are filled in row-major order from one NormalStream(seed).
// Rows j < outlier_cols of X are multiplied by outlier_scale to mimic
// activation outlier features.
SyntheticLayer generate_synthetic_layer(std::size_t d_out, std::size_t d_in, std::size_t batch,
                                        std::uint64_t seed, std::size_t outlier_cols,
                                        double outlier_scale);

} // namespace maskopt
