#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maskopt/mask.hpp"
#include "maskopt/matrix.hpp"

namespace maskopt {

inline constexpr std::size_t kEnumerationLimit = 24;

struct RowOptimum {
    std::vector<double> mask; // 0/1 per coordinate
    double loss = 0.0;
};

struct MatrixOptimum {
    DenseMatrix mask;
    double loss = 0.0;
};

// (1 - m)^T Q (1 - m) with Q = row_hessian(w_row, G).
double row_loss(std::span<const double> w_row, const DenseMatrix& G, std::span<const double> mask);

// Exact minimizer over all row masks with exactly k ones. Combinations are
// visited in lexicographic order and the first minimizer wins.
RowOptimum brute_force_row(std::span<const double> w_row, const DenseMatrix& G, std::size_t k);

// Exact minimizer over all d_out x d_in masks with exactly k ones in total.
MatrixOptimum brute_force_unstructured(const DenseMatrix& W, const DenseMatrix& G, std::size_t k);

struct BoundReport {
    double epsilon = 0.0;     // certified optimization error of the relaxed solve
    double lambda_max = 0.0;
    std::size_t k = 0;
    std::size_t r = 0;        // d_in - k
    double tau = 0.0;         // mass of the relaxed mask outside its top-k
    double bound_value = 0.0; // epsilon + 2 lambda (min(k,r) + sqrt(2 r min(k,r)))
    double f_hat = 0.0;       // loss of the top-k rounding
    double f_int = 0.0;       // brute-force integral optimum
    bool satisfied = false;

    // Diagnostics.
    double raw_mass = 0.0;     // L1 mass of the FW iterate before adjustment
    bool mass_adjusted = false;
    double f_relaxed = 0.0;    // loss of the (adjusted) relaxed mask
    double f_reference = 0.0;  // loss of the long reference run
    double reference_gap = 0.0; // FW gap of the reference iterate
    std::vector<double> relaxed_mask;
};

// Largest possible gap between the top-k rounding and the integral optimum.
double lemma_bound(double epsilon, double lambda_max, std::size_t k, std::size_t r);

// Raises the mass of `m` to exactly k by water-filling the coordinates of
// its top-k set towards 1. The top-k set is unchanged. Returns true if any
// mass was added.
bool complete_mass(std::vector<double>& m, std::size_t k);

// Runs row-wise FW for T iterations from the Wanda top-k mask, completes its
// mass to k, measures epsilon against a 100*T iteration reference run plus
// that run's FW gap, and checks the rounding bound against enumeration.
BoundReport verify_lemma_bound(std::span<const double> w_row, const DenseMatrix& G, std::size_t k,
                               std::size_t T);

} // namespace maskopt
