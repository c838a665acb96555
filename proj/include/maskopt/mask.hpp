#pragma once

#include "maskopt/matrix.hpp"
#include "maskopt/pattern.hpp"

namespace maskopt {

inline constexpr double kBoxTolerance = 1e-12;
inline constexpr double kBudgetTolerance = 1e-9;

/// Binary mask that is a vertex of the relaxed polytope of its pattern:
/// entries are exactly 0 or 1 and every group holds at most its budget.
///
/// LMO outputs may select fewer ones than the budget allows, so the
/// constructor only enforces the vertex property. Masks produced by
/// thresholding and saliency selection additionally satisfy is_exact().
class BinaryMask {
public:
    BinaryMask(DenseMatrix values, SparsityPattern pattern);

    static BinaryMask zeros(std::size_t rows, std::size_t cols, SparsityPattern pattern);

    const DenseMatrix& values() const noexcept { return values_; }
    const SparsityPattern& pattern() const noexcept { return pattern_; }
    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t cols() const noexcept { return values_.cols(); }
    bool at(std::size_t r, std::size_t c) const noexcept { return values_(r, c) != 0.0; }
    bool at_flat(std::size_t i) const noexcept { return values_.data()[i] != 0.0; }
    std::size_t count_ones() const noexcept;

    // Unstructured: sum == min(k, size); PerRow: every row sum == k_row;
    // NM: every block sum <= m.
    bool is_exact() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    DenseMatrix values_;
    SparsityPattern pattern_;
};

/// Continuous Frank-Wolfe iterate in [0,1]^{d_out x d_in} whose group sums
/// respect the pattern budget in the L1 sense.
class MaskState {
public:
    MaskState(DenseMatrix values, SparsityPattern pattern);
    explicit MaskState(const BinaryMask& mask);

    const DenseMatrix& values() const noexcept { return values_; }
    const SparsityPattern& pattern() const noexcept { return pattern_; }
    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t cols() const noexcept { return values_.cols(); }

private:
    DenseMatrix values_;
    SparsityPattern pattern_;
};

// Throws BudgetError/PatternError unless `values` lies in [0,1] and every
// group sum is within budget + kBudgetTolerance.
void check_relaxed_feasible(const DenseMatrix& values, const SparsityPattern& pattern);

// True if the binary matrix satisfies the pattern exactly (see is_exact()).
bool satisfies_exactly(const DenseMatrix& values, const SparsityPattern& pattern);

} // namespace maskopt
