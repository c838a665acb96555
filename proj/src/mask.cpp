#include "maskopt/mask.hpp"

#include <algorithm>
#include <string>

#include "maskopt/error.hpp"

namespace maskopt {

namespace {

void require_binary(const DenseMatrix& values) {
    for (double v : values.data()) {
        if (v != 0.0 && v != 1.0) {
            throw BudgetError("binary mask entry " + std::to_string(v) + " is neither 0 nor 1");
        }
    }
}

double group_sum(std::span<const double> data, const GroupLayout& layout, std::size_t g) {
    double s = 0.0;
    const std::size_t b = layout.begin(g);
    for (std::size_t i = b; i < b + layout.group_size; ++i) s += data[i];
    return s;
}

void require_group_budget(const DenseMatrix& values, const SparsityPattern& pattern, double slack) {
    const auto layout = pattern.layout(values.rows(), values.cols());
    const auto data = values.data();
    for (std::size_t g = 0; g < layout.group_count; ++g) {
        const double s = group_sum(data, layout, g);
        if (s > static_cast<double>(layout.budget) + slack) {
            throw BudgetError("mask group " + std::to_string(g) + " holds " + std::to_string(s) +
                              " > budget " + std::to_string(layout.budget) + " of pattern " +
                              pattern.to_string());
        }
    }
}

} // namespace

BinaryMask::BinaryMask(DenseMatrix values, SparsityPattern pattern)
    : values_(std::move(values)), pattern_(pattern) {
    require_binary(values_);
    require_group_budget(values_, pattern_, 0.0);
}

BinaryMask BinaryMask::zeros(std::size_t rows, std::size_t cols, SparsityPattern pattern) {
    return BinaryMask(DenseMatrix(rows, cols), pattern);
}

std::size_t BinaryMask::count_ones() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values_.data().begin(), values_.data().end(), [](double v) { return v != 0.0; }));
}

bool BinaryMask::is_exact() const { return satisfies_exactly(values_, pattern_); }

MaskState::MaskState(DenseMatrix values, SparsityPattern pattern)
    : values_(std::move(values)), pattern_(pattern) {
    check_relaxed_feasible(values_, pattern_);
}

MaskState::MaskState(const BinaryMask& mask) : values_(mask.values()), pattern_(mask.pattern()) {}

void check_relaxed_feasible(const DenseMatrix& values, const SparsityPattern& pattern) {
    for (double v : values.data()) {
        if (!(v >= -kBoxTolerance && v <= 1.0 + kBoxTolerance)) {
            throw BudgetError("mask entry " + std::to_string(v) + " outside [0, 1]");
        }
    }
    require_group_budget(values, pattern, kBudgetTolerance);
}

bool satisfies_exactly(const DenseMatrix& values, const SparsityPattern& pattern) {
    GroupLayout layout;
    try {
        layout = pattern.layout(values.rows(), values.cols());
    } catch (const PatternError&) {
        return false;
    }
    const auto data = values.data();
    if (!std::all_of(data.begin(), data.end(), [](double v) { return v == 0.0 || v == 1.0; })) {
        return false;
    }
    const bool at_most = pattern.is_nm();
    const std::size_t target = std::min(layout.budget, layout.group_size);
    for (std::size_t g = 0; g < layout.group_count; ++g) {
        const auto s = static_cast<std::size_t>(group_sum(data, layout, g));
        if (at_most ? s > layout.budget : s != target) return false;
    }
    return true;
}

} // namespace maskopt
