#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "maskopt/baselines.hpp"
#include "maskopt/mask.hpp"
#include "maskopt/objective.hpp"
#include "maskopt/pattern.hpp"

namespace maskopt {

struct Warmstart {
    enum class Kind { Wanda, Ria, Magnitude, Custom };

    Kind kind = Kind::Wanda;
    std::optional<BinaryMask> custom;

    static Warmstart wanda() { return {Kind::Wanda, std::nullopt}; }
    static Warmstart ria() { return {Kind::Ria, std::nullopt}; }
    static Warmstart magnitude() { return {Kind::Magnitude, std::nullopt}; }
    static Warmstart from_mask(BinaryMask mask) { return {Kind::Custom, std::move(mask)}; }
};

struct SolverConfig {
    std::size_t iterations = 0;
    double alpha = 0.0;
    SparsityPattern pattern;
    Warmstart warmstart;
    std::size_t trace_every = 10; // 0 disables tracing
    // With alpha-fixing, evaluate the gradient at M_t + fixed mask. When
    // false the fixed weights count as pruned inside the FW loop and are
    // only restored after thresholding.
    bool merge_fixed_into_iterate = true;
};

struct TraceRecord {
    std::size_t step = 0;
    double continuous_loss = 0.0;
    double thresholded_loss = 0.0;
    double fw_gap = 0.0;
    // Mean absolute difference between the iterate and its thresholded mask.
    double threshold_residual = 0.0;
};

struct SolveTrace {
    std::vector<TraceRecord> records;
};

struct SolveResult {
    MaskState iterate;
    SolveTrace trace;
};

struct FixedSolveResult {
    BinaryMask mask;     // thresholded FW mask plus fixed mask
    BinaryMask fixed;    // top-k_keep saliency coordinates
    MaskState iterate;   // final FW iterate plus fixed mask
    SolveTrace trace;
};

// 2 / (t + 2)
double step_size(std::size_t t) noexcept;

// Keeps the largest entries of every pattern group (budget taken from the
// mask's own pattern). Coordinates set in `excluded` are never kept.
BinaryMask threshold_topk(const MaskState& M, const BinaryMask* excluded = nullptr);

// Saliency matrix matching the warmstart kind (Wanda for Custom).
SaliencyMatrix warmstart_saliency(const ObjectiveContext& ctx, Warmstart::Kind kind);

// Binary warm-start mask for `pattern`.
BinaryMask warmstart_mask(const ObjectiveContext& ctx, const Warmstart& warmstart,
                          const SparsityPattern& pattern);

// Plain Frank-Wolfe: T iterations of gradient, LMO and convex update from
// M0. Every traced iterate is checked for feasibility.
SolveResult fw_solve(const ObjectiveContext& ctx, const SolverConfig& cfg, const BinaryMask& M0);

// Frank-Wolfe with the floor(budget * alpha) most salient weights of every
// pattern group frozen to one; FW optimizes the remaining budget on the
// other coordinates and the result is thresholded and merged back.
FixedSolveResult fw_solve_fixed(const ObjectiveContext& ctx, const SolverConfig& cfg,
                                const DenseMatrix& saliency);

// floor(budget * alpha), tolerant to alpha values like 0.29 whose product
// lands one ulp below an integer.
std::size_t fixed_count(std::size_t budget, double alpha);

} // namespace maskopt
