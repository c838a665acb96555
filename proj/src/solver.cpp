#include "maskopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maskopt/error.hpp"
#include "maskopt/lmo.hpp"
#include "maskopt/selection.hpp"

namespace maskopt {

namespace {

struct LoopSetup {
    SparsityPattern pattern;             // feasible set of the FW iterate
    const BinaryMask* frozen = nullptr;  // excluded from LMO and thresholding
    bool merge_fixed = false;
    std::size_t iterations = 0;
    std::size_t trace_every = 0;
};

DenseMatrix with_fixed(const DenseMatrix& M, const BinaryMask* frozen) {
    return frozen ? add(M, frozen->values()) : M;
}

TraceRecord record_step(const ObjectiveContext& ctx, const LoopSetup& setup, std::size_t t,
                        const DenseMatrix& M, const DenseMatrix& grad, const BinaryMask& V) {
    const MaskState state(M, setup.pattern); // throws if the iterate left the polytope
    const BinaryMask rounded = threshold_topk(state, setup.frozen);

    TraceRecord rec;
    rec.step = t;
    rec.continuous_loss = loss(ctx, with_fixed(M, setup.frozen));
    rec.thresholded_loss = loss(ctx, with_fixed(rounded.values(), setup.frozen));
    rec.fw_gap = fw_gap(grad, M, V.values());
    double residual = 0.0;
    const auto m = M.data();
    const auto r = rounded.values().data();
    for (std::size_t i = 0; i < m.size(); ++i) residual += std::abs(m[i] - r[i]);
    rec.threshold_residual = m.empty() ? 0.0 : residual / static_cast<double>(m.size());
    return rec;
}

DenseMatrix run_frank_wolfe(const ObjectiveContext& ctx, const LoopSetup& setup, DenseMatrix M,
                            SolveTrace& trace) {
    for (std::size_t t = 0;; ++t) {
        const bool traced =
            setup.trace_every != 0 && (t % setup.trace_every == 0 || t == setup.iterations);
        if (t == setup.iterations && !traced) break;

        const DenseMatrix grad = gradient(
            ctx, setup.merge_fixed ? with_fixed(M, setup.frozen) : M);
        const BinaryMask V = lmo(LmoRequest{grad, setup.pattern, setup.frozen});
        if (traced) trace.records.push_back(record_step(ctx, setup, t, M, grad, V));
        if (t == setup.iterations) break;

        const double eta = step_size(t);
        auto m = M.data();
        const auto v = V.values().data();
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = std::clamp((1.0 - eta) * m[i] + eta * v[i], 0.0, 1.0);
        }
    }
    return M;
}

void require_layer_shape(const ObjectiveContext& ctx, const DenseMatrix& m, const char* what) {
    if (m.rows() != ctx.d_out() || m.cols() != ctx.d_in()) {
        throw ShapeError(std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", layer is " + std::to_string(ctx.d_out()) +
                         "x" + std::to_string(ctx.d_in()));
    }
}

} // namespace

double step_size(std::size_t t) noexcept { return 2.0 / (static_cast<double>(t) + 2.0); }

std::size_t fixed_count(std::size_t budget, double alpha) {
    const double exact = static_cast<double>(budget) * alpha;
    const auto n = static_cast<std::size_t>(std::floor(exact * (1.0 + 1e-12)));
    return std::min(n, budget);
}

BinaryMask threshold_topk(const MaskState& M, const BinaryMask* excluded) {
    const auto& values = M.values();
    const auto layout = M.pattern().layout(values.rows(), values.cols());
    SelectionOptions options;
    options.excluded = excluded ? &excluded->values() : nullptr;
    return BinaryMask(select_per_group(values, layout, options), M.pattern());
}

SaliencyMatrix warmstart_saliency(const ObjectiveContext& ctx, Warmstart::Kind kind) {
    switch (kind) {
    case Warmstart::Kind::Ria: return ria_scores(ctx.W(), ctx.G());
    case Warmstart::Kind::Magnitude: return magnitude_scores(ctx.W());
    case Warmstart::Kind::Wanda:
    case Warmstart::Kind::Custom: break;
    }
    return wanda_scores(ctx.W(), ctx.G());
}

BinaryMask warmstart_mask(const ObjectiveContext& ctx, const Warmstart& warmstart,
                          const SparsityPattern& pattern) {
    if (warmstart.kind == Warmstart::Kind::Custom) {
        if (!warmstart.custom) throw PatternError("custom warmstart requested without a mask");
        require_layer_shape(ctx, warmstart.custom->values(), "warmstart mask");
        return BinaryMask(warmstart.custom->values(), pattern);
    }
    return saliency_mask(warmstart_saliency(ctx, warmstart.kind), pattern);
}

SolveResult fw_solve(const ObjectiveContext& ctx, const SolverConfig& cfg, const BinaryMask& M0) {
    require_layer_shape(ctx, M0.values(), "initial mask");
    check_relaxed_feasible(M0.values(), cfg.pattern);

    LoopSetup setup;
    setup.pattern = cfg.pattern;
    setup.iterations = cfg.iterations;
    setup.trace_every = cfg.trace_every;

    SolveResult result{MaskState(M0.values(), cfg.pattern), {}};
    DenseMatrix M = run_frank_wolfe(ctx, setup, M0.values(), result.trace);
    result.iterate = MaskState(std::move(M), cfg.pattern);
    return result;
}

FixedSolveResult fw_solve_fixed(const ObjectiveContext& ctx, const SolverConfig& cfg,
                                const DenseMatrix& saliency) {
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
        throw PatternError("alpha must lie in [0, 1], got " + std::to_string(cfg.alpha));
    }
    require_layer_shape(ctx, saliency, "saliency");

    const auto layout = cfg.pattern.layout(ctx.d_out(), ctx.d_in());
    const std::size_t keep = fixed_count(layout.budget, cfg.alpha);
    const std::size_t fresh = layout.budget - keep;
    const auto keep_pattern = cfg.pattern.with_group_budget(keep);
    const auto fresh_pattern = cfg.pattern.with_group_budget(fresh);

    GroupLayout keep_layout = layout;
    keep_layout.budget = keep;
    BinaryMask fixed(select_per_group(saliency, keep_layout), keep_pattern);

    if (fresh == 0 || layout.total_budget() == 0) {
        return FixedSolveResult{BinaryMask(fixed.values(), cfg.pattern), fixed,
                                MaskState(fixed.values(), cfg.pattern), {}};
    }

    // Start from the warm-start mask on the free coordinates, trimmed by
    // saliency to the remaining budget of each group.
    const BinaryMask warm = warmstart_mask(ctx, cfg.warmstart, cfg.pattern);
    DenseMatrix closed(ctx.d_out(), ctx.d_in());
    {
        auto c = closed.data();
        const auto w = warm.values().data();
        const auto f = fixed.values().data();
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = (w[i] != 0.0 && f[i] == 0.0) ? 0.0 : 1.0;
    }
    GroupLayout fresh_layout = layout;
    fresh_layout.budget = fresh;
    SelectionOptions trim;
    trim.excluded = &closed;
    BinaryMask start(select_per_group(saliency, fresh_layout, trim), fresh_pattern);

    LoopSetup setup;
    setup.pattern = fresh_pattern;
    setup.frozen = &fixed;
    setup.merge_fixed = cfg.merge_fixed_into_iterate;
    setup.iterations = cfg.iterations;
    setup.trace_every = cfg.trace_every;

    SolveTrace trace;
    DenseMatrix M = run_frank_wolfe(ctx, setup, start.values(), trace);
    const BinaryMask rounded = threshold_topk(MaskState(M, fresh_pattern), &fixed);

    return FixedSolveResult{BinaryMask(add(rounded.values(), fixed.values()), cfg.pattern), fixed,
                            MaskState(add(M, fixed.values()), cfg.pattern), std::move(trace)};
}

} // namespace maskopt
