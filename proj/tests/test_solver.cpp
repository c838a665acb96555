#include <doctest.h>

#include <cmath>
#include <limits>

#include "maskopt/error.hpp"
#include "maskopt/gram.hpp"
#include "maskopt/lmo.hpp"
#include "maskopt/objective.hpp"
#include "maskopt/solver.hpp"
#include "reference.hpp"

using namespace maskopt;

namespace {

ObjectiveContext random_context(ref::Rng& rng, std::size_t d_out, std::size_t d_in, std::size_t B) {
    DenseMatrix W = rng.matrix(d_out, d_in);
    const DenseMatrix X = rng.matrix(d_in, B);
    return ObjectiveContext(W, gram_from_matrix(ref::naive_gram(X), W));
}

SolverConfig config(std::size_t T, SparsityPattern pattern, double alpha = 0.0) {
    SolverConfig cfg;
    cfg.iterations = T;
    cfg.pattern = pattern;
    cfg.alpha = alpha;
    return cfg;
}

} // namespace

TEST_CASE("step size schedule") {
    CHECK(step_size(0) == 1.0);
    CHECK(step_size(2) == 0.5);
    CHECK(step_size(998) == doctest::Approx(0.002).epsilon(1e-15));
}

TEST_CASE("fixed_count") {
    CHECK(fixed_count(10, 0.0) == 0);
    CHECK(fixed_count(10, 1.0) == 10);
    CHECK(fixed_count(10, 0.55) == 5);
    CHECK(fixed_count(100, 0.29) == 29);
    CHECK(fixed_count(7, 0.5) == 3);
}

TEST_CASE("threshold_topk examples") {
    const MaskState M(DenseMatrix::from_rows({{0.9, 0.1, 0.5}, {0.5, 0.0, 0.0}}),
                      SparsityPattern::unstructured(2));
    // 0.5 ties resolve to the lower flat index.
    CHECK(threshold_topk(M).values() == DenseMatrix::from_rows({{1, 0, 1}, {0, 0, 0}}));

    const MaskState R(DenseMatrix::from_rows({{0.2, 0.3, 0.5}, {0.6, 0.4, 0.0}}), SparsityPattern::per_row(1));
    CHECK(threshold_topk(R).values() == DenseMatrix::from_rows({{0, 0, 1}, {1, 0, 0}}));

    const MaskState N(DenseMatrix::from_rows({{0.1, 0.9, 0.5, 0.5}}), SparsityPattern::nm(2, 1));
    CHECK(threshold_topk(N).values() == DenseMatrix::from_rows({{0, 1, 1, 0}}));

    const BinaryMask excluded(DenseMatrix::from_rows({{1, 0, 0}, {0, 0, 0}}), SparsityPattern::unstructured(1));
    CHECK(threshold_topk(M, &excluded).values() == DenseMatrix::from_rows({{0, 0, 1}, {1, 0, 0}}));
}

TEST_CASE("threshold_topk maximizes overlap with the iterate among exact masks") {
    ref::Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        DenseMatrix v = rng.uniform_matrix(1, 8);
        for (double& x : v.data()) x *= 0.5; // sum <= 4 keeps it feasible for k = 4
        const MaskState M(v, SparsityPattern::unstructured(4));
        const BinaryMask T = threshold_topk(M);
        CHECK(T.is_exact());
        double best = -1.0;
        for (const auto& m : ref::enumerate_exact(8, 4)) {
            double s = 0.0;
            for (std::size_t i = 0; i < 8; ++i) s += m[i] * v.data()[i];
            best = std::max(best, s);
        }
        CHECK(frobenius_dot(T.values(), v) == doctest::Approx(best).epsilon(1e-14));
    }
}

TEST_CASE("T = 0 returns the warmstart and T = 1 returns the first LMO vertex") {
    ref::Rng rng(32);
    const auto ctx = random_context(rng, 3, 6, 10);
    const auto pattern = SparsityPattern::unstructured(9);
    const BinaryMask M0 = warmstart_mask(ctx, Warmstart::wanda(), pattern);

    const auto r0 = fw_solve(ctx, config(0, pattern), M0);
    CHECK(r0.iterate.values() == M0.values());
    REQUIRE(r0.trace.records.size() == 1);
    CHECK(r0.trace.records[0].threshold_residual == 0.0);

    const auto r1 = fw_solve(ctx, config(1, pattern), M0);
    const BinaryMask V = lmo(LmoRequest{gradient(ctx, M0.values()), pattern});
    CHECK(r1.iterate.values() == V.values());
}

TEST_CASE("fw_solve rejects infeasible or misshapen warmstarts") {
    ref::Rng rng(33);
    const auto ctx = random_context(rng, 2, 4, 6);
    const BinaryMask too_many(DenseMatrix(2, 4, 1.0), SparsityPattern::unstructured(8));
    CHECK_THROWS_AS(fw_solve(ctx, config(5, SparsityPattern::unstructured(3)), too_many), BudgetError);
    const BinaryMask wrong(DenseMatrix(4, 2), SparsityPattern::unstructured(3));
    CHECK_THROWS_AS(fw_solve(ctx, config(5, SparsityPattern::unstructured(3)), wrong), ShapeError);
}

TEST_CASE("trace records follow trace_every and include the last step") {
    ref::Rng rng(34);
    const auto ctx = random_context(rng, 2, 6, 8);
    auto cfg = config(25, SparsityPattern::per_row(3));
    cfg.trace_every = 10;
    const auto r = fw_solve(ctx, cfg, warmstart_mask(ctx, Warmstart::wanda(), cfg.pattern));
    REQUIRE(r.trace.records.size() == 4);
    CHECK(r.trace.records[0].step == 0);
    CHECK(r.trace.records[1].step == 10);
    CHECK(r.trace.records[2].step == 20);
    CHECK(r.trace.records[3].step == 25);
    for (const auto& rec : r.trace.records) {
        CHECK(rec.threshold_residual >= 0.0);
        CHECK(rec.fw_gap >= -1e-12 * ctx.dense_loss());
    }
    cfg.trace_every = 0;
    CHECK(fw_solve(ctx, cfg, warmstart_mask(ctx, Warmstart::wanda(), cfg.pattern)).trace.records.empty());
}

TEST_CASE("FW converges within k lambda_max / T of a long reference run") {
    ref::Rng rng(35);
    for (int trial = 0; trial < 5; ++trial) {
        const auto ctx = random_context(rng, 1, 10, 16);
        const auto pattern = SparsityPattern::unstructured(5);
        const BinaryMask M0 = warmstart_mask(ctx, Warmstart::wanda(), pattern);
        auto ref_cfg = config(200000, pattern);
        ref_cfg.trace_every = 0;
        const double f_ref = loss(ctx, fw_solve(ctx, ref_cfg, M0).iterate);
        const double lam = lambda_max(row_hessian(ctx.W().row(0), ctx.G()));
        for (std::size_t T : {100u, 1000u}) {
            auto cfg = config(T, pattern);
            cfg.trace_every = 0;
            const double f = loss(ctx, fw_solve(ctx, cfg, M0).iterate);
            CHECK(f - f_ref <= 5.0 * lam / static_cast<double>(T));
        }
    }
}

TEST_CASE("every traced iterate is feasible for every pattern") {
    ref::Rng rng(36);
    for (const auto& pattern : {SparsityPattern::unstructured(10), SparsityPattern::per_row(3),
                                SparsityPattern::nm(4, 2)}) {
        const auto ctx = random_context(rng, 4, 8, 12);
        auto cfg = config(50, pattern);
        cfg.trace_every = 1;
        const auto r = fw_solve(ctx, cfg, warmstart_mask(ctx, Warmstart::ria(), pattern));
        CHECK(r.trace.records.size() == 51);
        CHECK_NOTHROW(check_relaxed_feasible(r.iterate.values(), pattern));
        CHECK(threshold_topk(r.iterate).is_exact());
    }
}

TEST_CASE("alpha = 1 reproduces the saliency mask") {
    ref::Rng rng(37);
    for (const auto& pattern : {SparsityPattern::unstructured(12), SparsityPattern::per_row(4),
                                SparsityPattern::nm(4, 2)}) {
        const auto ctx = random_context(rng, 3, 8, 12);
        const auto S = wanda_scores(ctx.W(), ctx.G());
        const auto r = fw_solve_fixed(ctx, config(100, pattern, 1.0), S.scores());
        CHECK(r.mask.values() == saliency_mask(S, pattern).values());
        CHECK(r.trace.records.empty());
    }
}

TEST_CASE("alpha = 0 equals thresholded plain FW") {
    ref::Rng rng(38);
    for (const auto& pattern : {SparsityPattern::unstructured(12), SparsityPattern::per_row(4),
                                SparsityPattern::nm(4, 2)}) {
        const auto ctx = random_context(rng, 3, 8, 12);
        const auto S = wanda_scores(ctx.W(), ctx.G());
        const auto cfg = config(200, pattern, 0.0);
        const auto fixed = fw_solve_fixed(ctx, cfg, S.scores());
        const auto plain = fw_solve(ctx, cfg, saliency_mask(S, pattern));
        CHECK(fixed.mask.values() == threshold_topk(plain.iterate).values());
        CHECK(fixed.fixed.count_ones() == 0);
    }
}

TEST_CASE("intermediate alpha keeps the fixed weights and the exact budget") {
    ref::Rng rng(39);
    for (bool literal : {false, true}) {
        for (const auto& pattern : {SparsityPattern::unstructured(16), SparsityPattern::per_row(4),
                                    SparsityPattern::nm(4, 2)}) {
            const auto ctx = random_context(rng, 4, 8, 12);
            const auto S = wanda_scores(ctx.W(), ctx.G());
            auto cfg = config(150, pattern, 0.5);
            cfg.merge_fixed_into_iterate = !literal;
            const auto r = fw_solve_fixed(ctx, cfg, S.scores());
            const std::size_t budget = pattern.budget(4, 8);
            CHECK(r.fixed.count_ones() == budget / 2);
            CHECK(r.mask.count_ones() == budget);
            CHECK(r.mask.is_exact());
            for (std::size_t i = 0; i < 32; ++i)
                if (r.fixed.at_flat(i)) CHECK(r.mask.at_flat(i));
            CHECK_NOTHROW(check_relaxed_feasible(r.iterate.values(), pattern));
        }
    }
}

TEST_CASE("invalid alpha is rejected") {
    ref::Rng rng(40);
    const auto ctx = random_context(rng, 2, 4, 6);
    const auto S = wanda_scores(ctx.W(), ctx.G());
    CHECK_THROWS_AS(fw_solve_fixed(ctx, config(5, SparsityPattern::unstructured(3), 1.5), S.scores()),
                    ConstraintError);
    CHECK_THROWS_AS(fw_solve_fixed(ctx, config(5, SparsityPattern::unstructured(3), -0.1), S.scores()),
                    ConstraintError);
}

TEST_CASE("warmstart kinds") {
    ref::Rng rng(41);
    const auto ctx = random_context(rng, 3, 6, 8);
    const auto pattern = SparsityPattern::per_row(2);
    CHECK(warmstart_mask(ctx, Warmstart::magnitude(), pattern).values() ==
          saliency_mask(magnitude_scores(ctx.W()), pattern).values());
    CHECK(warmstart_mask(ctx, Warmstart::ria(), pattern).values() ==
          saliency_mask(ria_scores(ctx.W(), ctx.G()), pattern).values());
    const BinaryMask custom(DenseMatrix::from_rows({{1, 1, 0, 0, 0, 0}, {0, 0, 1, 1, 0, 0}, {0, 0, 0, 0, 1, 1}}),
                            pattern);
    CHECK(warmstart_mask(ctx, Warmstart::from_mask(custom), pattern).values() == custom.values());
}
