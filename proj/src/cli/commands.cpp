#include "maskopt/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "csv.hpp"
#include "maskopt/baselines.hpp"
#include "maskopt/error.hpp"
#include "maskopt/gram.hpp"
#include "maskopt/matrix_io.hpp"
#include "maskopt/objective.hpp"
#include "maskopt/oracle.hpp"
#include "maskopt/solver.hpp"
#include "maskopt/synthetic.hpp"

namespace fs = std::filesystem;

namespace maskopt::cli {

namespace {

constexpr std::size_t kGramBatchCols = 4096;

// Raised when a lemma bound check fails; maps to exit code 4.
class BoundViolation : public Error {
public:
    using Error::Error;
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots so output order never depends on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

Warmstart parse_warmstart(const std::string& text) {
    if (text == "wanda") return Warmstart::wanda();
    if (text == "ria") return Warmstart::ria();
    if (text == "magnitude") return Warmstart::magnitude();
    if (text.rfind("file:", 0) == 0) {
        DenseMatrix m = load_matrix(text.substr(5));
        const std::size_t n = m.size();
        // The real pattern is attached once the layer shape is known.
        return Warmstart::from_mask(BinaryMask(std::move(m), SparsityPattern::unstructured(n)));
    }
    throw PatternError("unknown warmstart '" + text + "' (expected wanda|ria|magnitude|file:PATH)");
}

std::string warmstart_name(Warmstart::Kind kind) {
    switch (kind) {
    case Warmstart::Kind::Wanda: return "wanda";
    case Warmstart::Kind::Ria: return "ria";
    case Warmstart::Kind::Magnitude: return "magnitude";
    case Warmstart::Kind::Custom: return "file";
    }
    return "?";
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FormatError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// Common CLI11 wrapper: parses, runs, and maps exceptions to exit codes.
int guarded(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::function<int()>& body) {
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << app.get_name() << ": " << e.what() << '\n';
        return kUsage;
    }
    try {
        return body();
    } catch (const BoundViolation& e) {
        err << app.get_name() << ": " << e.what() << '\n';
        return kBound;
    } catch (const FormatError& e) {
        err << app.get_name() << ": " << e.what() << '\n';
        return kFormat;
    } catch (const ConstraintError& e) {
        err << app.get_name() << ": " << e.what() << '\n';
        return kConstraint;
    } catch (const std::exception& e) {
        err << app.get_name() << ": " << e.what() << '\n';
        return kUsage;
    }
}

void add_threads_option(CLI::App& app, unsigned& threads) {
    threads = default_threads();
    app.add_option("--threads", threads, "Worker threads (default: $MASKOPT_THREADS or 1)")
        ->check(CLI::PositiveNumber);
}

// Per-row SparseGPT budgets that reproduce the pattern's total budget.
double sparsegpt_loss(const DenseMatrix& W, const DenseMatrix& G, const SparsityPattern& pattern) {
    const double damping = default_damping(G);
    double total = 0.0;
    const auto layout = pattern.layout(W.rows(), W.cols());
    for (std::size_t i = 0; i < W.rows(); ++i) {
        SparseGptRow row;
        if (const auto* nm = std::get_if<NM>(&pattern.variant())) {
            row = sparsegpt_greedy_row(W.row(i), G, 0, damping, nm->n, nm->m);
        } else if (pattern.is_per_row()) {
            row = sparsegpt_greedy_row(W.row(i), G, layout.budget, damping);
        } else {
            // Spread an unstructured budget as evenly as possible over rows.
            const std::size_t k = layout.budget;
            const std::size_t base = k / W.rows();
            const std::size_t k_row = base + (i < k % W.rows() ? 1 : 0);
            row = sparsegpt_greedy_row(W.row(i), G, k_row, damping);
        }
        total += row_reconstruction_error(row.weights, W.row(i), G);
    }
    return total;
}

} // namespace

unsigned default_threads() {
    if (const char* env = std::getenv("MASKOPT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return 1;
}

int cmd_gen(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Generate a synthetic layer (weights.mxf, acts.mxf)", "gen"};
    std::size_t d_out = 16, d_in = 32, batch = 64, outlier_cols = 0;
    std::uint64_t seed = 0;
    double outlier_scale = 1.0;
    std::string dir;
    bool write_gram = false;
    app.add_option("--dout", d_out, "Output dimension")->check(CLI::PositiveNumber);
    app.add_option("--din", d_in, "Input dimension")->check(CLI::PositiveNumber);
    app.add_option("--batch", batch, "Calibration columns B")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "PRNG seed");
    app.add_option("--outlier-cols", outlier_cols, "Number of scaled activation features");
    app.add_option("--outlier-scale", outlier_scale, "Scale of the outlier features");
    app.add_option("--out", dir, "Output directory")->required();
    app.add_flag("--gram", write_gram, "Also write gram.mxf = X X^T");

    return guarded(app, args, out, err, [&] {
        const auto layer = generate_synthetic_layer(d_out, d_in, batch, seed, outlier_cols, outlier_scale);
        ensure_dir(dir);
        save_matrix(fs::path(dir) / "weights.mxf", layer.W);
        save_matrix(fs::path(dir) / "acts.mxf", layer.X);
        if (write_gram) save_matrix(fs::path(dir) / "gram.mxf", gram_matrix(layer.X, kGramBatchCols));
        return int{kOk};
    });
}

int cmd_prune(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Select a pruning mask for one layer", "prune"};
    std::string weights_path, acts_path, gram_path, pattern_text, warmstart_text = "wanda", dir;
    std::size_t iters = 100, trace_every = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    bool literal_fixed = false;
    unsigned threads = 1;
    app.add_option("--weights", weights_path, "Weight matrix W (d_out x d_in)")->required();
    auto* acts = app.add_option("--acts", acts_path, "Activations X (d_in x B)");
    auto* gram = app.add_option("--gram", gram_path, "Precomputed X X^T (d_in x d_in)");
    acts->excludes(gram);
    app.add_option("--pattern", pattern_text, "u:K | u%:P | row:K | M:N")->required();
    app.add_option("--iters", iters, "Frank-Wolfe iterations T");
    app.add_option("--alpha", alpha, "Fraction of the budget fixed by saliency")->check(CLI::Range(0.0, 1.0));
    app.add_option("--warmstart", warmstart_text, "wanda | ria | magnitude | file:PATH");
    app.add_option("--seed", seed, "Recorded in the metrics; pruning itself is deterministic");
    app.add_option("--out", dir, "Output directory")->required();
    app.add_option("--trace-every", trace_every, "Trace interval (0 = no trace.csv)");
    app.add_flag("--literal-fixed", literal_fixed,
                 "Treat alpha-fixed weights as pruned while computing FW gradients");
    add_threads_option(app, threads);

    return guarded(app, args, out, err, [&] {
        if (acts_path.empty() == gram_path.empty()) {
            throw FormatError("exactly one of --acts or --gram is required");
        }
        const PatternSpec spec = PatternSpec::parse(pattern_text);
        Warmstart warmstart = parse_warmstart(warmstart_text);

        DenseMatrix W = load_matrix(weights_path);
        GramCache cache = acts_path.empty() ? gram_from_matrix(load_matrix(gram_path), W)
                                            : gram_precompute(load_matrix(acts_path), W, kGramBatchCols);
        const SparsityPattern pattern = spec.resolve(W.rows(), W.cols());
        const ObjectiveContext ctx(std::move(W), std::move(cache));

        SolverConfig cfg;
        cfg.iterations = iters;
        cfg.alpha = alpha;
        cfg.pattern = pattern;
        cfg.warmstart = warmstart;
        cfg.trace_every = trace_every;
        cfg.merge_fixed_into_iterate = !literal_fixed;

        const BinaryMask warm = warmstart_mask(ctx, warmstart, pattern);
        const SaliencyMatrix saliency = warmstart_saliency(ctx, warmstart.kind);
        const FixedSolveResult result = fw_solve_fixed(ctx, cfg, saliency.scores());

        const double warm_loss = loss(ctx, warm);
        const double cont_loss = loss(ctx, result.iterate);
        const double thr_loss = loss(ctx, result.mask);
        const double reduction = warm_loss > 0.0 ? 1.0 - thr_loss / warm_loss : 0.0;

        ensure_dir(dir);
        save_matrix(fs::path(dir) / "mask.mxf", result.mask.values());

        CsvTable metrics({"pattern", "budget", "d_out", "d_in", "iters", "alpha", "warmstart", "seed",
                          "dense_loss", "warmstart_loss", "continuous_loss", "thresholded_loss",
                          "relative_reduction"});
        CsvTable::Row row;
        row.add(spec.format())
            .add(pattern.budget(ctx.d_out(), ctx.d_in()))
            .add(ctx.d_out())
            .add(ctx.d_in())
            .add(iters)
            .add(alpha)
            .add(warmstart_name(warmstart.kind))
            .add(std::to_string(seed))
            .add(ctx.dense_loss())
            .add(warm_loss)
            .add(cont_loss)
            .add(thr_loss)
            .add(reduction);
        metrics.push(std::move(row));
        metrics.write_file((fs::path(dir) / "metrics.csv").string());

        if (trace_every > 0) {
            CsvTable trace({"step", "continuous_loss", "thresholded_loss", "fw_gap", "threshold_residual"});
            for (const auto& rec : result.trace.records) {
                CsvTable::Row r;
                r.add(rec.step).add(rec.continuous_loss).add(rec.thresholded_loss).add(rec.fw_gap).add(
                    rec.threshold_residual);
                trace.push(std::move(r));
            }
            trace.write_file((fs::path(dir) / "trace.csv").string());
        }
        out << fmt::format("{}: warmstart {:.6g} -> thresholded {:.6g} (reduction {:.4f})\n",
                           spec.format(), warm_loss, thr_loss, reduction);
        return int{kOk};
    });
}

int cmd_bench(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compare SparseFW against the greedy baselines on synthetic layers", "bench"};
    std::size_t d_out = 16, d_in = 32, outlier_cols = 2, reps = 5;
    double outlier_scale = 10.0;
    std::vector<std::size_t> batches{64}, iter_list{100};
    std::vector<double> alphas{0.0};
    std::vector<std::uint64_t> seeds{1};
    std::string pattern_text = "u%:50", warmstart_text = "wanda", dir;
    bool timing = false;
    unsigned threads = 1;
    app.add_option("--dout", d_out, "Output dimension")->check(CLI::PositiveNumber);
    app.add_option("--din", d_in, "Input dimension")->check(CLI::PositiveNumber);
    app.add_option("--batch", batches, "Calibration column counts (comma list)")->delimiter(',');
    app.add_option("--iters", iter_list, "FW iteration counts (comma list)")->delimiter(',');
    app.add_option("--alpha", alphas, "Fixed fractions (comma list)")->delimiter(',');
    app.add_option("--seeds", seeds, "Seeds (comma list)")->delimiter(',');
    app.add_option("--outlier-cols", outlier_cols, "Number of scaled activation features");
    app.add_option("--outlier-scale", outlier_scale, "Scale of the outlier features");
    app.add_option("--pattern", pattern_text, "u:K | u%:P | row:K | M:N");
    app.add_option("--warmstart", warmstart_text, "wanda | ria | magnitude");
    app.add_option("--out", dir, "Output directory (bench.csv)")->required();
    app.add_flag("--timing", timing, "Add median per-iteration wall time (non-deterministic)");
    app.add_option("--reps", reps, "Timing repetitions (>= 5)")->check(CLI::Range(5, 1000));
    add_threads_option(app, threads);

    return guarded(app, args, out, err, [&] {
        const PatternSpec spec = PatternSpec::parse(pattern_text);
        const Warmstart warmstart = parse_warmstart(warmstart_text);
        if (warmstart.kind == Warmstart::Kind::Custom) throw PatternError("bench needs a saliency warmstart");
        for (double a : alphas)
            if (!(a >= 0.0 && a <= 1.0)) throw PatternError("alpha values must lie in [0, 1]");
        for (std::size_t b : batches)
            if (b == 0) throw ShapeError("batch sizes must be positive");
        const SparsityPattern pattern = spec.resolve(d_out, d_in);

        struct Job {
            std::size_t batch;
            std::uint64_t seed;
        };
        std::vector<Job> jobs;
        for (std::size_t b : batches)
            for (std::uint64_t s : seeds) jobs.push_back({b, s});

        std::vector<std::vector<CsvTable::Row>> rows(jobs.size());
        parallel_for(jobs.size(), threads, [&](std::size_t j) {
            const auto& job = jobs[j];
            auto layer = generate_synthetic_layer(d_out, d_in, job.batch, job.seed, outlier_cols, outlier_scale);
            GramCache cache = gram_precompute(layer.X, layer.W, kGramBatchCols);
            const ObjectiveContext ctx(layer.W, std::move(cache));
            const double dense = ctx.dense_loss();
            auto rel = [&](double v) { return dense > 0.0 ? v / dense : 0.0; };

            auto base_row = [&] {
                CsvTable::Row r;
                r.add(std::to_string(job.seed)).add(d_out).add(d_in).add(job.batch);
                return r;
            };
            auto baseline = [&](const std::string& method, double value) {
                CsvTable::Row r = base_row();
                r.blank().blank().add(spec.format()).add(method).add(value).add(rel(value)).blank();
                if (timing) r.blank();
                rows[j].push_back(std::move(r));
            };
            baseline("wanda", loss(ctx, saliency_mask(wanda_scores(ctx.W(), ctx.G()), pattern)));
            baseline("ria", loss(ctx, saliency_mask(ria_scores(ctx.W(), ctx.G()), pattern)));
            baseline("magnitude", loss(ctx, saliency_mask(magnitude_scores(ctx.W()), pattern)));
            baseline("sparsegpt", sparsegpt_loss(ctx.W(), ctx.G(), pattern));

            const SaliencyMatrix saliency = warmstart_saliency(ctx, warmstart.kind);
            for (std::size_t T : iter_list) {
                for (double a : alphas) {
                    SolverConfig cfg;
                    cfg.iterations = T;
                    cfg.alpha = a;
                    cfg.pattern = pattern;
                    cfg.warmstart = warmstart;
                    cfg.trace_every = 0;
                    const auto result = fw_solve_fixed(ctx, cfg, saliency.scores());
                    const double value = loss(ctx, result.mask);
                    CsvTable::Row r = base_row();
                    r.add(T).add(a).add(spec.format()).add("sparsefw").add(value).add(rel(value)).add(
                        loss(ctx, result.iterate));
                    if (timing) {
                        std::vector<double> per_iter;
                        for (std::size_t rep = 0; rep < reps; ++rep) {
                            const auto t0 = std::chrono::steady_clock::now();
                            (void)fw_solve_fixed(ctx, cfg, saliency.scores());
                            const std::chrono::duration<double, std::nano> dt =
                                std::chrono::steady_clock::now() - t0;
                            per_iter.push_back(dt.count() / static_cast<double>(std::max<std::size_t>(T, 1)));
                        }
                        std::sort(per_iter.begin(), per_iter.end());
                        r.add(per_iter[per_iter.size() / 2]);
                    }
                    rows[j].push_back(std::move(r));
                }
            }
        });

        std::vector<std::string> columns{"seed",    "d_out",  "d_in",          "batch",
                                         "iters",   "alpha",  "pattern",       "method",
                                         "loss",    "relative_loss", "continuous_loss"};
        if (timing) columns.push_back("iter_time_ns");
        CsvTable table(columns);
        for (auto& group : rows)
            for (auto& r : group) table.push(std::move(r));
        ensure_dir(dir);
        table.write_file((fs::path(dir) / "bench.csv").string());
        out << "wrote " << table.row_count() << " rows to " << (fs::path(dir) / "bench.csv").string() << '\n';
        return int{kOk};
    });
}

int cmd_oracle(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Check the top-k rounding bound against exhaustive enumeration", "oracle"};
    std::size_t instances = 30, d_in = 10, k = 5, iters = 2000, batch = 16;
    std::uint64_t seed = 1;
    std::string dir;
    unsigned threads = 1;
    app.add_option("--instances", instances, "Number of random row instances");
    app.add_option("--din", d_in, "Row length")->check(CLI::PositiveNumber);
    app.add_option("--k", k, "Kept weights per row");
    app.add_option("--iters", iters, "Frank-Wolfe iterations T");
    app.add_option("--batch", batch, "Calibration columns B")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed of instance 0 (instance i uses seed + i)");
    app.add_option("--out", dir, "Output directory (oracle.csv)")->required();
    add_threads_option(app, threads);

    return guarded(app, args, out, err, [&] {
        if (d_in > kEnumerationLimit) {
            throw CapacityError(fmt::format("--din {} exceeds the enumeration limit of {}", d_in,
                                            kEnumerationLimit));
        }
        if (k > d_in) throw BudgetError(fmt::format("--k {} exceeds --din {}", k, d_in));

        std::vector<BoundReport> reports(instances);
        parallel_for(instances, threads, [&](std::size_t i) {
            const auto layer = generate_synthetic_layer(1, d_in, batch, seed + i, 0, 1.0);
            const DenseMatrix G = gram_matrix(layer.X, kGramBatchCols);
            reports[i] = verify_lemma_bound(layer.W.row(0), G, k, iters);
        });

        CsvTable table({"instance", "seed", "d_in", "k", "r", "iters", "epsilon", "lambda_max", "tau",
                        "bound_value", "f_hat", "f_int", "rounding_gap", "raw_mass", "mass_adjusted",
                        "reference_gap", "satisfied"});
        std::size_t violations = 0;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& rep = reports[i];
            if (!rep.satisfied) ++violations;
            CsvTable::Row r;
            r.add(i)
                .add(std::to_string(seed + i))
                .add(d_in)
                .add(rep.k)
                .add(rep.r)
                .add(iters)
                .add(rep.epsilon)
                .add(rep.lambda_max)
                .add(rep.tau)
                .add(rep.bound_value)
                .add(rep.f_hat)
                .add(rep.f_int)
                .add(rep.f_hat - rep.f_int)
                .add(rep.raw_mass)
                .add(rep.mass_adjusted)
                .add(rep.reference_gap)
                .add(rep.satisfied);
            table.push(std::move(r));
        }
        ensure_dir(dir);
        table.write_file((fs::path(dir) / "oracle.csv").string());
        out << fmt::format("{} of {} instances satisfy the rounding bound\n", instances - violations, instances);
        if (violations > 0) {
            throw BoundViolation(fmt::format("{} instance(s) violate the rounding bound", violations));
        }
        return int{kOk};
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    static constexpr const char* kUsageText =
        "usage: maskopt <gen|prune|bench|oracle> [options]   (use <command> --help)\n";
    if (args.empty()) {
        err << kUsageText;
        return kUsage;
    }
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    const std::string& cmd = args.front();
    if (cmd == "gen") return cmd_gen(rest, out, err);
    if (cmd == "prune") return cmd_prune(rest, out, err);
    if (cmd == "bench") return cmd_bench(rest, out, err);
    if (cmd == "oracle") return cmd_oracle(rest, out, err);
    if (cmd == "--help" || cmd == "-h") {
        out << kUsageText;
        return kOk;
    }
    err << "unknown command '" << cmd << "'\n" << kUsageText;
    return kUsage;
}

} // namespace maskopt::cli
