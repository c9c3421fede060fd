// Command-line front end: campaigns, presets, complexity reports and dataset tools.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lingape/lingape.hpp"

namespace {

using namespace lingape;

void print_summary(const std::vector<SummaryRow>& rows, ExperimentKind kind) {
    std::printf("%-12s %-15s %14s %12s %12s %8s %6s\n", "point", "algorithm", "mean_tau", "min_tau", "max_tau",
                "error", "incl.");
    for (const auto& r : rows) {
        std::printf("%-12s %-15s %14.1f %12.0f %12.0f %8.3f %6zu\n", point_label(kind, r.point).c_str(),
                    std::string(algorithm_name(r.algorithm)).c_str(), r.mean_tau, r.min_tau, r.max_tau,
                    r.error_rate, r.inconclusive);
    }
}

int finish(const ReproduceResult& res, ExperimentKind kind) {
    print_summary(res.summary, kind);
    for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
    std::size_t inconclusive = 0;
    for (const auto& r : res.summary) inconclusive += r.inconclusive;
    if (inconclusive) std::fprintf(stderr, "note: %zu run(s) exhausted the pull budget\n", inconclusive);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LinGapE best-arm identification for linear bandits"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::size_t workers = 0;
    app.add_option("--workers", workers, "Worker threads (default: LINGAPE_WORKERS or all cores)");

    // run
    auto* run = app.add_subcommand("run", "Run a campaign described by a config file");
    std::string config_path, out_dir = "results";
    run->add_option("config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "Run a preset reproducing a figure or table");
    std::string figure, scale = "ci";
    rep->add_option("figure", figure, "fig1, fig2, fig3 or table1")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "table1"}));
    rep->add_option("--scale", scale, "ci (small, default) or full (published experiment sizes)")
        ->check(CLI::IsMember({"ci", "full"}));
    rep->add_option("--out", out_dir, "Output directory");

    // complexity
    auto* cx = app.add_subcommand("complexity", "Problem complexities and stopping-time bound of an instance");
    std::string instance_path;
    double epsilon = 0.0, delta = 0.05, lambda = 1.0;
    cx->add_option("instance", instance_path, "Instance file")->required()->check(CLI::ExistingFile);
    cx->add_option("--epsilon", epsilon, "Tolerance epsilon")->check(CLI::NonNegativeNumber);
    cx->add_option("--delta", delta, "Confidence delta")->check(CLI::Range(0.0, 1.0));
    cx->add_option("--lambda", lambda, "Regularizer lambda")->check(CLI::PositiveNumber);

    // surrogate-data
    auto* sg = app.add_subcommand("surrogate-data", "Write a synthetic click-log table (features, +-1 outcome)");
    std::size_t rows = 10'000, dim = 36;
    std::uint64_t seed = 1;
    std::string table_out;
    sg->add_option("--rows", rows, "Number of rows")->check(CLI::PositiveNumber);
    sg->add_option("--dim", dim, "Feature dimension")->check(CLI::PositiveNumber);
    sg->add_option("--seed", seed, "Generator seed");
    sg->add_option("--out", table_out, "Output path")->required();

    // ingest
    auto* ing = app.add_subcommand("ingest", "Build a K-armed sign-flip instance from a feature/outcome table");
    std::string table_path, instance_out;
    std::size_t k = 10;
    double lambda_fit = 0.01, min_gap = 0.05;
    ing->add_option("table", table_path, "Table path (header row, features then outcome)")
        ->required()
        ->check(CLI::ExistingFile);
    ing->add_option("--k", k, "Number of arms")->required()->check(CLI::Range(2, 1'000'000));
    ing->add_option("--lambda-fit", lambda_fit, "Ridge regularizer of the fit")->check(CLI::PositiveNumber);
    ing->add_option("--min-gap", min_gap, "Minimum gap to the best arm")->check(CLI::NonNegativeNumber);
    ing->add_option("--seed", seed, "Arm sampling seed");
    ing->add_option("--out", instance_out, "Write the instance file here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const ExperimentConfig c = read_config_file(config_path);
            return finish(run_campaign(c, out_dir, false, workers), c.experiment);
        }
        if (*rep) {
            const Scale s = scale == "full" ? Scale::Full : Scale::Ci;
            return finish(reproduce(figure, s, out_dir, workers), preset(figure, s).experiment);
        }
        if (*cx) {
            const Instance inst = read_instance_file(instance_path);
            const ComplexityReport r = complexity_report(inst, epsilon, lambda, delta);
            std::printf("arms K            %zu\n", inst.num_arms());
            std::printf("dimension d       %zu\n", inst.dim());
            std::printf("best arm          %zu\n", r.gaps.best_arm + 1);
            std::printf("gaps              ");
            for (Eigen::Index i = 0; i < r.gaps.values.size(); ++i) std::printf("%s%.6g", i ? " " : "", r.gaps.values(i));
            std::printf("\nH_eps (eps=%g)    %.10g\n", epsilon, r.h_epsilon);
            std::printf("H_0               %.10g\n", r.h_zero);
            std::printf("H_oracle          %.10g\n", r.h_oracle);
            std::printf("H'_oracle         %.10g\n", r.h_oracle_prime);
            std::printf("H_0 <= 72 H'      %s\n", r.theorem3_ok ? "yes" : "no");
            std::printf("tau bound         %.6g (%s, lambda=%g, delta=%g)\n", r.bound.bound,
                        std::string(regime_name(r.bound.regime)).c_str(), lambda, delta);
            return 0;
        }
        if (*sg) {
            const SurrogateTable s = generate_surrogate_table(rows, dim, seed);
            std::ofstream f(table_out);
            if (!f) throw InvalidInput("cannot write '" + table_out + "'");
            write_table(f, s.table);
            std::printf("wrote %zu rows x %zu features to %s\n", rows, dim, table_out.c_str());
            return 0;
        }
        if (*ing) {
            const FeatureOutcomeTable t = read_table_file(table_path);
            Rng rng(seed);
            const RealInstance ri = build_real_instance(t, k, lambda_fit, min_gap, rng);
            const Gaps g = instance_gaps(ri.instance);
            std::printf("rows %zu, dimension %zu, ||theta*|| %.6g, S %.6g, draws %zu\n", t.rows(), ri.instance.dim(),
                        ri.fitted_theta.norm(), ri.instance.S(), ri.attempts);
            std::printf("arm  table-row  mean        gap\n");
            for (std::size_t a = 0; a < ri.instance.num_arms(); ++a) {
                std::printf("%3zu  %9zu  %+.6f  %.6f%s\n", a + 1, ri.rows[a] + 1, ri.instance.mean(a),
                            g.values(static_cast<Eigen::Index>(a)), a == g.best_arm ? "  (best)" : "");
            }
            if (!instance_out.empty()) {
                std::ofstream f(instance_out);
                if (!f) throw InvalidInput("cannot write '" + instance_out + "'");
                write_instance(f, ri.instance);
                std::printf("wrote %s\n", instance_out.c_str());
            }
            return 0;
        }
    } catch (const BatchError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
