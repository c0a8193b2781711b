// Command-line front end: analyze a CSV experiment, run the simulation
// harness, or render report plots. Exit codes: 0 ok, 2 validation/config
// error, 3 estimation failure.

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "splitgates/splitgates.hpp"

namespace fs = std::filesystem;
using namespace splitgates;

namespace {

int fail(int code, const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return code;
}

std::string join_command(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

void print_group_table(const std::vector<double>& estimate, const std::vector<double>& lower,
                       const std::vector<double>& upper, const std::vector<double>& variance,
                       double alpha) {
    std::printf("%6s %12s %26s %12s\n", "group", "estimate",
                (number_text((1.0 - alpha) * 100.0) + "% CI").c_str(), "variance");
    for (std::size_t k = 0; k < estimate.size(); ++k)
        std::printf("%6zu %12.5f [%11.5f, %11.5f] %12.5f\n", k + 1, estimate[k], lower[k],
                    upper[k], variance[k]);
}

struct AnalyzeArgs {
    std::string csv_path;
    std::string outcome = "y";
    std::string treatment = "d";
    std::string method = "ri";
    int k_groups = 5;
    int l_splits = 3;
    int n_splits = 250;
    double main_fraction = 0.33;
    double alpha = 0.05;
    bool baseline = true;
    std::string level_adjust = "halved";
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double fixed_lambda = -1.0; // <0 means cross-validated
    int cv_folds = 5;
    std::string out_path = "result.json";
};

int run_analyze(const AnalyzeArgs& args, const std::string& command) {
    RunManifest manifest;
    manifest.command = command;
    manifest.seed = args.seed;
    manifest.started_at = iso8601_utc_now();

    ExperimentDataset data;
    try {
        data = load_csv(args.csv_path, args.outcome, args.treatment);
        manifest.input_digest = fnv1a_digest(read_text_file(args.csv_path));
    } catch (const std::exception& e) {
        return fail(2, e.what());
    }

    const LambdaRule learner =
        args.fixed_lambda >= 0.0 ? LambdaRule{FixedLambda{args.fixed_lambda}}
                                 : LambdaRule{CvLambda{args.cv_folds}};

    ordered_json result_json;
    try {
        if (args.method == "ri") {
            const GatesResult result = cross_fit_gates(data, args.l_splits, args.k_groups, learner,
                                                       args.alpha, args.seed, args.threads);
            const ContrastResult contrast = heterogeneity_contrast(result);
            result_json = to_json(result);
            result_json["contrast"] = to_json(contrast);
            std::printf("GATES via cross-fitting (L=%d, K=%d, learner=%s, seed=%llu)\n",
                        result.l_splits, result.k_groups, result.learner_id.c_str(),
                        static_cast<unsigned long long>(result.seed));
            print_group_table(result.gamma_hat, result.ci_lower, result.ci_upper, result.variance,
                              result.alpha);
            std::printf("contrast (group %d - group 1): %.5f [%.5f, %.5f]\n", result.k_groups,
                        contrast.estimate, contrast.ci_lower, contrast.ci_upper);
            std::printf("cpu seconds: %.3f\n", result.cpu_seconds);
        } else {
            const SsriResult result = ssri_gates(
                data, args.n_splits, args.main_fraction, args.k_groups, learner, args.alpha,
                args.baseline, args.seed, args.threads, level_adjust_from_string(args.level_adjust));
            result_json = to_json(result);
            std::printf(
                "GATES via repeated splits (S=%d, main=%s, K=%d, baseline=%s, learner=%s, seed=%llu)\n",
                result.n_splits, number_text(result.main_fraction).c_str(), result.k_groups,
                result.baseline ? "on" : "off", result.learner_id.c_str(),
                static_cast<unsigned long long>(result.seed));
            std::vector<double> med_var(result.point_median.size());
            for (std::size_t k = 0; k < med_var.size(); ++k) {
                std::vector<double> vs;
                for (const auto& rec : result.records) vs.push_back(rec.neyman_var[k]);
                med_var[k] = median(vs);
            }
            print_group_table(result.point_median, result.ci_lower, result.ci_upper, med_var,
                              result.alpha);
            std::printf("cpu seconds: %.3f\n", result.total_wall_clock);
        }
    } catch (const std::invalid_argument& e) {
        return fail(2, e.what());
    } catch (const std::exception& e) {
        return fail(3, e.what());
    }

    try {
        manifest.config_digest = fnv1a_digest(command);
        manifest.finished_at = iso8601_utc_now();
        result_json["manifest"] = to_json(manifest);
        write_text_file(args.out_path, dump_json(result_json));
    } catch (const std::exception& e) {
        return fail(3, e.what());
    }
    std::printf("wrote %s\n", args.out_path.c_str());
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::string& command) {
    RunManifest manifest;
    manifest.command = command;
    manifest.started_at = iso8601_utc_now();

    SimulationConfig config;
    std::string config_text;
    try {
        config_text = read_text_file(config_path);
        config = simulation_config_from_json(ordered_json::parse(config_text));
    } catch (const std::exception& e) {
        return fail(2, e.what());
    }
    manifest.seed = config.seed;
    manifest.config_digest = fnv1a_digest(dump_json(to_json(config)));
    manifest.input_digest = fnv1a_digest(config_text);

    const fs::path dir(out_dir);
    const fs::path report_path = dir / "report.json";
    const fs::path csv_path = dir / "report.csv";
    const fs::path timing_path = dir / "timing.json";
    const fs::path manifest_path = dir / "manifest.json";

    try {
        fs::create_directories(dir);
        const SimulationReport report = run_monte_carlo(config);
        write_text_file(report_path.string(), dump_json(report_to_json(report)));
        write_text_file(csv_path.string(), report_to_csv(report));
        write_text_file(timing_path.string(), dump_json(timings_to_json(report)));
        manifest.finished_at = iso8601_utc_now();
        write_text_file(manifest_path.string(), dump_json(to_json(manifest)));
    } catch (const std::exception& e) {
        for (const auto& p : {report_path, csv_path, timing_path, manifest_path}) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        const bool config_error = dynamic_cast<const std::invalid_argument*>(&e) != nullptr;
        return fail(config_error ? 2 : 3, e.what());
    }
    std::printf("wrote %s, %s, %s, %s\n", report_path.c_str(), csv_path.c_str(),
                timing_path.c_str(), manifest_path.c_str());
    return 0;
}

int run_report(const std::vector<std::string>& report_paths, const std::string& out_dir,
               const std::string& command) {
    RunManifest manifest;
    manifest.command = command;
    manifest.started_at = iso8601_utc_now();

    SimulationReport merged;
    std::vector<int> sample_sizes;
    std::string digest_input;
    try {
        bool first = true;
        for (const auto& path : report_paths) {
            const std::string text = read_text_file(path);
            digest_input += text;
            const SimulationReport report = report_from_json(ordered_json::parse(text));
            if (first) {
                merged.config = report.config;
                first = false;
            } else if (report.config.k_groups != merged.config.k_groups ||
                       report.config.alpha != merged.config.alpha) {
                throw std::invalid_argument("reports disagree on k_groups or alpha");
            }
            for (const auto& cell : report.cells) {
                merged.cells.push_back(cell);
                if (std::find(sample_sizes.begin(), sample_sizes.end(), cell.n) ==
                    sample_sizes.end())
                    sample_sizes.push_back(cell.n);
            }
        }
        if (merged.cells.empty()) throw std::invalid_argument("reports contain no cells");
        std::sort(sample_sizes.begin(), sample_sizes.end());
    } catch (const std::exception& e) {
        return fail(2, e.what());
    }

    try {
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        for (int n : sample_sizes) {
            const auto series = svg::series_for_sample_size(merged.cells, n);
            const std::string body = svg::render_coverage_length_svg(
                series, merged.config.k_groups, merged.config.alpha, n);
            const fs::path svg_path = dir / ("coverage_length_n" + std::to_string(n) + ".svg");
            write_text_file(svg_path.string(), body);
            std::printf("wrote %s\n", svg_path.c_str());
        }
        write_text_file((dir / "comparison.csv").string(), report_to_csv(merged));
        manifest.seed = merged.config.seed;
        manifest.config_digest = fnv1a_digest(dump_json(to_json(merged.config)));
        manifest.input_digest = fnv1a_digest(digest_input);
        manifest.finished_at = iso8601_utc_now();
        write_text_file((dir / "manifest.json").string(), dump_json(to_json(manifest)));
        std::printf("wrote %s\n", (dir / "comparison.csv").c_str());
    } catch (const std::invalid_argument& e) {
        return fail(2, e.what());
    } catch (const std::exception& e) {
        return fail(3, e.what());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sorted-group treatment effect estimation under sample splitting"};
    app.require_subcommand(1);
    const std::string command = join_command(argc, argv);

    AnalyzeArgs a;
    auto* analyze = app.add_subcommand("analyze", "estimate GATES from an experiment CSV");
    analyze->add_option("csv", a.csv_path, "input CSV with outcome, treatment, covariates")
        ->required();
    analyze->add_option("--outcome", a.outcome, "outcome column name (default y)");
    analyze->add_option("--treatment", a.treatment, "treatment column name (default d)");
    analyze->add_option("--method", a.method, "ri (cross-fitting) or ssri (repeated splits)")
        ->check(CLI::IsMember({"ri", "ssri"}));
    analyze->add_option("--k", a.k_groups, "number of sorted groups (default 5)");
    analyze->add_option("--l", a.l_splits, "cross-fitting folds for ri (default 3)");
    analyze->add_option("--splits", a.n_splits, "repeated splits for ssri (default 250)");
    analyze->add_option("--main-fraction", a.main_fraction,
                        "ssri main-fold fraction (default 0.33)");
    analyze->add_option("--alpha", a.alpha, "1 - confidence level (default 0.05)");
    analyze->add_flag("--baseline,!--no-baseline", a.baseline,
                      "ssri baseline adjustment (default on)");
    analyze->add_option("--level-adjust", a.level_adjust,
                        "ssri conditional level rule: halved or nominal")
        ->check(CLI::IsMember({"halved", "nominal"}));
    analyze->add_option("--seed", a.seed, "rng seed (default 1)");
    analyze->add_option("--threads", a.threads, "worker threads (default 1)");
    analyze->add_option("--lambda", a.fixed_lambda, "fixed lasso penalty; omit to cross-validate");
    analyze->add_option("--cv-folds", a.cv_folds, "lasso CV folds (default 5)");
    analyze->add_option("--out", a.out_path, "result JSON path (default result.json)");

    std::string sim_config_path, sim_out_dir = ".";
    auto* simulate = app.add_subcommand(
        "simulate",
        "run the synthetic-DGP coverage study from a JSON config.\n"
        "Config keys: dgp (zero|linear|polynomial|step_change), sample_sizes [int...],\n"
        "k_groups, methods [{type:ri,l}|{type:ssri,splits,main_fraction,baseline,level_adjust}],\n"
        "n_replicates, truth_replicates, truth_population, alpha, seed,\n"
        "learner ({rule:cv,folds}|{rule:fixed,lambda}), threads");
    simulate->add_option("config", sim_config_path, "simulation config JSON")->required();
    simulate->add_option("--out-dir", sim_out_dir, "output directory (default .)");

    std::vector<std::string> report_paths;
    std::string report_out_dir = ".";
    auto* report = app.add_subcommand("report", "render coverage/length plots from report JSONs");
    report->add_option("reports", report_paths, "one or more report.json files")->required();
    report->add_option("--out-dir", report_out_dir, "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (*analyze) return run_analyze(a, command);
    if (*simulate) return run_simulate(sim_config_path, sim_out_dir, command);
    return run_report(report_paths, report_out_dir, command);
}
