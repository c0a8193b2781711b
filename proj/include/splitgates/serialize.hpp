#pragma once

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitgates/csv.hpp"
#include "splitgates/gates.hpp"
#include "splitgates/sim.hpp"
#include "splitgates/ssri.hpp"

namespace splitgates {

using ordered_json = nlohmann::ordered_json;

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("input not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Shortest round-trippable decimal, shared by JSON and CSV output so every
// document of the same result is byte-stable.
inline std::string number_text(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return ordered_json(x).dump();
}

// JSON has no +-inf, so only the interior cutoffs travel; the sentinels are
// restored on load.
inline ordered_json cutoffs_to_json(const GroupCutoffs& cuts) {
    ordered_json arr = ordered_json::array();
    for (int k = 1; k < cuts.k_groups; ++k) arr.push_back(cuts.cutoffs[static_cast<std::size_t>(k)]);
    return arr;
}

inline GroupCutoffs cutoffs_from_json(const ordered_json& arr) {
    GroupCutoffs cuts;
    cuts.k_groups = static_cast<int>(arr.size()) + 1;
    cuts.cutoffs.resize(static_cast<std::size_t>(cuts.k_groups) + 1);
    cuts.cutoffs.front() = std::numeric_limits<double>::infinity();
    cuts.cutoffs.back() = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < arr.size(); ++i) cuts.cutoffs[i + 1] = arr[i].get<double>();
    return cuts;
}

inline ordered_json to_json(const SplitGatesEstimate& est) {
    ordered_json j;
    j["split_index"] = est.split_index;
    j["gamma_hat"] = est.gamma_hat;
    j["neyman_var"] = est.neyman_var;
    j["n_treated"] = est.n_treated;
    j["n_control"] = est.n_control;
    ordered_json counts = ordered_json::array();
    for (const auto& gc : est.group_counts) counts.push_back({gc[0], gc[1]});
    j["group_counts"] = counts;
    j["cutoffs"] = cutoffs_to_json(est.cutoffs);
    return j;
}

inline ordered_json to_json(const GatesResult& result) {
    ordered_json j;
    j["method"] = "ri";
    j["k_groups"] = result.k_groups;
    j["l_splits"] = result.l_splits;
    j["alpha"] = result.alpha;
    j["learner"] = result.learner_id;
    j["seed"] = result.seed;
    j["gamma_hat"] = result.gamma_hat;
    j["variance"] = result.variance;
    j["ci_lower"] = result.ci_lower;
    j["ci_upper"] = result.ci_upper;
    j["across_split_var"] = result.across_split_var;
    j["variance_note"] = result.variance_note;
    j["cpu_seconds"] = result.cpu_seconds;
    ordered_json splits = ordered_json::array();
    for (const auto& est : result.per_split) splits.push_back(to_json(est));
    j["per_split"] = splits;
    return j;
}

inline ordered_json to_json(const ContrastResult& contrast) {
    ordered_json j;
    j["estimate"] = contrast.estimate;
    j["variance"] = contrast.variance;
    j["ci_lower"] = contrast.ci_lower;
    j["ci_upper"] = contrast.ci_upper;
    j["alpha"] = contrast.alpha;
    j["per_split_delta"] = contrast.per_split_delta;
    j["across_split_var"] = contrast.across_split_var;
    return j;
}

inline ordered_json to_json(const SsriSplitRecord& rec) {
    ordered_json j;
    j["split_index"] = rec.split_index;
    j["gamma_hat"] = rec.gamma_hat;
    j["ci_lower"] = rec.ci_lower;
    j["ci_upper"] = rec.ci_upper;
    j["neyman_var"] = rec.neyman_var;
    j["baseline_used"] = rec.baseline_used;
    j["cpu_seconds"] = rec.wall_clock;
    j["cutoffs"] = cutoffs_to_json(rec.cutoffs);
    return j;
}

inline ordered_json to_json(const SsriResult& result) {
    ordered_json j;
    j["method"] = "ssri";
    j["k_groups"] = result.k_groups;
    j["n_splits"] = result.n_splits;
    j["main_fraction"] = result.main_fraction;
    j["alpha"] = result.alpha;
    j["baseline"] = result.baseline;
    j["level_adjust"] = to_string(result.level_adjust);
    j["learner"] = result.learner_id;
    j["seed"] = result.seed;
    j["point_median"] = result.point_median;
    j["point_mean"] = result.point_mean;
    j["ci_lower"] = result.ci_lower;
    j["ci_upper"] = result.ci_upper;
    j["cpu_seconds"] = result.total_wall_clock;
    ordered_json records = ordered_json::array();
    for (const auto& rec : result.records) records.push_back(to_json(rec));
    j["records"] = records;
    return j;
}

namespace detail {

inline void reject_unknown_keys(const ordered_json& j, const std::vector<std::string>& known,
                                const std::string& where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const auto& key : known)
            if (item.key() == key) { ok = true; break; }
        if (!ok) throw std::invalid_argument("unknown " + where + " key '" + item.key() + "'");
    }
}

} // namespace detail

inline ordered_json to_json(const MethodConfig& method) {
    ordered_json j;
    if (method.kind == MethodConfig::Kind::Ri) {
        j["type"] = "ri";
        j["l"] = method.ri.l_splits;
    } else {
        j["type"] = "ssri";
        j["splits"] = method.ssri.n_splits;
        j["main_fraction"] = method.ssri.main_fraction;
        j["baseline"] = method.ssri.baseline;
        j["level_adjust"] = to_string(method.ssri.level_adjust);
    }
    return j;
}

inline MethodConfig method_config_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw std::invalid_argument("method entry needs a 'type' of 'ri' or 'ssri'");
    const auto type = j.at("type").get<std::string>();
    MethodConfig m;
    if (type == "ri") {
        detail::reject_unknown_keys(j, {"type", "l"}, "method");
        m.kind = MethodConfig::Kind::Ri;
        if (j.contains("l")) m.ri.l_splits = j.at("l").get<int>();
    } else if (type == "ssri") {
        detail::reject_unknown_keys(j, {"type", "splits", "main_fraction", "baseline", "level_adjust"},
                                    "method");
        m.kind = MethodConfig::Kind::Ssri;
        if (j.contains("splits")) m.ssri.n_splits = j.at("splits").get<int>();
        if (j.contains("main_fraction")) m.ssri.main_fraction = j.at("main_fraction").get<double>();
        if (j.contains("baseline")) m.ssri.baseline = j.at("baseline").get<bool>();
        if (j.contains("level_adjust"))
            m.ssri.level_adjust = level_adjust_from_string(j.at("level_adjust").get<std::string>());
    } else {
        throw std::invalid_argument("unknown method type '" + type + "'");
    }
    return m;
}

inline ordered_json to_json(const LambdaRule& rule) {
    ordered_json j;
    if (const auto* fixed = std::get_if<FixedLambda>(&rule)) {
        j["rule"] = "fixed";
        j["lambda"] = fixed->lambda;
    } else {
        j["rule"] = "cv";
        j["folds"] = std::get<CvLambda>(rule).k_folds;
    }
    return j;
}

inline LambdaRule lambda_rule_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("rule"))
        throw std::invalid_argument("learner needs a 'rule' of 'cv' or 'fixed'");
    const auto rule = j.at("rule").get<std::string>();
    if (rule == "cv") {
        detail::reject_unknown_keys(j, {"rule", "folds"}, "learner");
        CvLambda cv;
        if (j.contains("folds")) cv.k_folds = j.at("folds").get<int>();
        return cv;
    }
    if (rule == "fixed") {
        detail::reject_unknown_keys(j, {"rule", "lambda"}, "learner");
        if (!j.contains("lambda")) throw std::invalid_argument("fixed learner needs 'lambda'");
        return FixedLambda{j.at("lambda").get<double>()};
    }
    throw std::invalid_argument("unknown learner rule '" + rule + "'");
}

inline ordered_json to_json(const SimulationConfig& config) {
    ordered_json j;
    j["dgp"] = to_string(config.dgp);
    j["sample_sizes"] = config.sample_sizes;
    j["k_groups"] = config.k_groups;
    ordered_json methods = ordered_json::array();
    for (const auto& m : config.methods) methods.push_back(to_json(m));
    j["methods"] = methods;
    j["n_replicates"] = config.n_replicates;
    j["truth_replicates"] = config.truth_replicates;
    j["truth_population"] = config.truth_population;
    j["alpha"] = config.alpha;
    j["seed"] = config.seed;
    j["learner"] = to_json(config.learner);
    j["threads"] = config.threads;
    return j;
}

inline SimulationConfig simulation_config_from_json(const ordered_json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    detail::reject_unknown_keys(j,
                                {"dgp", "sample_sizes", "k_groups", "methods", "n_replicates",
                                 "truth_replicates", "truth_population", "alpha", "seed", "learner",
                                 "threads"},
                                "config");
    SimulationConfig config;
    if (j.contains("dgp")) config.dgp = dgp_kind_from_string(j.at("dgp").get<std::string>());
    if (j.contains("sample_sizes")) config.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
    if (j.contains("k_groups")) config.k_groups = j.at("k_groups").get<int>();
    if (j.contains("methods")) {
        config.methods.clear();
        if (!j.at("methods").is_array()) throw std::invalid_argument("'methods' must be an array");
        for (const auto& m : j.at("methods")) config.methods.push_back(method_config_from_json(m));
    }
    if (j.contains("n_replicates")) config.n_replicates = j.at("n_replicates").get<int>();
    if (j.contains("truth_replicates")) config.truth_replicates = j.at("truth_replicates").get<int>();
    if (j.contains("truth_population"))
        config.truth_population = j.at("truth_population").get<int>();
    if (j.contains("alpha")) config.alpha = j.at("alpha").get<double>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("learner")) config.learner = lambda_rule_from_json(j.at("learner"));
    if (j.contains("threads")) config.threads = j.at("threads").get<unsigned>();
    return config;
}

inline ordered_json to_json(const CellStats& cell) {
    ordered_json j;
    j["method"] = cell.method_id;
    j["n"] = cell.n;
    j["group"] = cell.group;
    j["coverage"] = cell.coverage;
    j["avg_ci_length"] = cell.avg_ci_length;
    j["bias"] = cell.bias;
    j["truth"] = cell.truth;
    j["n_ok"] = cell.n_ok;
    j["n_failed"] = cell.n_failed;
    return j;
}

inline CellStats cell_stats_from_json(const ordered_json& j) {
    CellStats cell;
    cell.method_id = j.at("method").get<std::string>();
    cell.n = j.at("n").get<int>();
    cell.group = j.at("group").get<int>();
    cell.coverage = j.at("coverage").get<double>();
    cell.avg_ci_length = j.at("avg_ci_length").get<double>();
    cell.bias = j.at("bias").get<double>();
    cell.truth = j.at("truth").get<double>();
    cell.n_ok = j.at("n_ok").get<int>();
    cell.n_failed = j.at("n_failed").get<int>();
    return cell;
}

// The report document carries only seed-determined content; measured timings
// live in a sibling document so identical configs yield identical bytes here.
inline ordered_json report_to_json(const SimulationReport& report) {
    ordered_json j;
    j["config"] = to_json(report.config);
    ordered_json cells = ordered_json::array();
    for (const auto& cell : report.cells) cells.push_back(to_json(cell));
    j["cells"] = cells;
    return j;
}

inline ordered_json timings_to_json(const SimulationReport& report) {
    ordered_json arr = ordered_json::array();
    for (const auto& t : report.timings) {
        ordered_json j;
        j["method"] = t.method_id;
        j["n"] = t.n;
        j["mean_cpu_seconds"] = t.mean_cpu_seconds;
        arr.push_back(j);
    }
    ordered_json j;
    j["timings"] = arr;
    return j;
}

inline SimulationReport report_from_json(const ordered_json& j) {
    SimulationReport report;
    report.config = simulation_config_from_json(j.at("config"));
    if (!j.at("cells").is_array()) throw std::invalid_argument("'cells' must be an array");
    for (const auto& cell : j.at("cells")) report.cells.push_back(cell_stats_from_json(cell));
    return report;
}

inline void timings_from_json(const ordered_json& j, SimulationReport& report) {
    for (const auto& t : j.at("timings")) {
        MethodTiming timing;
        timing.method_id = t.at("method").get<std::string>();
        timing.n = t.at("n").get<int>();
        timing.mean_cpu_seconds = t.at("mean_cpu_seconds").get<double>();
        report.timings.push_back(timing);
    }
}

// RFC 4180: CRLF line endings, header row, one row per method x n x group.
inline std::string report_to_csv(const SimulationReport& report) {
    std::string out = "method,n,group,coverage,avg_ci_length,bias,truth,n_ok,n_failed\r\n";
    for (const auto& cell : report.cells) {
        out += csv::quote_field(cell.method_id);
        out += ',' + std::to_string(cell.n);
        out += ',' + std::to_string(cell.group);
        out += ',' + number_text(cell.coverage);
        out += ',' + number_text(cell.avg_ci_length);
        out += ',' + number_text(cell.bias);
        out += ',' + number_text(cell.truth);
        out += ',' + std::to_string(cell.n_ok);
        out += ',' + std::to_string(cell.n_failed);
        out += "\r\n";
    }
    return out;
}

inline std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

} // namespace splitgates
