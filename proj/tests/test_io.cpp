#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "splitgates/manifest.hpp"
#include "splitgates/serialize.hpp"
#include "splitgates/svg.hpp"

using namespace splitgates;

namespace {

SimulationReport tiny_report() {
    SimulationReport report;
    report.config.dgp = DgpKind::Polynomial;
    report.config.sample_sizes = {100, 500};
    report.config.k_groups = 2;
    report.config.methods = {ri_method(4), ssri_method(40, 0.25, true, LevelAdjust::Nominal)};
    report.config.n_replicates = 7;
    report.config.truth_replicates = 3;
    report.config.truth_population = 1234;
    report.config.alpha = 0.1;
    report.config.seed = 99;
    report.config.learner = FixedLambda{0.0625};
    report.config.threads = 2;
    const char* ids[] = {"ri_l4", "ssri_s40_m25_base"};
    for (int n : {100, 500}) {
        for (const char* id : ids) {
            for (int g = 1; g <= 2; ++g) {
                CellStats cell;
                cell.method_id = id;
                cell.n = n;
                cell.group = g;
                cell.coverage = 0.1 + 0.2; // deliberately non-terminating binary
                cell.avg_ci_length = 1.0 / 3.0;
                cell.bias = -0.0625 * g;
                cell.truth = 0.30000000000000004;
                cell.n_ok = 7;
                cell.n_failed = 0;
                report.cells.push_back(cell);
            }
            report.timings.push_back({id, n, 0.001953125 * n});
        }
    }
    return report;
}

} // namespace

TEST_CASE("number text is the shortest round-trippable decimal", "[io]") {
    CHECK(number_text(0.1) == "0.1");
    CHECK(number_text(1.0) == "1.0");
    CHECK(number_text(-2.5) == "-2.5");
    CHECK(number_text(0.30000000000000004) == "0.30000000000000004");
    CHECK(number_text(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(number_text(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(number_text(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("cutoff serialization restores the sentinels", "[io]") {
    GroupCutoffs cuts;
    cuts.k_groups = 4;
    cuts.cutoffs = {std::numeric_limits<double>::infinity(), 1.5, 0.25, -0.75,
                    -std::numeric_limits<double>::infinity()};
    const auto arr = cutoffs_to_json(cuts);
    REQUIRE(arr.size() == 3);
    const auto back = cutoffs_from_json(arr);
    CHECK(back.k_groups == 4);
    CHECK(back.cutoffs == cuts.cutoffs);
}

TEST_CASE("study configuration survives a JSON round trip", "[io]") {
    const auto original = tiny_report().config;
    const auto parsed = simulation_config_from_json(
        ordered_json::parse(dump_json(to_json(original))));
    CHECK(parsed.dgp == original.dgp);
    CHECK(parsed.sample_sizes == original.sample_sizes);
    CHECK(parsed.k_groups == original.k_groups);
    CHECK(parsed.n_replicates == original.n_replicates);
    CHECK(parsed.truth_replicates == original.truth_replicates);
    CHECK(parsed.truth_population == original.truth_population);
    CHECK(parsed.alpha == original.alpha);
    CHECK(parsed.seed == original.seed);
    CHECK(parsed.threads == original.threads);
    REQUIRE(parsed.methods.size() == 2);
    CHECK(parsed.methods[0].id() == "ri_l4");
    CHECK(parsed.methods[1].id() == "ssri_s40_m25_base");
    CHECK(parsed.methods[1].ssri.level_adjust == LevelAdjust::Nominal);
    CHECK(std::get<FixedLambda>(parsed.learner).lambda == 0.0625);

    SimulationConfig cv_config;
    cv_config.learner = CvLambda{7};
    const auto cv_parsed =
        simulation_config_from_json(ordered_json::parse(dump_json(to_json(cv_config))));
    CHECK(std::get<CvLambda>(cv_parsed.learner).k_folds == 7);
}

TEST_CASE("missing config keys fall back to defaults", "[io]") {
    const auto config = simulation_config_from_json(ordered_json::object());
    const SimulationConfig defaults;
    CHECK(config.dgp == defaults.dgp);
    CHECK(config.sample_sizes == defaults.sample_sizes);
    CHECK(config.k_groups == defaults.k_groups);
    CHECK(config.n_replicates == defaults.n_replicates);
    CHECK(config.alpha == defaults.alpha);
    CHECK(config.seed == defaults.seed);
    CHECK(std::get<CvLambda>(config.learner).k_folds == 5);
}

TEST_CASE("unknown keys are rejected with their location", "[io]") {
    CHECK_THROWS_WITH(simulation_config_from_json(ordered_json::parse(R"({"bogus": 1})")),
                      Catch::Matchers::ContainsSubstring("unknown config key 'bogus'"));
    CHECK_THROWS_WITH(
        simulation_config_from_json(ordered_json::parse(R"({"methods": [{"type": "ri", "x": 1}]})")),
        Catch::Matchers::ContainsSubstring("unknown method key 'x'"));
    CHECK_THROWS_WITH(
        simulation_config_from_json(ordered_json::parse(R"({"methods": [{"type": "huh"}]})")),
        Catch::Matchers::ContainsSubstring("unknown method type"));
    CHECK_THROWS_WITH(
        simulation_config_from_json(ordered_json::parse(R"({"learner": {"rule": "magic"}})")),
        Catch::Matchers::ContainsSubstring("unknown learner rule"));
    CHECK_THROWS_AS(
        simulation_config_from_json(ordered_json::parse(R"({"learner": {"rule": "fixed"}})")),
        std::invalid_argument);
    CHECK_THROWS_AS(simulation_config_from_json(ordered_json::parse(R"({"methods": [{}]})")),
                    std::invalid_argument);
}

TEST_CASE("report documents round trip losslessly", "[io]") {
    const auto report = tiny_report();
    const auto parsed = report_from_json(ordered_json::parse(dump_json(report_to_json(report))));
    REQUIRE(parsed.cells.size() == report.cells.size());
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        CHECK(parsed.cells[i].method_id == report.cells[i].method_id);
        CHECK(parsed.cells[i].n == report.cells[i].n);
        CHECK(parsed.cells[i].group == report.cells[i].group);
        CHECK(parsed.cells[i].coverage == report.cells[i].coverage);
        CHECK(parsed.cells[i].avg_ci_length == report.cells[i].avg_ci_length);
        CHECK(parsed.cells[i].bias == report.cells[i].bias);
        CHECK(parsed.cells[i].truth == report.cells[i].truth);
    }
    CHECK(parsed.config.seed == report.config.seed);
    CHECK(parsed.timings.empty()); // timings travel in their own document

    SimulationReport with_timings = parsed;
    timings_from_json(ordered_json::parse(dump_json(timings_to_json(report))), with_timings);
    REQUIRE(with_timings.timings.size() == report.timings.size());
    for (std::size_t i = 0; i < report.timings.size(); ++i) {
        CHECK(with_timings.timings[i].method_id == report.timings[i].method_id);
        CHECK(with_timings.timings[i].n == report.timings[i].n);
        CHECK(with_timings.timings[i].mean_cpu_seconds == report.timings[i].mean_cpu_seconds);
    }
}

TEST_CASE("report CSV uses CRLF rows and quotes awkward fields", "[io]") {
    SimulationReport report;
    CellStats cell;
    cell.method_id = "ri_l3";
    cell.n = 100;
    cell.group = 1;
    cell.coverage = 0.95;
    cell.avg_ci_length = 0.5;
    cell.bias = -0.25;
    cell.truth = 1.5;
    cell.n_ok = 10;
    cell.n_failed = 0;
    report.cells.push_back(cell);
    CHECK(report_to_csv(report) ==
          "method,n,group,coverage,avg_ci_length,bias,truth,n_ok,n_failed\r\n"
          "ri_l3,100,1,0.95,0.5,-0.25,1.5,10,0\r\n");

    CHECK(csv::quote_field("plain") == "plain");
    CHECK(csv::quote_field("a,b") == "\"a,b\"");
    CHECK(csv::quote_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("coverage figure is deterministic and structurally complete", "[io]") {
    const auto report = tiny_report();
    const auto series = svg::series_for_sample_size(report.cells, 500);
    REQUIRE(series.size() == 2);
    CHECK(series[0].method_id == "ri_l4");
    REQUIRE(series[0].coverage.size() == 2);

    const auto a = svg::render_coverage_length_svg(series, 2, 0.1, 500);
    const auto b = svg::render_coverage_length_svg(series, 2, 0.1, 500);
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    CHECK(a.find("nominal 0.9") != std::string::npos);
    CHECK(a.find("#cc2222") != std::string::npos); // cross-fit series color
    CHECK(a.find("ssri_s40_m25_base") != std::string::npos);

    CHECK_THROWS(svg::render_coverage_length_svg({}, 2, 0.1, 500));
}

TEST_CASE("digest is stable with the standard offset basis", "[io]") {
    CHECK(fnv1a_digest("") == "fnv1a64:cbf29ce484222325");
    CHECK(fnv1a_digest("a") == "fnv1a64:af63dc4c8601ec8c");
    CHECK(fnv1a_digest("abc") == fnv1a_digest("abc"));
    CHECK(fnv1a_digest("abc") != fnv1a_digest("abd"));
}

TEST_CASE("run manifest serializes its audit fields", "[io]") {
    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config_digest = fnv1a_digest("{}");
    manifest.seed = 12;
    manifest.started_at = "2024-05-01T10:00:00Z";
    manifest.finished_at = "2024-05-01T10:05:00Z";
    const auto j = to_json(manifest);
    CHECK(j.at("command") == "simulate");
    CHECK(j.at("config_digest") == manifest.config_digest);
    CHECK(j.at("seed") == 12);
    CHECK(j.contains("version"));
    CHECK(j.at("started_at") == "2024-05-01T10:00:00Z");

    const auto now = iso8601_utc_now();
    REQUIRE(now.size() == 20);
    CHECK(now[4] == '-');
    CHECK(now[10] == 'T');
    CHECK(now.back() == 'Z');
}

TEST_CASE("text files round trip and missing paths are reported", "[io]") {
    const std::string path = "test_io_tmp.txt";
    write_text_file(path, "line one\nline two\n");
    CHECK(read_text_file(path) == "line one\nline two\n");
    std::remove(path.c_str());
    CHECK_THROWS_WITH(read_text_file("no_such_file_here.json"),
                      Catch::Matchers::ContainsSubstring("input not found"));
}
