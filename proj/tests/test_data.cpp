#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "splitgates/csv.hpp"
#include "splitgates/dataset.hpp"
#include "splitgates/rng.hpp"
#include "splitgates/splits.hpp"

using namespace splitgates;

namespace {

std::string temp_csv(const std::string& body) {
    static int counter = 0;
    const std::string path = "test_data_tmp_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

} // namespace

TEST_CASE("csv reader handles quoting and line endings", "[data]") {
    const auto path = temp_csv("a,b\r\n\"x,\"\"y\"\"\",2\n\"multi\nline\",3\n");
    const auto table = csv::read_file(path);
    REQUIRE(table.header == std::vector<std::string>{"a", "b"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][0] == "x,\"y\"");
    CHECK(table.rows[0][1] == "2");
    CHECK(table.rows[1][0] == "multi\nline");
    std::remove(path.c_str());
}

TEST_CASE("csv reader rejects malformed input", "[data]") {
    CHECK_THROWS_WITH(csv::read_file("no_such_file.csv"),
                      Catch::Matchers::ContainsSubstring("input not found"));
    const auto unterminated = temp_csv("a,b\n\"oops,1\n");
    CHECK_THROWS_WITH(csv::read_file(unterminated),
                      Catch::Matchers::ContainsSubstring("unterminated"));
    std::remove(unterminated.c_str());
    const auto ragged = temp_csv("a,b\n1,2\n3\n");
    CHECK_THROWS_WITH(csv::read_file(ragged), Catch::Matchers::ContainsSubstring("ragged"));
    std::remove(ragged.c_str());
    const auto empty = temp_csv("");
    CHECK_THROWS_WITH(csv::read_file(empty), Catch::Matchers::ContainsSubstring("missing header"));
    std::remove(empty.c_str());
}

TEST_CASE("load_csv parses a small experiment", "[data]") {
    const auto path = temp_csv("y,d,x\n1,1,0.5\n2,0,1.5\n3,1,-0.5\n4,0,2.5\n");
    const auto data = load_csv(path, "y", "d");
    REQUIRE(data.n() == 4);
    REQUIRE(data.p() == 1);
    CHECK(data.y(0) == 1.0);
    CHECK(data.y(3) == 4.0);
    CHECK(data.d(0) == 1);
    CHECK(data.d(1) == 0);
    CHECK(data.z(2, 0) == -0.5);
    CHECK(data.unit_ids == std::vector<std::int64_t>{0, 1, 2, 3});
    CHECK(data.n_treated() == 2);
    CHECK(data.n_control() == 2);
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects invalid treatment and arms", "[data]") {
    const auto bad_d = temp_csv("y,d,x\n1,1,0.5\n2,2,1.5\n3,0,2.5\n");
    CHECK_THROWS_WITH(load_csv(bad_d, "y", "d"),
                      Catch::Matchers::ContainsSubstring("treatment not binary"));
    std::remove(bad_d.c_str());
    const auto one_arm = temp_csv("y,d,x\n1,1,0.5\n2,1,1.5\n3,1,2.5\n");
    CHECK_THROWS_WITH(load_csv(one_arm, "y", "d"),
                      Catch::Matchers::ContainsSubstring("single-arm dataset"));
    std::remove(one_arm.c_str());
    const auto missing_col = temp_csv("y,t,x\n1,1,0.5\n2,0,1.5\n");
    CHECK_THROWS_WITH(load_csv(missing_col, "y", "d"),
                      Catch::Matchers::ContainsSubstring("missing column 'd'"));
    std::remove(missing_col.c_str());
    const auto bad_cell = temp_csv("y,d,x\n1,1,apple\n2,0,1.5\n");
    CHECK_THROWS_WITH(load_csv(bad_cell, "y", "d"),
                      Catch::Matchers::ContainsSubstring("non-numeric"));
    std::remove(bad_cell.c_str());
    const auto hole = temp_csv("y,d,x\n1,1,\n2,0,1.5\n");
    CHECK_THROWS(load_csv(hole, "y", "d"));
    std::remove(hole.c_str());
}

TEST_CASE("validate_dataset rejects non-finite values", "[data]") {
    ExperimentDataset data;
    data.y = Eigen::VectorXd::Zero(4);
    data.d = Eigen::VectorXi::Zero(4);
    data.d(0) = 1;
    data.z = Eigen::MatrixXd::Zero(4, 2);
    data.unit_ids = {0, 1, 2, 3};
    CHECK_NOTHROW(validate_dataset(data));
    data.y(2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(validate_dataset(data));
    data.y(2) = 0.0;
    data.z(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS(validate_dataset(data));
}

TEST_CASE("cross-fit plan partitions with balanced folds", "[data]") {
    const auto plan = make_split_plan(6, CrossFit{3}, 42);
    REQUIRE(plan.folds.size() == 3);
    std::set<int> seen;
    for (const auto& fold : plan.folds) {
        CHECK(fold.size() == 2);
        seen.insert(fold.begin(), fold.end());
    }
    CHECK(seen.size() == 6);
}

TEST_CASE("main/aux plan sizes follow the fraction", "[data]") {
    const auto plan = make_split_plan(100, MainAux{0.33}, 7);
    REQUIRE(plan.folds.size() == 2);
    CHECK(plan.folds[0].size() == 33);
    CHECK(plan.folds[1].size() == 67);
}

TEST_CASE("split plan preconditions", "[data]") {
    CHECK_THROWS(make_split_plan(5, CrossFit{3}, 1));  // n < 2L
    CHECK_THROWS(make_split_plan(10, CrossFit{1}, 1)); // L < 2
    CHECK_THROWS(make_split_plan(10, MainAux{0.0}, 1));
    CHECK_THROWS(make_split_plan(10, MainAux{1.0}, 1));
    CHECK_THROWS(make_split_plan(4, MainAux{0.01}, 1)); // main fold empty
}

TEST_CASE("random split plans partition and balance", "[data]") {
    auto rng = make_rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const int l = 2 + static_cast<int>(rng() % 5);
        const int n = 2 * l + static_cast<int>(rng() % 40);
        const auto plan = make_split_plan(n, CrossFit{l}, rng());
        std::set<int> seen;
        std::size_t min_size = static_cast<std::size_t>(n), max_size = 0;
        for (const auto& fold : plan.folds) {
            min_size = std::min(min_size, fold.size());
            max_size = std::max(max_size, fold.size());
            for (int idx : fold) {
                CHECK(idx >= 0);
                CHECK(idx < n);
                seen.insert(idx);
            }
        }
        REQUIRE(seen.size() == static_cast<std::size_t>(n));
        REQUIRE(max_size - min_size <= 1);
    }
}

TEST_CASE("split plans are seed-deterministic and seed-sensitive", "[data]") {
    const auto a = make_split_plan(40, CrossFit{4}, 123);
    const auto b = make_split_plan(40, CrossFit{4}, 123);
    REQUIRE(a.folds == b.folds);

    std::set<std::vector<std::vector<int>>> distinct;
    for (std::uint64_t seed = 0; seed < 1000; ++seed)
        distinct.insert(make_split_plan(40, CrossFit{4}, seed).folds);
    CHECK(distinct.size() >= 990);
}

TEST_CASE("dataset subset and arm selection", "[data]") {
    ExperimentDataset data;
    data.y = Eigen::VectorXd::LinSpaced(6, 0.0, 5.0);
    data.d = Eigen::VectorXi(6);
    data.d << 1, 0, 1, 0, 1, 0;
    data.z = Eigen::MatrixXd::Random(6, 2);
    data.unit_ids = {10, 11, 12, 13, 14, 15};

    const auto sub = data.subset({1, 3, 4});
    REQUIRE(sub.n() == 3);
    CHECK(sub.y(0) == 1.0);
    CHECK(sub.d(2) == 1);
    CHECK(sub.unit_ids == std::vector<std::int64_t>{11, 13, 14});

    CHECK(data.arm_rows(1) == std::vector<int>{0, 2, 4});
    CHECK(data.arm_rows(0) == std::vector<int>{1, 3, 5});
}
