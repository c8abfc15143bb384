#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "rashodet/csv.hpp"
#include "rashodet/dataset.hpp"
#include "rashodet/numfmt.hpp"
#include "rashodet/rng.hpp"

using namespace rashodet;

namespace {

Dataset toy_dataset(std::size_t n, std::uint64_t seed) {
    Dataset data;
    data.name = "toy";
    data.target_name = "y";
    data.target_labels = {"no", "yes"};
    data.variables.push_back({"x1", VarKind::numeric, 0, 0, {}});
    data.variables.push_back({"x2", VarKind::numeric, 0, 0, {}});
    data.columns.assign(2, std::vector<double>(n));
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        data.columns[0][i] = rng.uniform(-3.0, 3.0);
        data.columns[1][i] = rng.normal();
        data.target.push_back(rng.uniform() < 0.4 ? 1 : 0);
    }
    refresh_observed_domains(data);
    return data;
}

} // namespace

TEST_CASE("seed derivation is stable and tag-sensitive") {
    REQUIRE(derive_seed(7, "folds") == derive_seed(7, "folds"));
    REQUIRE(derive_seed(7, "folds") != derive_seed(8, "folds"));
    REQUIRE(derive_seed(7, "folds") != derive_seed(7, "split"));
    REQUIRE(derive_seed(7, "cell", 0) != derive_seed(7, "cell", 1));
    REQUIRE(derive_seed(7, "scenario", 1, 2) != derive_seed(7, "scenario", 2, 1));
}

TEST_CASE("rng streams are deterministic") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) REQUIRE(std::isfinite(r.normal()));

    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
    Rng s(3);
    s.shuffle(v);
    std::set<int> seen(v.begin(), v.end());
    REQUIRE(seen.size() == 8);

    Rng t(9);
    auto picks = t.sample_without_replacement(10, 4);
    REQUIRE(picks.size() == 4);
    std::set<std::uint32_t> unique(picks.begin(), picks.end());
    REQUIRE(unique.size() == 4);
    for (auto k : picks) REQUIRE(k < 10);
}

TEST_CASE("double formatting round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 101.25, 3.141592653589793}) {
        auto parsed = parse_double(format_double(v));
        REQUIRE(parsed.has_value());
        REQUIRE(std::bit_cast<std::uint64_t>(*parsed) == std::bit_cast<std::uint64_t>(v));
    }
    REQUIRE_FALSE(parse_double("1.5x").has_value());
    REQUIRE_FALSE(parse_double("").has_value());
    REQUIRE_FALSE(parse_double(" 2").has_value());
}

TEST_CASE("subset keeps metadata and refreshes domains") {
    Dataset data = toy_dataset(50, 11);
    Dataset sub = subset(data, {0, 5, 10, 15}, "toy/sub");
    REQUIRE(sub.n() == 4);
    REQUIRE(sub.p() == 2);
    REQUIRE(sub.target_labels == data.target_labels);
    double lo = std::min({sub.cell(0, 0), sub.cell(1, 0), sub.cell(2, 0), sub.cell(3, 0)});
    double hi = std::max({sub.cell(0, 0), sub.cell(1, 0), sub.cell(2, 0), sub.cell(3, 0)});
    REQUIRE(sub.variables[0].lo == lo);
    REQUIRE(sub.variables[0].hi == hi);
}

TEST_CASE("stratified split balances classes within one row") {
    Dataset data = toy_dataset(200, 5);
    auto [train, test] = split(data, {.test_fraction = 0.25, .seed = 17});
    REQUIRE(train.n() + test.n() == data.n());

    auto all = data.class_counts();
    auto te = test.class_counts();
    for (int c = 0; c < 2; ++c) {
        double expected = all[static_cast<std::size_t>(c)] * 0.25;
        REQUIRE(std::abs(static_cast<double>(te[static_cast<std::size_t>(c)]) - expected) <= 0.5 + 1e-9);
    }

    auto [train2, test2] = split(data, {.test_fraction = 0.25, .seed = 17});
    REQUIRE(train2.target == train.target);
    REQUIRE(test2.columns == test.columns);
}

TEST_CASE("split refuses degenerate outcomes") {
    Dataset data = toy_dataset(6, 2);
    data.target = {0, 0, 0, 0, 0, 1};
    REQUIRE_THROWS_AS(split(data, {.test_fraction = 0.5, .seed = 1}), Error);
    try {
        split(data, {.test_fraction = 0.5, .seed = 1});
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::degenerate_split);
    }
    REQUIRE_THROWS_AS(split(data, {.test_fraction = 1.5, .seed = 1}), Error);
}

TEST_CASE("fold assignment is stratified and balanced") {
    Dataset data = toy_dataset(103, 23);
    auto fold = fold_assignments(data, 5, 99);
    REQUIRE(fold.size() == data.n());

    std::array<std::size_t, 5> sizes{};
    std::array<std::array<std::size_t, 5>, 2> per_class{};
    for (std::size_t i = 0; i < fold.size(); ++i) {
        REQUIRE(fold[i] >= 0);
        REQUIRE(fold[i] < 5);
        sizes[static_cast<std::size_t>(fold[i])]++;
        per_class[static_cast<std::size_t>(data.target[i])][static_cast<std::size_t>(fold[i])]++;
    }
    auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    REQUIRE(*hi - *lo <= 1);
    for (const auto& row : per_class) {
        auto [clo, chi] = std::minmax_element(row.begin(), row.end());
        REQUIRE(*chi - *clo <= 1);
    }

    Dataset tiny = toy_dataset(20, 3);
    tiny.target.assign(20, 0);
    tiny.target[0] = 1;
    REQUIRE_THROWS_AS(fold_assignments(tiny, 5, 1), Error);
}

TEST_CASE("csv loads quoted fields and infers kinds") {
    std::string text =
        "age,\"city, state\",outcome\r\n"
        "41,\"Portland, OR\",bad\r\n"
        "29,\"Salem \"\"east\"\"\",good\r\n"
        "35,Bend,good\n";
    std::istringstream in(text);
    Dataset data = load_csv(in, {.target_column = "outcome"});

    REQUIRE(data.n() == 3);
    REQUIRE(data.p() == 2);
    REQUIRE(data.variables[0].kind == VarKind::numeric);
    REQUIRE(data.variables[1].kind == VarKind::categorical);
    REQUIRE(data.variables[1].categories ==
            std::vector<std::string>{"Bend", "Portland, OR", "Salem \"east\""});
    REQUIRE(data.target_labels == std::array<std::string, 2>{"bad", "good"});
    REQUIRE(data.target == std::vector<int>{0, 1, 1});
    REQUIRE(data.cell(0, 1) == 1.0);
    REQUIRE(data.variables[0].lo == 29.0);
    REQUIRE(data.variables[0].hi == 41.0);
}

TEST_CASE("csv honors schema overrides and positive label") {
    std::string text = "code,y\n1,a\n2,b\n1,a\n";
    {
        std::istringstream in(text);
        Dataset data = load_csv(in, {.target_column = "y"});
        REQUIRE(data.variables[0].kind == VarKind::numeric);
        REQUIRE(data.target == std::vector<int>{0, 1, 0});
    }
    {
        std::istringstream in(text);
        CsvOptions opts{.target_column = "y", .positive_label = "a"};
        opts.schema = {{"code", "categorical"}};
        Dataset data = load_csv(in, opts);
        REQUIRE(data.variables[0].kind == VarKind::categorical);
        REQUIRE(data.variables[0].categories == std::vector<std::string>{"1", "2"});
        REQUIRE(data.target == std::vector<int>{1, 0, 1});
        REQUIRE(data.target_labels == std::array<std::string, 2>{"b", "a"});
    }
}

TEST_CASE("csv rejects malformed input") {
    auto expect_code = [](const std::string& text, const CsvOptions& opts, ErrorCode want) {
        std::istringstream in(text);
        try {
            load_csv(in, opts);
            FAIL("expected an error");
        } catch (const Error& e) {
            REQUIRE(e.code() == want);
        }
    };
    expect_code("a,b\n1,x\n", {.target_column = "y"}, ErrorCode::missing_target);
    expect_code("a,y\n1,x\n2,y\n3,z\n", {.target_column = "y"}, ErrorCode::non_binary_target);
    expect_code("a,y\n1,x\n2\n", {.target_column = "y"}, ErrorCode::ragged_row);
    expect_code("a,y\n1,x\n,x\n", {.target_column = "y"}, ErrorCode::missing_value);
    expect_code("a,y\nNA,x\n2,y\n", {.target_column = "y"}, ErrorCode::missing_value);
    CsvOptions bad_schema{.target_column = "y"};
    bad_schema.schema = {{"a", "numeric"}};
    expect_code("a,y\n1,x\nzz,y\n", bad_schema, ErrorCode::bad_argument);
}

TEST_CASE("csv write and reload reproduces the dataset") {
    std::string text =
        "age,city,outcome\n"
        "41.5,Portland,bad\n"
        "29.25,Salem,good\n"
        "33,Portland,good\n"
        "41.5,Bend,bad\n";
    std::istringstream in(text);
    Dataset data = load_csv(in, {.target_column = "outcome"});

    std::ostringstream out;
    write_csv(out, data);
    std::istringstream back(out.str());
    CsvOptions opts{.target_column = "outcome", .positive_label = data.target_labels[1]};
    Dataset again = load_csv(back, opts);

    REQUIRE(again.columns == data.columns);
    REQUIRE(again.target == data.target);
    REQUIRE(again.target_labels == data.target_labels);
    for (std::size_t j = 0; j < data.p(); ++j) {
        REQUIRE(again.variables[j].kind == data.variables[j].kind);
        REQUIRE(again.variables[j].categories == data.variables[j].categories);
    }
}
