#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rashodet/detect.hpp"
#include "rashodet/rng.hpp"

using namespace rashodet;

namespace {

// Bundle of constant profiles: model i sits at point coordinates[i] and the
// per-variable l2 disparity is the coordinate gap, so the average disparity
// is a scaled taxicab distance between points.
ProfileBundle point_bundle(const std::vector<std::string>& ids,
                           const std::vector<std::vector<double>>& coordinates) {
    ProfileBundle bundle;
    bundle.model_ids = ids;
    const std::size_t p = coordinates.front().size();
    for (std::size_t j = 0; j < p; ++j) {
        BundleVariable var;
        var.name = "v" + std::to_string(j + 1);
        var.kind = VarKind::numeric;
        var.grid.variable = var.name;
        var.grid.points = {0.0, 1.0};
        for (const std::vector<double>& point : coordinates) {
            var.values.push_back({point[j], point[j]});
        }
        bundle.variables.push_back(std::move(var));
    }
    return bundle;
}

std::vector<ModelScore> scored(const std::vector<std::string>& ids,
                               const std::vector<double>& metrics) {
    std::vector<ModelScore> scores;
    for (std::size_t i = 0; i < ids.size(); ++i) scores.push_back({ids[i], metrics[i]});
    return scores;
}

// From-scratch replay of the selection loop against the published matrix,
// used to cross-check the selected ids and their recorded scores.
void replay_selection(const DetectResult& result, DetectVariant variant) {
    std::vector<std::string> remaining = result.rashomon_ids;
    std::sort(remaining.begin(), remaining.end());
    remaining.erase(std::find(remaining.begin(), remaining.end(), result.reference_id));
    std::vector<std::string> selected{result.reference_id};
    std::vector<double> scores;
    while (static_cast<int>(selected.size()) < result.k_effective) {
        std::size_t best = 0;
        double best_score = -1.0;
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            const auto ci = static_cast<std::size_t>(result.matrix.index_of(remaining[c]));
            double score = 0.0;
            if (variant == DetectVariant::greedy) {
                score = result.matrix.at(
                    ci, static_cast<std::size_t>(result.matrix.index_of(selected.back())));
            } else {
                for (const std::string& id : selected) {
                    score += result.matrix.at(
                        ci, static_cast<std::size_t>(result.matrix.index_of(id)));
                }
                score /= static_cast<double>(selected.size());
            }
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        selected.push_back(remaining[best]);
        scores.push_back(best_score);
        remaining.erase(remaining.begin() + static_cast<long>(best));
    }
    REQUIRE(result.selected == selected);
    REQUIRE(result.selection_scores == scores);
}

template <typename Fn>
void expect_code(Fn&& fn, ErrorCode code) {
    try {
        fn();
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(e.code() == code);
    }
}

} // namespace

TEST_CASE("reference selection takes the metric argmax with id tie-break") {
    RashomonConfig config;
    const auto two = scored({"a", "b"}, {0.81, 0.79});
    CHECK(reference_model(two, config) == "a");

    const auto tied = scored({"b", "a"}, {0.8, 0.8});
    CHECK(reference_model(tied, config) == "a");

    config.reference_id = "clinic_lr";
    const auto with_named = scored({"a", "clinic_lr"}, {0.9, 0.7});
    CHECK(reference_model(with_named, config) == "clinic_lr");

    config.reference_id = "ghost";
    expect_code([&] { reference_model(with_named, config); }, ErrorCode::unknown_explicit_id);

    config.reference_id.clear();
    expect_code([&] { reference_model(std::vector<ModelScore>{}, config); },
                ErrorCode::bad_argument);
}

TEST_CASE("rashomon membership is a metric threshold around the reference") {
    const auto scores = scored({"a", "b", "c"}, {0.81, 0.79, 0.76});
    CHECK(build_rashomon_set(scores, "a", 0.04) == std::vector<std::string>{"a", "b"});
    CHECK(build_rashomon_set(scores, "a", 0.0) == std::vector<std::string>{"a"});
    CHECK(build_rashomon_set(scores, "a", 0.05) == std::vector<std::string>{"a", "b", "c"});

    const auto boundary = scored({"a", "b"}, {0.9, 0.86});
    CHECK(build_rashomon_set(boundary, "a", 0.04) == std::vector<std::string>{"a", "b"});

    const auto tied = scored({"b", "a", "c"}, {0.8, 0.8, 0.7});
    CHECK(build_rashomon_set(tied, "b", 0.0) == std::vector<std::string>{"a", "b"});

    expect_code([&] { build_rashomon_set(scores, "a", -0.01); }, ErrorCode::bad_argument);
    expect_code([&] { build_rashomon_set(scores, "ghost", 0.04); },
                ErrorCode::unknown_explicit_id);
}

TEST_CASE("rashomon membership around a mid-pack reference ignores better models") {
    const std::vector<double> metrics = {0.84, 0.835, 0.825, 0.81, 0.80, 0.795,
                                         0.79, 0.785, 0.78,  0.76, 0.75, 0.74};
    std::vector<ModelScore> population;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        population.push_back({"m" + std::to_string(10 + i), metrics[i]});
    }
    // m13 sits at 0.81; nine models score clearly above 0.77.
    const auto members = build_rashomon_set(population, "m13", 0.04);
    CHECK(members.size() == 9);
    CHECK(members.front() == "m10");
    CHECK(members.back() == "m18");
}

TEST_CASE("enlarging epsilon never shrinks the rashomon set") {
    Rng rng(41);
    std::vector<ModelScore> scores;
    for (int i = 0; i < 20; ++i) {
        scores.push_back({"m" + std::to_string(100 + i), 0.6 + 0.4 * rng.uniform()});
    }
    RashomonConfig config;
    const std::string ref = reference_model(scores, config);
    std::size_t previous = 0;
    for (double epsilon : {0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
        const auto members = build_rashomon_set(scores, ref, epsilon);
        REQUIRE(members.size() >= previous);
        previous = members.size();
    }
}

TEST_CASE("default selection size is the rounded square root, at least two") {
    CHECK(default_k(9) == 3);
    CHECK(default_k(2) == 2);
    CHECK(default_k(100) == 10);
    CHECK(default_k(1) == 2);
    CHECK(default_k(3) == 2);
    CHECK(default_k(7) == 3);
}

TEST_CASE("a single argmax step picks the most distant model") {
    const auto ids = std::vector<std::string>{"ref", "a", "b"};
    const auto bundle = point_bundle(ids, {{0.0}, {0.3}, {0.5}});
    const auto scores = scored(ids, {0.9, 0.89, 0.88});

    RashomonConfig config;
    config.epsilon = 0.04;
    config.k = 2;
    config.measure.kind = MeasureKind::l2_profiles;
    DetectResult result = rashomon_detect(scores, bundle, config);

    REQUIRE(result.reference_id == "ref");
    REQUIRE(result.selected == std::vector<std::string>{"ref", "b"});
    REQUIRE(result.selection_scores.size() == 1);
    CHECK(result.selection_scores[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(result.k_requested == 2);
    CHECK(result.k_effective == 2);

    config.k = 3;
    DetectResult extended = rashomon_detect(scores, bundle, config);
    REQUIRE(extended.selected == std::vector<std::string>{"ref", "b", "a"});
    CHECK(extended.selection_scores[1] == Catch::Approx(0.25).margin(1e-12));

    config.variant = DetectVariant::greedy;
    DetectResult greedy = rashomon_detect(scores, bundle, config);
    REQUIRE(greedy.selected == std::vector<std::string>{"ref", "b", "a"});
    CHECK(greedy.selection_scores[1] == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("asking for more models than the set holds returns the whole set") {
    const auto ids = std::vector<std::string>{"ref", "a", "b"};
    const auto bundle = point_bundle(ids, {{0.0}, {0.3}, {0.5}});
    const auto scores = scored(ids, {0.9, 0.89, 0.88});

    RashomonConfig config;
    config.k = 5;
    config.measure.kind = MeasureKind::l2_profiles;
    DetectResult result = rashomon_detect(scores, bundle, config);
    CHECK(result.k_requested == 5);
    CHECK(result.k_effective == 3);
    REQUIRE(result.selected == std::vector<std::string>{"ref", "b", "a"});
    REQUIRE(result.rashomon_ids.size() == 3);
}

TEST_CASE("omitting k applies the square-root default") {
    const auto ids = std::vector<std::string>{"ref", "a", "b"};
    const auto bundle = point_bundle(ids, {{0.0}, {0.3}, {0.5}});
    const auto scores = scored(ids, {0.9, 0.89, 0.88});

    RashomonConfig config;
    config.measure.kind = MeasureKind::l2_profiles;
    DetectResult result = rashomon_detect(scores, bundle, config);
    CHECK(result.k_requested == 2);
    CHECK(result.selected.size() == 2);

    config.k = 1;
    expect_code([&] { rashomon_detect(scores, bundle, config); }, ErrorCode::bad_argument);
}

TEST_CASE("greedy and full variants can diverge after the second pick") {
    // b is farthest from the reference; a is then far from b but hugs the
    // reference, while c keeps distance from both.
    const auto ids = std::vector<std::string>{"ref", "a", "b", "c"};
    const auto bundle =
        point_bundle(ids, {{0.0, 0.0}, {-0.2, 0.0}, {1.0, 1.0}, {0.9, -0.5}});
    const auto scores = scored(ids, {0.9, 0.89, 0.88, 0.87});

    RashomonConfig config;
    config.epsilon = 0.1;
    config.k = 3;
    config.measure.kind = MeasureKind::l2_profiles;

    DetectResult full = rashomon_detect(scores, bundle, config);
    REQUIRE(full.selected == std::vector<std::string>{"ref", "b", "c"});
    CHECK(full.selection_scores[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(full.selection_scores[1] == Catch::Approx(0.75).margin(1e-12));

    config.variant = DetectVariant::greedy;
    DetectResult greedy = rashomon_detect(scores, bundle, config);
    REQUIRE(greedy.selected == std::vector<std::string>{"ref", "b", "a"});
    CHECK(greedy.selection_scores[1] == Catch::Approx(1.1).margin(1e-12));

    // With k=2 the variants see the same single comparison model.
    config.k = 2;
    DetectResult greedy2 = rashomon_detect(scores, bundle, config);
    config.variant = DetectVariant::full;
    DetectResult full2 = rashomon_detect(scores, bundle, config);
    CHECK(greedy2.selected == full2.selected);
    CHECK(greedy2.selection_scores == full2.selection_scores);
}

TEST_CASE("selection recovers one representative per profile cluster") {
    const auto ids = std::vector<std::string>{"c1a", "c1b", "c2a", "c2b", "c3a", "c3b"};
    const std::vector<std::vector<double>> points = {{0.0, 0.0},  {0.01, 0.0}, {3.0, 0.0},
                                                     {3.01, 0.0}, {0.0, 4.0},  {0.0, 4.01}};
    const auto bundle = point_bundle(ids, points);
    const auto scores = scored(ids, {0.9, 0.89, 0.888, 0.886, 0.884, 0.882});

    RashomonConfig config;
    config.epsilon = 0.1;
    config.k = 3;
    config.measure.kind = MeasureKind::l2_profiles;
    DetectResult result = rashomon_detect(scores, bundle, config);

    auto cluster_of = [](const std::string& id) { return id.substr(0, 2); };
    const auto taxicab = [&](std::size_t i, std::size_t j) {
        return (std::abs(points[i][0] - points[j][0]) +
                std::abs(points[i][1] - points[j][1])) /
               2.0;
    };

    // Exhaustive scan of all 3-subsets containing the reference: every
    // subset with one member per cluster must outscore every subset that
    // doubles up, and the stepwise pick has to land in the former group.
    double worst_respecting = 1e300;
    double best_violating = -1e300;
    for (std::size_t i = 1; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            const double total = taxicab(0, i) + taxicab(0, j) + taxicab(i, j);
            std::set<std::string> clusters{cluster_of(ids[0]), cluster_of(ids[i]),
                                           cluster_of(ids[j])};
            if (clusters.size() == 3) {
                worst_respecting = std::min(worst_respecting, total);
            } else {
                best_violating = std::max(best_violating, total);
            }
        }
    }
    REQUIRE(worst_respecting > best_violating);

    std::set<std::string> selected_clusters;
    for (const std::string& id : result.selected) selected_clusters.insert(cluster_of(id));
    REQUIRE(result.selected[0] == "c1a");
    REQUIRE(selected_clusters.size() == 3);

    config.variant = DetectVariant::greedy;
    DetectResult greedy = rashomon_detect(scores, bundle, config);
    std::set<std::string> greedy_clusters;
    for (const std::string& id : greedy.selected) greedy_clusters.insert(cluster_of(id));
    REQUIRE(greedy_clusters.size() == 3);
}

TEST_CASE("identical models select in id order with zero scores") {
    const auto ids = std::vector<std::string>{"b", "a", "c", "d"};
    const auto bundle = point_bundle(ids, {{0.7}, {0.7}, {0.7}, {0.7}});
    const auto scores = scored(ids, {0.9, 0.88, 0.88, 0.88});

    RashomonConfig config;
    config.epsilon = 0.1;
    config.k = 4;
    config.measure.kind = MeasureKind::l2_profiles;
    DetectResult result = rashomon_detect(scores, bundle, config);

    REQUIRE(result.selected == std::vector<std::string>{"b", "a", "c", "d"});
    REQUIRE(result.selection_scores == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("detection is invariant to input ordering") {
    const auto ids = std::vector<std::string>{"ref", "a", "b", "c"};
    const std::vector<std::vector<double>> points = {
        {0.0, 0.0}, {-0.2, 0.0}, {1.0, 1.0}, {0.9, -0.5}};
    const auto scores = scored(ids, {0.9, 0.89, 0.88, 0.87});

    RashomonConfig config;
    config.epsilon = 0.1;
    config.k = 3;
    config.measure.kind = MeasureKind::l2_profiles;
    DetectResult base = rashomon_detect(scores, point_bundle(ids, points), config);

    const std::vector<std::size_t> order = {2, 0, 3, 1};
    std::vector<std::string> shuffled_ids;
    std::vector<std::vector<double>> shuffled_points;
    std::vector<ModelScore> shuffled_scores;
    for (std::size_t i : order) {
        shuffled_ids.push_back(ids[i]);
        shuffled_points.push_back(points[i]);
        shuffled_scores.push_back(scores[i]);
    }
    DetectResult shuffled =
        rashomon_detect(shuffled_scores, point_bundle(shuffled_ids, shuffled_points), config);

    CHECK(shuffled.reference_id == base.reference_id);
    CHECK(shuffled.rashomon_ids == base.rashomon_ids);
    CHECK(shuffled.selected == base.selected);
    CHECK(shuffled.selection_scores == base.selection_scores);
    CHECK(shuffled.matrix.ids == base.matrix.ids);
    CHECK(shuffled.matrix.values == base.matrix.values);
}

TEST_CASE("selection traces match a from-scratch replay on noisy profiles") {
    Rng rng(97);
    const std::size_t m = 21;
    Grid grid;
    grid.variable = "z";
    grid.points.resize(m);
    for (std::size_t i = 0; i < m; ++i) grid.points[i] = static_cast<double>(i) / (m - 1);

    ProfileBundle bundle;
    std::vector<ModelScore> scores;
    BundleVariable var1, var2, var3;
    for (BundleVariable* var : {&var1, &var2, &var3}) {
        var->kind = VarKind::numeric;
        var->grid = grid;
    }
    var1.name = "z1";
    var2.name = "z2";
    var3.name = "z3";
    for (int i = 0; i < 8; ++i) {
        bundle.model_ids.push_back("m" + std::to_string(i + 1));
        scores.push_back({bundle.model_ids.back(), 0.9 - 0.001 * i});
        for (BundleVariable* var : {&var1, &var2, &var3}) {
            std::vector<double> walk(m);
            walk[0] = rng.uniform(-1.0, 1.0);
            for (std::size_t j = 1; j < m; ++j) {
                walk[j] = walk[j - 1] + rng.uniform(-0.3, 0.3);
            }
            var->values.push_back(std::move(walk));
        }
    }
    bundle.variables = {var1, var2, var3};

    for (MeasureKind kind :
         {MeasureKind::pdi, MeasureKind::l2_profiles, MeasureKind::l2_derivatives}) {
        for (DetectVariant variant : {DetectVariant::full, DetectVariant::greedy}) {
            RashomonConfig config;
            config.epsilon = 0.1;
            config.k = 5;
            config.measure.kind = kind;
            config.variant = variant;
            DetectResult result = rashomon_detect(scores, bundle, config);
            REQUIRE(result.selected.size() == 5);
            replay_selection(result, variant);
        }
    }
}

TEST_CASE("bundles missing a rashomon member are rejected") {
    const auto ids = std::vector<std::string>{"ref", "a"};
    auto bundle = point_bundle(ids, {{0.0}, {0.5}});
    const auto scores = scored({"ref", "a", "b"}, {0.9, 0.89, 0.88});

    RashomonConfig config;
    config.epsilon = 0.1;
    config.measure.kind = MeasureKind::l2_profiles;
    expect_code([&] { rashomon_detect(scores, bundle, config); },
                ErrorCode::bundle_incomplete);
}

TEST_CASE("metric extraction handles both sources") {
    std::vector<ModelRecord> records(2);
    records[0].model.id = "a";
    records[0].cv_auc_mean = 0.9;
    records[0].test_auc = 0.85;
    records[1].model.id = "b";
    records[1].cv_auc_mean = 0.8;

    const auto cv = model_scores(records, MetricSource::cv_mean);
    CHECK(cv[0].metric == 0.9);
    CHECK(cv[1].metric == 0.8);

    expect_code([&] { model_scores(records, MetricSource::test); }, ErrorCode::bad_argument);

    records[1].test_auc = 0.75;
    const auto test = model_scores(records, MetricSource::test);
    CHECK(test[0].metric == 0.85);
    CHECK(test[1].metric == 0.75);
}

TEST_CASE("record-level detection works end to end") {
    std::vector<ModelRecord> records(3);
    const std::vector<std::string> ids = {"ref", "a", "b"};
    const std::vector<double> metrics = {0.9, 0.89, 0.88};
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].model.id = ids[i];
        records[i].cv_auc_mean = metrics[i];
    }
    const auto bundle = point_bundle(ids, {{0.0}, {0.3}, {0.5}});

    RashomonConfig config;
    config.k = 2;
    config.measure.kind = MeasureKind::l2_profiles;
    DetectResult result = rashomon_detect(records, bundle, config);
    REQUIRE(result.selected == std::vector<std::string>{"ref", "b"});

    config.reference_id = "a";
    DetectResult named = rashomon_detect(records, bundle, config);
    CHECK(named.reference_id == "a");
    CHECK(named.selected[0] == "a");
}
