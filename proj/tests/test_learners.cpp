#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rashodet/auc.hpp"
#include "rashodet/learners.hpp"
#include "rashodet/rng.hpp"
#include "rashodet/store.hpp"

using namespace rashodet;

namespace {

Dataset one_variable_dataset(const std::vector<double>& x, const std::vector<int>& y) {
    Dataset data;
    data.name = "one";
    data.target_name = "y";
    data.target_labels = {"0", "1"};
    data.variables.push_back({"x", VarKind::numeric, 0, 0, {}});
    data.columns = {x};
    data.target = y;
    refresh_observed_domains(data);
    return data;
}

Dataset random_mixed_dataset(std::size_t n, std::uint64_t seed) {
    Dataset data;
    data.name = "mixed";
    data.target_name = "y";
    data.target_labels = {"neg", "pos"};
    data.variables.push_back({"num1", VarKind::numeric, 0, 0, {}});
    data.variables.push_back({"num2", VarKind::numeric, 0, 0, {}});
    data.variables.push_back({"grp", VarKind::categorical, 0, 0, {"a", "b", "c"}});
    data.columns.assign(3, std::vector<double>(n));
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform(-2.0, 2.0);
        const double v = rng.normal();
        const double g = static_cast<double>(rng.uniform_int(3));
        data.columns[0][i] = u;
        data.columns[1][i] = v;
        data.columns[2][i] = g;
        const double risk = sigmoid(1.2 * u - 0.8 * v + (g == 2.0 ? 1.0 : -0.4));
        data.target.push_back(rng.uniform() < risk ? 1 : 0);
    }
    if (!data.has_both_classes()) data.target[0] = 1 - data.target[0];
    refresh_observed_domains(data);
    return data;
}

// Two-parameter logistic fit by iteratively reweighted least squares, used
// as an independent check on the gradient-descent trainer.
std::pair<double, double> irls_logistic(const std::vector<double>& x,
                                        const std::vector<int>& y) {
    double b0 = 0.0, b1 = 0.0;
    const std::size_t n = x.size();
    for (int iter = 0; iter < 200; ++iter) {
        double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(b0 + b1 * x[i]);
            const double r = p - y[i];
            const double w = p * (1.0 - p);
            g0 += r;
            g1 += r * x[i];
            h00 += w;
            h01 += w * x[i];
            h11 += w * x[i] * x[i];
        }
        const double det = h00 * h11 - h01 * h01;
        const double d0 = (h11 * g0 - h01 * g1) / det;
        const double d1 = (h00 * g1 - h01 * g0) / det;
        b0 -= d0;
        b1 -= d1;
        if (std::abs(d0) < 1e-12 && std::abs(d1) < 1e-12) break;
    }
    return {b0, b1};
}

} // namespace

TEST_CASE("depth-1 tree separates a one-split problem") {
    Dataset data = one_variable_dataset({-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}, {0, 0, 0, 1, 1, 1});
    PredictiveModel model = train(ModelFamily::decision_tree,
                                  {{"max_depth", 1}, {"min_samples_leaf", 1}}, data, 1);
    REQUIRE(model.score_row(data, 0) == 0.0);
    REQUIRE(model.score_row(data, 5) == 1.0);
    REQUIRE(auc(model.score_all(data), data.target) == 1.0);

    const Tree& tree = std::get<Tree>(model.state);
    REQUIRE(tree.nodes[0].feature == 0);
    REQUIRE(tree.nodes[0].threshold == 0.0);
}

TEST_CASE("hyperparameter validation rejects bad values") {
    Dataset data = one_variable_dataset({-1, 1, -2, 2}, {0, 1, 0, 1});
    REQUIRE_THROWS_AS(train(ModelFamily::decision_tree, {{"depth", 3}}, data, 1), Error);
    REQUIRE_THROWS_AS(train(ModelFamily::decision_tree, {{"max_depth", 0}}, data, 1), Error);
    REQUIRE_THROWS_AS(
        train(ModelFamily::gradient_boosting, {{"learning_rate", 1.5}}, data, 1), Error);
    REQUIRE_THROWS_AS(
        train(ModelFamily::random_forest, {{"feature_fraction", 0.0}}, data, 1), Error);
    try {
        train(ModelFamily::decision_tree, {{"max_depth", 2.5}}, data, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::invalid_hyperparameter);
    }

    Dataset single = one_variable_dataset({1, 2, 3}, {1, 1, 1});
    try {
        train(ModelFamily::decision_tree, {}, single, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::single_class_data);
    }
}

TEST_CASE("single-tree forest without bootstrap is reproducible") {
    Dataset data = random_mixed_dataset(120, 8);
    const std::map<std::string, double> hp{
        {"n_trees", 1}, {"feature_fraction", 1.0}, {"bootstrap", 0}};
    PredictiveModel a = train(ModelFamily::random_forest, hp, data, 42);
    PredictiveModel b = train(ModelFamily::random_forest, hp, data, 42);
    REQUIRE(a.score_all(data) == b.score_all(data));

    // With every row and feature available the single member is the plain
    // CART tree at the same depth settings.
    PredictiveModel tree = train(
        ModelFamily::decision_tree,
        {{"max_depth", hp.count("max_depth") ? hp.at("max_depth") : 6.0},
         {"min_samples_leaf", 3}},
        data, 42);
    REQUIRE(a.score_all(data) == tree.score_all(data));
}

TEST_CASE("every family scores within the unit interval") {
    Dataset data = random_mixed_dataset(150, 31);
    for (ModelFamily family :
         {ModelFamily::decision_tree, ModelFamily::random_forest,
          ModelFamily::gradient_boosting, ModelFamily::logistic_regression}) {
        PredictiveModel model = train(family, {}, data, 7);
        for (double s : model.score_all(data)) {
            REQUIRE(s >= 0.0);
            REQUIRE(s <= 1.0);
        }
    }
}

TEST_CASE("vanishing learning rate collapses boosting to the base rate") {
    Dataset data = random_mixed_dataset(200, 12);
    double positives = 0;
    for (int y : data.target) positives += y;
    const double pbar = positives / static_cast<double>(data.n());

    PredictiveModel model = train(ModelFamily::gradient_boosting,
                                  {{"n_trees", 1}, {"learning_rate", 1e-6}}, data, 3);
    for (double s : model.score_all(data)) {
        REQUIRE(std::abs(s - pbar) < 1e-3);
    }
}

TEST_CASE("logistic regression recovers a known slope") {
    Rng rng(2024);
    std::vector<double> x(2000);
    std::vector<int> y(2000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform(-2.0, 2.0);
        y[i] = rng.uniform() < sigmoid(2.0 * x[i]) ? 1 : 0;
    }
    Dataset data = one_variable_dataset(x, y);

    PredictiveModel model = train(ModelFamily::logistic_regression, {{"l2", 0.0}}, data, 1);
    const LinearState& fit = std::get<LinearState>(model.state);
    REQUIRE(fit.weights.size() == 1);

    auto [mle_intercept, mle_slope] = irls_logistic(x, y);
    REQUIRE(std::abs(fit.weights[0] - mle_slope) < 1e-4);
    REQUIRE(std::abs(fit.intercept - mle_intercept) < 1e-4);
    REQUIRE(std::abs(fit.weights[0] - 2.0) < 0.3);
}

TEST_CASE("logistic regression uses categorical variables") {
    Dataset data = random_mixed_dataset(300, 99);
    PredictiveModel model = train(ModelFamily::logistic_regression, {}, data, 1);
    // Group c was generated with a higher event rate than groups a and b, so
    // its weight should dominate the other two.
    const LinearState& fit = std::get<LinearState>(model.state);
    const std::uint32_t off = fit.slot_offsets[2];
    REQUIRE(fit.slot_counts[2] == 3);
    REQUIRE(fit.weights[off + 2] > fit.weights[off + 0]);
    REQUIRE(fit.weights[off + 2] > fit.weights[off + 1]);
}

TEST_CASE("grid search shapes, ordering, and failure reporting") {
    Dataset data = random_mixed_dataset(140, 55);
    GridSpec grid;
    grid.seed = 9;
    grid.cells.push_back({"t1", ModelFamily::decision_tree, {{"max_depth", 3}}});
    grid.cells.push_back({"t2", ModelFamily::decision_tree, {{"max_depth", 3}}});
    grid.cells.push_back({"bad", ModelFamily::decision_tree, {{"max_depth", -1}}});

    GridSearchResult result = grid_search(grid, data, 5);
    REQUIRE(result.records.size() == 2);
    REQUIRE(result.failures.size() == 1);
    REQUIRE(result.failures[0].id == "bad");
    REQUIRE(result.failures[0].error == "InvalidHyperparameter");

    for (const auto& record : result.records) {
        REQUIRE(record.cv_auc_per_fold.size() == 5);
        double sum = 0;
        for (double v : record.cv_auc_per_fold) sum += v;
        REQUIRE(std::abs(record.cv_auc_mean - sum / 5.0) < 1e-12);
    }
    // Identical settings must produce identical scores; the tie then falls
    // back to the id ordering.
    REQUIRE(result.records[0].cv_auc_mean == result.records[1].cv_auc_mean);
    REQUIRE(result.records[0].model.id == "t1");
    REQUIRE(result.records[1].model.id == "t2");

    GridSpec dup;
    dup.cells.push_back({"x", ModelFamily::decision_tree, {}});
    dup.cells.push_back({"x", ModelFamily::decision_tree, {}});
    REQUIRE_THROWS_AS(grid_search(dup, data, 5), Error);
}

TEST_CASE("grid search ranking is descending with id tie-break") {
    Dataset data = random_mixed_dataset(160, 77);
    GridSpec grid = default_grid(21);
    grid.cells.resize(6);
    GridSearchResult result = grid_search(grid, data, 4);
    REQUIRE(result.failures.empty());
    for (std::size_t i = 1; i < result.records.size(); ++i) {
        const auto& prev = result.records[i - 1];
        const auto& cur = result.records[i];
        const bool ordered = prev.cv_auc_mean > cur.cv_auc_mean ||
                             (prev.cv_auc_mean == cur.cv_auc_mean &&
                              prev.model.id < cur.model.id);
        REQUIRE(ordered);
    }
}

TEST_CASE("model store round-trips scores exactly") {
    Dataset data = random_mixed_dataset(130, 5);
    std::vector<ModelRecord> records;
    std::uint64_t seed = 11;
    for (ModelFamily family :
         {ModelFamily::decision_tree, ModelFamily::random_forest,
          ModelFamily::gradient_boosting, ModelFamily::logistic_regression}) {
        ModelRecord record;
        record.model = train(family, {}, data, seed++);
        record.model.id = std::string(family_name(family));
        record.cv_auc_mean = 0.5;
        record.cv_auc_per_fold = {0.5, 0.5};
        if (family == ModelFamily::random_forest) record.test_auc = 0.7;
        records.push_back(std::move(record));
    }

    const std::string payload = save_models(records);
    REQUIRE(save_models(load_models(payload)) == payload);

    const auto loaded = load_models(payload);
    Dataset probe = random_mixed_dataset(100, 1234);
    for (std::size_t k = 0; k < records.size(); ++k) {
        REQUIRE(loaded[k].model.score_all(probe) == records[k].model.score_all(probe));
    }
    REQUIRE(loaded[1].test_auc.has_value());
    REQUIRE(*loaded[1].test_auc == 0.7);
    REQUIRE_FALSE(loaded[0].test_auc.has_value());
}

TEST_CASE("model store rejects bad payloads") {
    Dataset data = random_mixed_dataset(60, 6);
    ModelRecord record;
    record.model = train(ModelFamily::decision_tree, {}, data, 1);
    record.model.id = "t";
    const std::string payload = save_models({record});

    auto expect_code = [](const std::string& text, ErrorCode want) {
        try {
            load_models(text);
            FAIL("expected an error");
        } catch (const Error& e) {
            REQUIRE(e.code() == want);
        }
    };
    std::string flipped = payload;
    flipped.replace(flipped.find("\"format_version\": 1"), 19, "\"format_version\": 9");
    expect_code(flipped, ErrorCode::version_mismatch);
    expect_code(payload.substr(0, payload.size() / 2), ErrorCode::corrupt_payload);
    expect_code("{}", ErrorCode::corrupt_payload);
}
