#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rashodet/dataset.hpp"
#include "rashodet/model.hpp"
#include "rashodet/rng.hpp"

namespace rashodet {

// Synthetic cohort shipped with the project: 101 admissions with 13 routine
// lab values and a binary outcome. The latent risk mixes saturating,
// threshold and interaction effects so that different model families find
// genuinely different explanations at similar discrimination.
inline Dataset make_demo_dataset() {
    constexpr std::size_t kRows = 101;
    constexpr std::uint64_t kSeed = 20260822;

    Dataset data;
    data.name = "demo";
    data.target_name = "outcome";
    data.target_labels = {"adverse", "favorable"};

    const std::vector<std::string> names = {"age",        "crp",        "ferritin",
                                            "hb",         "plt",        "wbc",
                                            "alt",        "ast",        "bilirubin",
                                            "fibrinogen", "creatinine", "sodium",
                                            "ldh"};
    for (const std::string& name : names) {
        data.variables.push_back({name, VarKind::numeric, 0.0, 0.0, {}});
    }
    data.columns.assign(names.size(), std::vector<double>(kRows));

    Rng rng(derive_seed(kSeed, "demo"));
    auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };
    for (std::size_t i = 0; i < kRows; ++i) {
        const double severity = rng.normal();
        const double age = std::clamp(52.0 + 16.0 * rng.normal(), 18.0, 90.0);
        const double crp =
            std::clamp(std::exp(3.4 + 0.9 * rng.normal() + 0.5 * severity), 1.0, 400.0);
        const double ferritin =
            std::clamp(std::exp(6.6 + 1.1 * rng.normal() + 0.8 * severity), 15.0, 20000.0);
        const double hb = std::clamp(11.5 + 2.0 * rng.normal() - 0.7 * severity, 5.0, 17.5);
        const double plt =
            std::clamp(210.0 + 90.0 * rng.normal() - 70.0 * severity, 8.0, 520.0);
        const double wbc =
            std::clamp(std::exp(1.9 + 0.55 * rng.normal() - 0.2 * severity), 0.4, 40.0);
        const double alt =
            std::clamp(std::exp(3.5 + 0.8 * rng.normal() + 0.35 * severity), 5.0, 900.0);
        const double ast =
            std::clamp(std::exp(3.7 + 0.85 * rng.normal() + 0.45 * severity), 5.0, 1100.0);
        const double bilirubin =
            std::clamp(std::exp(0.1 + 0.8 * rng.normal() + 0.4 * severity), 0.2, 22.0);
        const double fibrinogen =
            std::clamp(3.3 + 1.1 * rng.normal() - 0.6 * severity, 0.4, 8.5);
        const double creatinine =
            std::clamp(std::exp(-0.1 + 0.5 * rng.normal() + 0.25 * severity), 0.3, 7.0);
        const double sodium = std::clamp(138.0 + 4.0 * rng.normal(), 121.0, 152.0);
        const double ldh =
            std::clamp(std::exp(5.9 + 0.6 * rng.normal() + 0.55 * severity), 90.0, 6000.0);

        const std::vector<double> row = {
            std::round(age),  round1(crp),        round1(ferritin),   round1(hb),
            std::round(plt),  round1(wbc),        std::round(alt),    std::round(ast),
            round1(bilirubin), round1(fibrinogen), round1(creatinine), std::round(sodium),
            std::round(ldh)};
        for (std::size_t j = 0; j < row.size(); ++j) data.columns[j][i] = row[j];

        double risk = 1.6 * std::tanh((ferritin - 900.0) / 1200.0);
        risk += plt < 160.0 ? 1.0 : 0.0;
        risk += 0.8 * std::tanh((crp - 45.0) / 50.0);
        risk += 0.9 * std::tanh((ast - 60.0) / 80.0);
        risk -= 0.7 * std::tanh((fibrinogen - 3.1) / 1.2);
        risk += 0.6 * std::tanh((bilirubin - 1.6) / 1.5);
        risk += 0.35 * std::tanh((age - 55.0) / 18.0);
        risk += 0.5 * std::tanh((ldh - 450.0) / 400.0);
        if (plt < 160.0) risk += 0.7 * std::tanh((ferritin - 900.0) / 1000.0);
        risk += 0.8 * rng.normal();

        const bool adverse = sigmoid(risk + 0.5) > rng.uniform();
        data.target.push_back(adverse ? 0 : 1);
    }
    refresh_observed_domains(data);
    return data;
}

} // namespace rashodet
