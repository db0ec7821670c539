#pragma once

// Small builders shared by the model and experiment suites.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "eegstem/dataset.hpp"
#include "eegstem/tree.hpp"

namespace support {

/// Dataset of n rows over p generic columns "tp9_c<j>"; label and features come from `fill`.
inline eegstem::Dataset make_dataset(std::size_t n, std::size_t p,
                                     const std::function<eegstem::TaskLabel(std::size_t, std::vector<double>&)>& fill) {
    eegstem::Dataset d;
    for (std::size_t j = 0; j < p; ++j) d.schema.push_back("tp9_c" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) {
        eegstem::FeatureVector r;
        r.features.assign(p, 0.0);
        r.label = fill(i, r.features);
        r.subject_id = "S01";
        r.ordinal = i;
        d.rows.push_back(std::move(r));
    }
    return d;
}

/// Five Gaussian class blobs along every feature: feature j of class c ~ N(c * spread, 1).
inline eegstem::Dataset blobs(std::size_t n, std::size_t p, double spread, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    return make_dataset(n, p, [&](std::size_t i, std::vector<double>& x) {
        const auto c = i % eegstem::kNumTasks;
        for (auto& v : x) v = static_cast<double>(c) * spread + noise(rng);
        return eegstem::kTasks[c];
    });
}

inline eegstem::FeatureMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
    eegstem::FeatureMatrix m;
    m.rows = rows.size();
    m.cols = rows.empty() ? 0 : rows[0].size();
    for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
    return m;
}

}  // namespace support
