#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fixtures {

struct MetricsFixture {
    const char* name;
    std::size_t n_classes;
    std::vector<std::uint64_t> counts;  // row-major, rows = truth
    double accuracy;
    double macro_precision;
    double macro_recall;
    double macro_f1;
    std::vector<std::array<double, 4>> per_class;  // one-vs-rest accuracy, precision, recall, f1
};

inline const std::vector<MetricsFixture>& metrics_fixtures() {
    static const std::vector<MetricsFixture> all{
#include "metrics_fixtures.inc"
    };
    return all;
}

}  // namespace fixtures
