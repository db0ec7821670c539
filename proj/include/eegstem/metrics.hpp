#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "eegstem/types.hpp"

namespace eegstem {

/// counts[t][p]: rows = true class, columns = predicted class, both in `classes` order.
struct ConfusionMatrix {
    std::vector<TaskLabel> classes{kTasks.begin(), kTasks.end()};
    std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(kNumTasks * kNumTasks, 0);

    std::size_t size() const noexcept { return classes.size(); }
    std::uint64_t at(std::size_t truth, std::size_t pred) const noexcept { return counts[truth * size() + pred]; }
    std::uint64_t& at(std::size_t truth, std::size_t pred) noexcept { return counts[truth * size() + pred]; }

    std::uint64_t total() const noexcept {
        std::uint64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
    std::uint64_t trace() const noexcept {
        std::uint64_t t = 0;
        for (std::size_t i = 0; i < size(); ++i) t += at(i, i);
        return t;
    }

    // One-vs-rest counts for class c.
    std::uint64_t tp(std::size_t c) const noexcept { return at(c, c); }
    std::uint64_t fp(std::size_t c) const noexcept {
        std::uint64_t s = 0;
        for (std::size_t t = 0; t < size(); ++t) s += t == c ? 0 : at(t, c);
        return s;
    }
    std::uint64_t fn(std::size_t c) const noexcept {
        std::uint64_t s = 0;
        for (std::size_t p = 0; p < size(); ++p) s += p == c ? 0 : at(c, p);
        return s;
    }
    std::uint64_t tn(std::size_t c) const noexcept { return total() - tp(c) - fp(c) - fn(c); }
};

inline ConfusionMatrix confusion(std::span<const TaskLabel> truth, std::span<const TaskLabel> preds,
                                 std::span<const TaskLabel> classes = kTasks) {
    if (truth.size() != preds.size()) throw DataError("confusion: truth and prediction lengths differ");
    if (truth.empty()) throw DataError("confusion: no rows");
    ConfusionMatrix cm;
    cm.classes.assign(classes.begin(), classes.end());
    cm.counts.assign(classes.size() * classes.size(), 0);
    auto position = [&](TaskLabel l) {
        const auto it = std::find(classes.begin(), classes.end(), l);
        if (it == classes.end()) throw DataError("confusion: label " + std::string(task_name(l)) + " not in class set");
        return static_cast<std::size_t>(it - classes.begin());
    };
    for (std::size_t i = 0; i < truth.size(); ++i) ++cm.at(position(truth[i]), position(preds[i]));
    return cm;
}

struct ClassMetrics {
    TaskLabel label = TaskLabel::MSPAN;
    double accuracy = 0.0;  ///< one-vs-rest (TP + TN) / total
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;  ///< TP + FN
};

struct MetricsReport {
    double accuracy = 0.0;  ///< trace / total
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
};

namespace detail {

inline double ratio(std::uint64_t num, std::uint64_t den) noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

/// Per-class one-vs-rest scores in class order. Zero denominators score 0, and F1 is 0
/// whenever precision or recall is 0.
inline std::vector<ClassMetrics> per_label_scores(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) throw DataError("metrics: empty confusion matrix");
    std::vector<ClassMetrics> rows;
    rows.reserve(cm.size());
    for (std::size_t c = 0; c < cm.size(); ++c) {
        ClassMetrics m;
        m.label = cm.classes[c];
        const auto tp = cm.tp(c), fp = cm.fp(c), fn = cm.fn(c), tn = total - tp - fp - fn;
        m.accuracy = detail::ratio(tp + tn, total);
        m.precision = detail::ratio(tp, tp + fp);
        m.recall = detail::ratio(tp, tp + fn);
        m.f1 = (m.precision > 0.0 && m.recall > 0.0) ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        m.support = tp + fn;
        rows.push_back(m);
    }
    return rows;
}

/// Accuracy is trace / total; precision, recall and F1 are unweighted means over classes.
inline MetricsReport metrics(const ConfusionMatrix& cm) {
    MetricsReport r;
    r.per_class = per_label_scores(cm);
    r.accuracy = detail::ratio(cm.trace(), cm.total());
    for (const auto& m : r.per_class) {
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_f1 += m.f1;
    }
    const auto n = static_cast<double>(r.per_class.size());
    r.macro_precision /= n;
    r.macro_recall /= n;
    r.macro_f1 /= n;
    return r;
}

/// "91.07%" style rendering.
inline std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
    return buf;
}

}  // namespace eegstem
