#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "eegstem/dataset.hpp"
#include "eegstem/ensemble.hpp"
#include "eegstem/metrics.hpp"
#include "eegstem/types.hpp"
#include "eegstem/util.hpp"

namespace eegstem {

/// Interval grid of the original sweep, largest first.
inline constexpr std::array<std::size_t, 12> kDefaultIntervals{4096, 2048, 1024, 512, 256, 128,
                                                               64,   32,   16,   8,   4,   2};

struct ExperimentResult {
    ClassifierKind classifier = ClassifierKind::RandomForest;
    std::size_t k = 2;
    std::vector<ChannelId> channels{kChannels.begin(), kChannels.end()};
    MetricsReport metrics;
    ConfusionMatrix confusion;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

struct SkippedCell {
    std::size_t k = 0;
    ClassifierKind classifier = ClassifierKind::RandomForest;
    std::string reason;
};

struct SweepOutcome {
    std::vector<ExperimentResult> results;
    std::vector<SkippedCell> skipped;
};

/// Receives every trained model with the result it produced (e.g. to write model files).
using ModelSink = std::function<void(const ExperimentResult&, const EnsembleModel&)>;

/// "TP9+AF7+AF8+TP10" style label for a channel subset.
inline std::string channel_set_name(std::span<const ChannelId> channels) {
    std::string s;
    for (auto c : channels) {
        if (!s.empty()) s += '+';
        s += channel_name(c);
    }
    return s;
}

/// Split at interval k, train on the residue-0 rows, evaluate on the rest.
inline ExperimentResult run_cell(const Dataset& d, ClassifierKind kind, std::size_t k, const TrainConfig& cfg,
                                 std::span<const ChannelId> channels = kChannels, const ModelSink& sink = {}) {
    const auto started = std::chrono::steady_clock::now();
    const auto plan = interval_split(d.size(), k);
    const auto model = train(kind, d, plan, cfg);

    std::vector<TaskLabel> truth(plan.test.size()), preds(plan.test.size());
    parallel_for(plan.test.size(), cfg.workers, [&](std::size_t i) {
        const auto& row = d.rows[plan.test[i]];
        truth[i] = row.label;
        preds[i] = std::visit([&](const auto& m) { return predict(m, row.features); }, model);
    });

    ExperimentResult r;
    r.classifier = kind;
    r.k = k;
    r.channels.assign(channels.begin(), channels.end());
    r.confusion = confusion(truth, preds);
    r.metrics = metrics(r.confusion);
    r.seed = cfg.seed;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (sink) sink(r, model);
    return r;
}

/// Every (k, classifier) cell, ordered by k descending then classifier display name. Cells whose
/// k does not fit the dataset, or whose training rows cannot support the classifier, are
/// recorded as skipped instead of failing the sweep.
inline SweepOutcome run_sweep(const Dataset& d, std::vector<ClassifierKind> classifiers,
                              std::vector<std::size_t> k_values, const TrainConfig& cfg, const ModelSink& sink = {}) {
    std::sort(k_values.begin(), k_values.end(), std::greater<>());
    k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());
    std::sort(classifiers.begin(), classifiers.end(),
              [](ClassifierKind a, ClassifierKind b) { return display_name(a) < display_name(b); });
    classifiers.erase(std::unique(classifiers.begin(), classifiers.end()), classifiers.end());

    SweepOutcome out;
    for (auto k : k_values) {
        for (auto kind : classifiers) {
            if (k < 2 || k > d.size()) {
                out.skipped.push_back({k, kind, "interval " + std::to_string(k) + " outside [2, " +
                                                    std::to_string(d.size()) + "]"});
                continue;
            }
            try {
                out.results.push_back(run_cell(d, kind, k, cfg, kChannels, sink));
            } catch (const DataError& e) {
                out.skipped.push_back({k, kind, e.what()});
            }
        }
    }
    return out;
}

/// Random forest at k = 2 on each single channel (canonical order) and then on all four.
inline std::vector<ExperimentResult> run_channel_study(const Dataset& d, const TrainConfig& cfg,
                                                       const ModelSink& sink = {}) {
    for (auto c : kChannels) {
        if (std::none_of(d.schema.begin(), d.schema.end(),
                         [&](const std::string& col) { return column_channel(col) == c; })) {
            throw DataError("channel study needs the full 4-channel schema; missing " + std::string(channel_name(c)));
        }
    }
    std::vector<ExperimentResult> results;
    for (auto c : kChannels) {
        const std::array<ChannelId, 1> subset{c};
        results.push_back(run_cell(select_channels(d, subset), ClassifierKind::RandomForest, 2, cfg, subset, sink));
    }
    results.push_back(run_cell(select_channels(d, kChannels), ClassifierKind::RandomForest, 2, cfg, kChannels, sink));
    return results;
}

struct PsdEntry {
    TaskLabel task = TaskLabel::MSPAN;
    ChannelId channel = ChannelId::TP9;
    std::string band;  ///< band column key, e.g. "d" or "b8_12"
    double mean = 0.0;
    double std = 0.0;  ///< population standard deviation
    std::size_t windows = 0;
};

struct PsdBandMean {
    TaskLabel task = TaskLabel::MSPAN;
    std::string band;
    double mean = 0.0;  ///< mean of the per-channel means
};

struct PsdSummary {
    std::vector<PsdEntry> entries;          ///< task-major, then schema column order
    std::vector<PsdBandMean> cross_channel;  ///< task-major, then band order
    std::vector<TaskLabel> omitted;          ///< tasks without any rows
};

inline PsdSummary psd_summary(const Dataset& d) {
    struct Column {
        ChannelId channel;
        std::string band;
    };
    std::vector<Column> columns;
    std::vector<std::string> bands;
    for (const auto& name : d.schema) {
        const auto pos = name.find('_');
        const auto ch = column_channel(name);
        if (!ch) throw DataError("psd summary: column '" + name + "' is not <channel>_<band>");
        columns.push_back({*ch, name.substr(pos + 1)});
        if (std::find(bands.begin(), bands.end(), columns.back().band) == bands.end()) bands.push_back(columns.back().band);
    }

    PsdSummary s;
    for (auto task : kTasks) {
        std::vector<const FeatureVector*> rows;
        for (const auto& r : d.rows) {
            if (r.label == task) rows.push_back(&r);
        }
        if (rows.empty()) {
            s.omitted.push_back(task);
            continue;
        }
        const auto n = static_cast<double>(rows.size());
        std::map<std::string, std::pair<double, std::size_t>> band_acc;
        for (std::size_t f = 0; f < columns.size(); ++f) {
            double mean = 0.0;
            for (const auto* r : rows) mean += r->features[f];
            mean /= n;
            double var = 0.0;
            for (const auto* r : rows) var += (r->features[f] - mean) * (r->features[f] - mean);
            s.entries.push_back({task, columns[f].channel, columns[f].band, mean, std::sqrt(var / n), rows.size()});
            auto& acc = band_acc[columns[f].band];
            acc.first += mean;
            acc.second += 1;
        }
        for (const auto& b : bands) {
            const auto& acc = band_acc.at(b);
            s.cross_channel.push_back({task, b, acc.first / static_cast<double>(acc.second)});
        }
    }
    if (s.entries.empty()) throw DataError("psd summary: dataset has no rows");
    return s;
}

// Report CSVs. Percentages use two decimals to match the published table layout.

inline std::string sweep_row(std::size_t k, ClassifierKind kind, const MetricsReport& m) {
    return std::to_string(k) + "," + std::string(display_name(kind)) + "," + format_percent(m.accuracy) + "," +
           format_percent(m.macro_f1) + "," + format_percent(m.macro_precision) + "," +
           format_percent(m.macro_recall);
}

inline void write_sweep_csv(std::ostream& out, std::span<const ExperimentResult> results) {
    out << "interval,classifier,accuracy,f1,precision,recall\n";
    for (const auto& r : results) out << sweep_row(r.k, r.classifier, r.metrics) << '\n';
}

inline void write_per_label_csv(std::ostream& out, std::span<const ExperimentResult> results) {
    out << "interval,classifier,channel_set,label,accuracy,precision,recall,f1\n";
    for (const auto& r : results) {
        for (const auto& c : r.metrics.per_class) {
            out << r.k << ',' << display_name(r.classifier) << ',' << channel_set_name(r.channels) << ','
                << task_name(c.label) << ',' << format_percent(c.accuracy) << ',' << format_percent(c.precision)
                << ',' << format_percent(c.recall) << ',' << format_percent(c.f1) << '\n';
        }
    }
}

inline void write_channel_study_csv(std::ostream& out, std::span<const ExperimentResult> results) {
    out << "interval,classifier,channel_set,accuracy,f1,precision,recall\n";
    for (const auto& r : results) {
        out << r.k << ',' << display_name(r.classifier) << ',' << channel_set_name(r.channels) << ','
            << format_percent(r.metrics.accuracy) << ',' << format_percent(r.metrics.macro_f1) << ','
            << format_percent(r.metrics.macro_precision) << ',' << format_percent(r.metrics.macro_recall) << '\n';
    }
}

inline void write_psd_channel_csv(std::ostream& out, const PsdSummary& s) {
    out << "task,channel,band,mean,std\n";
    for (const auto& e : s.entries) {
        out << task_name(e.task) << ',' << channel_name(e.channel) << ',' << e.band << ',' << format_double(e.mean)
            << ',' << format_double(e.std) << '\n';
    }
}

inline void write_psd_band_csv(std::ostream& out, const PsdSummary& s) {
    out << "task,band,mean\n";
    for (const auto& e : s.cross_channel) {
        out << task_name(e.task) << ',' << e.band << ',' << format_double(e.mean) << '\n';
    }
}

}  // namespace eegstem
