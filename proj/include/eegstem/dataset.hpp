#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegstem/types.hpp"
#include "eegstem/util.hpp"

namespace eegstem {

struct FeatureVector {
    std::vector<double> features;
    TaskLabel label = TaskLabel::MSPAN;
    std::string subject_id;
    std::size_t ordinal = 0;
};

/// Chronologically ordered labeled rows. Ordinals are 0..n-1 in row order.
struct Dataset {
    std::vector<std::string> schema;
    std::vector<FeatureVector> rows;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t num_features() const noexcept { return schema.size(); }
    static constexpr const auto& classes() noexcept { return kTasks; }

    void validate() const {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.ordinal != i) throw DataError("dataset ordinals must be 0..n-1 without gaps");
            if (r.features.size() != schema.size()) {
                throw DataError("row " + std::to_string(i) + " has " + std::to_string(r.features.size()) +
                                " features, schema has " + std::to_string(schema.size()));
            }
            for (double v : r.features) {
                if (!std::isfinite(v)) throw DataError("row " + std::to_string(i) + " has a non-finite feature");
            }
        }
    }
};

/// Window features plus the provenance needed to order them chronologically.
struct TaggedFeatures {
    std::string subject_id;
    TaskLabel task = TaskLabel::MSPAN;
    std::size_t recording_index = 0;  ///< input order of the source recording
    std::size_t start_index = 0;      ///< window start within the recording
    std::vector<double> features;
};

/// Orders rows by (subject input order, recording input order, window start) and assigns
/// ordinals. A subject's input order is the lowest recording_index among its windows, so the
/// result does not depend on the order of `items`.
inline Dataset assemble(std::vector<TaggedFeatures> items, std::vector<std::string> schema) {
    if (items.empty()) throw DataError("assemble: no windows");
    std::map<std::string, std::size_t> subject_rank;
    for (const auto& it : items) {
        auto [pos, inserted] = subject_rank.try_emplace(it.subject_id, it.recording_index);
        if (!inserted) pos->second = std::min(pos->second, it.recording_index);
        if (it.features.size() != schema.size()) throw DataError("assemble: mixed feature schemas");
    }
    std::sort(items.begin(), items.end(), [&](const TaggedFeatures& a, const TaggedFeatures& b) {
        return std::tuple(subject_rank.at(a.subject_id), a.recording_index, a.start_index) <
               std::tuple(subject_rank.at(b.subject_id), b.recording_index, b.start_index);
    });
    Dataset d;
    d.schema = std::move(schema);
    d.rows.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        d.rows.push_back({std::move(items[i].features), items[i].task, std::move(items[i].subject_id), i});
    }
    return d;
}

/// Every k-th row (index mod k == 0) trains; the remainder tests.
struct SplitPlan {
    std::size_t k = 2;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

inline SplitPlan interval_split(std::size_t n, std::size_t k) {
    if (k < 2) throw ConfigError("interval k must be >= 2 (got " + std::to_string(k) + ")");
    if (k > n) {
        throw ConfigError("interval k=" + std::to_string(k) + " exceeds dataset size " + std::to_string(n));
    }
    SplitPlan plan;
    plan.k = k;
    plan.train.reserve((n + k - 1) / k);
    plan.test.reserve(n - (n + k - 1) / k);
    for (std::size_t i = 0; i < n; ++i) (i % k == 0 ? plan.train : plan.test).push_back(i);
    return plan;
}

inline nlohmann::ordered_json to_json(const SplitPlan& plan) {
    nlohmann::ordered_json j;
    j["k"] = plan.k;
    j["train"] = plan.train;
    j["test"] = plan.test;
    return j;
}

/// Index of each column's channel, derived from its "<prefix>_" name.
inline std::optional<ChannelId> column_channel(std::string_view column) {
    const auto pos = column.find('_');
    if (pos == std::string_view::npos) return std::nullopt;
    return parse_channel(column.substr(0, pos));
}

/// Keeps only the columns of the selected channels, in canonical channel order.
inline Dataset select_channels(const Dataset& d, std::span<const ChannelId> subset) {
    if (subset.empty()) throw ConfigError("channel subset must not be empty");
    std::array<bool, kNumChannels> wanted{};
    for (auto c : subset) {
        if (wanted[index_of(c)]) throw ConfigError("duplicate channel " + std::string(channel_name(c)));
        wanted[index_of(c)] = true;
    }
    std::vector<std::size_t> keep;
    for (auto c : kChannels) {
        if (!wanted[index_of(c)]) continue;
        const auto before = keep.size();
        for (std::size_t i = 0; i < d.schema.size(); ++i) {
            if (column_channel(d.schema[i]) == c) keep.push_back(i);
        }
        if (keep.size() == before) {
            throw ConfigError("dataset has no columns for channel " + std::string(channel_name(c)));
        }
    }
    Dataset out;
    out.schema.reserve(keep.size());
    for (auto i : keep) out.schema.push_back(d.schema[i]);
    out.rows.reserve(d.rows.size());
    for (const auto& r : d.rows) {
        FeatureVector row{{}, r.label, r.subject_id, r.ordinal};
        row.features.reserve(keep.size());
        for (auto i : keep) row.features.push_back(r.features[i]);
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// Optional per-subject z-scoring of every feature column. Off in the default pipeline.
inline Dataset zscore_per_subject(const Dataset& d) {
    Dataset out = d;
    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < d.size(); ++i) by_subject[d.rows[i].subject_id].push_back(i);
    for (const auto& [subject, idx] : by_subject) {
        for (std::size_t f = 0; f < d.num_features(); ++f) {
            double mean = 0.0;
            for (auto i : idx) mean += d.rows[i].features[f];
            mean /= static_cast<double>(idx.size());
            double var = 0.0;
            for (auto i : idx) var += (d.rows[i].features[f] - mean) * (d.rows[i].features[f] - mean);
            const double sd = std::sqrt(var / static_cast<double>(idx.size()));
            for (auto i : idx) out.rows[i].features[f] = sd > 0.0 ? (d.rows[i].features[f] - mean) / sd : 0.0;
        }
    }
    return out;
}

/// Seeded permutation of the label column; features and ordinals stay put. Used as a
/// chance-level control.
inline Dataset shuffle_labels(const Dataset& d, std::uint64_t seed) {
    std::vector<TaskLabel> labels;
    labels.reserve(d.size());
    for (const auto& r : d.rows) labels.push_back(r.label);
    std::mt19937_64 rng(derive_seed(seed, 0x5348554646ULL));
    for (std::size_t i = labels.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(labels[i - 1], labels[pick(rng)]);
    }
    Dataset out = d;
    for (std::size_t i = 0; i < out.size(); ++i) out.rows[i].label = labels[i];
    return out;
}

// Feature CSV: ordinal,subject,task,<schema...>; values as shortest round-trip decimals.

inline void write_feature_csv(std::ostream& out, const Dataset& d) {
    out << "ordinal,subject,task";
    for (const auto& name : d.schema) out << ',' << name;
    out << '\n';
    for (const auto& r : d.rows) {
        if (r.subject_id.find_first_of(",\n\r\"") != std::string::npos) {
            throw DataError("subject id '" + r.subject_id + "' cannot be written to CSV");
        }
        out << r.ordinal << ',' << r.subject_id << ',' << task_name(r.label);
        for (double v : r.features) out << ',' << format_double(v);
        out << '\n';
    }
}

inline void write_feature_header(std::ostream& out, const std::vector<std::string>& schema) {
    write_feature_csv(out, Dataset{schema, {}});
}

inline Dataset read_feature_csv(std::istream& in, const std::string& source = "<features>") {
    std::string line;
    std::size_t line_no = 0;
    Dataset d;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        const auto at = source + ":" + std::to_string(line_no);
        if (!have_header) {
            if (cells.size() < 4 || cells[0] != "ordinal" || cells[1] != "subject" || cells[2] != "task") {
                throw DataError(at + ": expected header ordinal,subject,task,<features...>");
            }
            for (std::size_t i = 3; i < cells.size(); ++i) d.schema.emplace_back(cells[i]);
            have_header = true;
            continue;
        }
        if (cells.size() != d.schema.size() + 3) throw DataError(at + ": wrong number of columns");
        FeatureVector row;
        if (!parse_size(cells[0], row.ordinal)) throw DataError(at + ": bad ordinal");
        row.subject_id = std::string(cells[1]);
        auto task = parse_task(cells[2]);
        if (!task) throw DataError(at + ": unknown task '" + std::string(cells[2]) + "'");
        row.label = *task;
        row.features.resize(d.schema.size());
        for (std::size_t i = 0; i < d.schema.size(); ++i) {
            if (!parse_double(cells[i + 3], row.features[i])) {
                throw DataError(at + ": unparseable value '" + std::string(cells[i + 3]) + "'");
            }
        }
        if (row.ordinal != d.rows.size()) throw DataError(at + ": ordinals must run 0..n-1 in order");
        d.rows.push_back(std::move(row));
    }
    if (!have_header) throw DataError(source + ": empty feature file");
    return d;
}

}  // namespace eegstem
