#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegstem/eegstem.hpp"

namespace eegstem::cli {

/// Effective configuration of one command: JSON config file values overridden by flags.
struct RunConfig {
    double sample_rate_hz = kDefaultSampleRateHz;
    double window_seconds = 4.0;
    double overlap_fraction = 0.9;
    double exclusion_radius_s = kDefaultExclusionRadiusS;
    std::array<double, kNumBands> band_edges_hz{0.5, 4.0, 8.0, 12.0, 35.0};
    std::optional<double> gamma_cap_hz;
    std::vector<std::size_t> k_values{kDefaultIntervals.begin(), kDefaultIntervals.end()};
    std::vector<std::string> classifiers{"bagging", "random_forest", "gboost"};
    std::vector<std::string> channels{"TP9", "AF7", "AF8", "TP10"};
    std::size_t trees = 100;
    std::optional<std::size_t> mtry;
    std::optional<std::size_t> max_depth;
    double learning_rate = 0.3;
    double l2_lambda = 1.0;
    bool boost_full_rounds = false;
    bool hard_vote = false;
    bool zscore_per_subject = false;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  ///< 0 = hardware concurrency
    bool strict = false;
    bool write_models = true;
    bool export_splits = false;
    std::vector<std::string> inputs;
    std::string output_dir = "out";
    std::optional<std::string> subject;
    std::optional<std::string> task;
    // synth
    std::size_t subjects = 20;
    double duration_s = 60.0;
    double noise_sigma = 20.0;
    double marker_rate_hz = 0.0;
    std::string profile = "default";

    std::size_t workers() const { return threads == 0 ? default_workers() : threads; }

    TrainConfig train_config() const {
        TrainConfig t;
        t.n_trees = trees;
        t.mtry = mtry;
        t.max_depth = max_depth;
        t.learning_rate = learning_rate;
        t.l2_lambda = l2_lambda;
        t.seed = seed;
        t.hard_vote = hard_vote;
        t.gboost_full_rounds = boost_full_rounds;
        t.workers = workers();
        return t;
    }

    FeatureOptions feature_options() const {
        FeatureOptions f;
        f.window.window_seconds = window_seconds;
        f.window.overlap_fraction = overlap_fraction;
        f.exclusion_radius_s = exclusion_radius_s;
        f.band_lower_edges = band_edges_hz;
        f.gamma_cap_hz = gamma_cap_hz;
        f.workers = workers();
        return f;
    }

    std::vector<ClassifierKind> classifier_kinds() const {
        std::vector<ClassifierKind> out;
        for (const auto& name : classifiers) {
            auto k = parse_classifier(name);
            if (!k) throw ConfigError("unknown classifier '" + name + "'");
            out.push_back(*k);
        }
        if (out.empty()) throw ConfigError("classifier list is empty");
        return out;
    }

    std::vector<ChannelId> channel_ids() const {
        std::vector<ChannelId> out;
        for (const auto& name : channels) {
            auto c = parse_channel(name);
            if (!c) throw ConfigError("unknown channel '" + name + "'");
            out.push_back(*c);
        }
        return out;
    }

    void validate() const {
        if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be positive");
        WindowConfig{window_seconds, overlap_fraction}.validate(sample_rate_hz);
        if (!(exclusion_radius_s >= 0.0)) throw ConfigError("exclusion_radius_s must be >= 0");
        make_bands(sample_rate_hz, band_edges_hz, gamma_cap_hz);
        for (auto k : k_values) {
            if (k < 2) throw ConfigError("interval values must be >= 2");
        }
        if (k_values.empty()) throw ConfigError("interval list is empty");
        classifier_kinds();
        channel_ids();
        train_config().validate(mtry.value_or(1));
        if (task && !parse_task(*task)) throw ConfigError("unknown task '" + *task + "'");
        if (!(noise_sigma >= 0.0) || !(marker_rate_hz >= 0.0) || !(duration_s > 0.0) || subjects < 1) {
            throw ConfigError("invalid synthetic study parameters");
        }
    }
};

inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["sample_rate_hz"] = c.sample_rate_hz;
    j["window_seconds"] = c.window_seconds;
    j["overlap_fraction"] = c.overlap_fraction;
    j["exclusion_radius_s"] = c.exclusion_radius_s;
    j["band_edges_hz"] = c.band_edges_hz;
    j["gamma_cap_hz"] = c.gamma_cap_hz ? nlohmann::ordered_json(*c.gamma_cap_hz) : nlohmann::ordered_json(nullptr);
    j["k_values"] = c.k_values;
    j["classifiers"] = c.classifiers;
    j["channels"] = c.channels;
    j["trees"] = c.trees;
    j["mtry"] = c.mtry ? nlohmann::ordered_json(*c.mtry) : nlohmann::ordered_json(nullptr);
    j["max_depth"] = c.max_depth ? nlohmann::ordered_json(*c.max_depth) : nlohmann::ordered_json(nullptr);
    j["learning_rate"] = c.learning_rate;
    j["l2_lambda"] = c.l2_lambda;
    j["boost_full_rounds"] = c.boost_full_rounds;
    j["hard_vote"] = c.hard_vote;
    j["zscore_per_subject"] = c.zscore_per_subject;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["strict"] = c.strict;
    j["write_models"] = c.write_models;
    j["export_splits"] = c.export_splits;
    j["inputs"] = c.inputs;
    j["output_dir"] = c.output_dir;
    j["subject"] = c.subject ? nlohmann::ordered_json(*c.subject) : nlohmann::ordered_json(nullptr);
    j["task"] = c.task ? nlohmann::ordered_json(*c.task) : nlohmann::ordered_json(nullptr);
    j["subjects"] = c.subjects;
    j["duration_s"] = c.duration_s;
    j["noise_sigma"] = c.noise_sigma;
    j["marker_rate_hz"] = c.marker_rate_hz;
    j["profile"] = c.profile;
    return j;
}

/// Applies a JSON config document on top of `c`. Unknown keys are rejected.
inline void apply_json(RunConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config file must contain a JSON object");
    const auto known = to_json(RunConfig{});
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    try {
        auto opt = [&](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        auto opt_nullable = [&](const char* key, auto& field) {
            if (!j.contains(key)) return;
            if (j.at(key).is_null()) {
                field.reset();
            } else {
                field = j.at(key).get<typename std::decay_t<decltype(field)>::value_type>();
            }
        };
        opt("sample_rate_hz", c.sample_rate_hz);
        opt("window_seconds", c.window_seconds);
        opt("overlap_fraction", c.overlap_fraction);
        opt("exclusion_radius_s", c.exclusion_radius_s);
        opt("band_edges_hz", c.band_edges_hz);
        opt_nullable("gamma_cap_hz", c.gamma_cap_hz);
        opt("k_values", c.k_values);
        opt("classifiers", c.classifiers);
        opt("channels", c.channels);
        opt("trees", c.trees);
        opt_nullable("mtry", c.mtry);
        opt_nullable("max_depth", c.max_depth);
        opt("learning_rate", c.learning_rate);
        opt("l2_lambda", c.l2_lambda);
        opt("boost_full_rounds", c.boost_full_rounds);
        opt("hard_vote", c.hard_vote);
        opt("zscore_per_subject", c.zscore_per_subject);
        opt("seed", c.seed);
        opt("threads", c.threads);
        opt("strict", c.strict);
        opt("write_models", c.write_models);
        opt("export_splits", c.export_splits);
        opt("inputs", c.inputs);
        opt("output_dir", c.output_dir);
        opt_nullable("subject", c.subject);
        opt_nullable("task", c.task);
        opt("subjects", c.subjects);
        opt("duration_s", c.duration_s);
        opt("noise_sigma", c.noise_sigma);
        opt("marker_rate_hz", c.marker_rate_hz);
        opt("profile", c.profile);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

}  // namespace eegstem::cli
