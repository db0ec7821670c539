#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "eegstem/dataset.hpp"
#include "eegstem/ingest.hpp"
#include "eegstem/spectral.hpp"
#include "eegstem/util.hpp"

namespace eegstem {

struct FeatureOptions {
    WindowConfig window;
    double exclusion_radius_s = kDefaultExclusionRadiusS;
    std::array<double, kNumBands> band_lower_edges{0.5, 4.0, 8.0, 12.0, 35.0};
    std::optional<double> gamma_cap_hz;
    std::size_t workers = 1;
};

/// Recordings -> artifact rejection -> windows -> band powers -> chronologically ordered
/// dataset. Recording order defines subject and session order. The result may have zero rows
/// when every sample is excluded or no segment fits a window.
inline Dataset extract_dataset(std::span<const RawRecording> recordings, const FeatureOptions& opt) {
    if (recordings.empty()) throw DataError("no recordings");
    const double fs = recordings.front().sample_rate_hz;
    for (const auto& r : recordings) {
        r.validate();
        if (r.sample_rate_hz != fs) throw DataError("recordings use different sample rates");
    }
    opt.window.validate(fs);
    if (!is_power_of_two(opt.window.window_len(fs))) {
        throw ConfigError("window length " + std::to_string(opt.window.window_len(fs)) +
                          " samples is not a power of two; adjust window_seconds or the sample rate");
    }
    const auto bands = make_bands(fs, opt.band_lower_edges, opt.gamma_cap_hz);
    auto schema = feature_column_names(bands);

    std::vector<std::vector<TaggedFeatures>> per_recording(recordings.size());
    parallel_for(recordings.size(), opt.workers, [&](std::size_t i) {
        const auto& rec = recordings[i];
        for (const auto& seg : reject_artifacts(rec, opt.exclusion_radius_s)) {
            for (const auto& w : segment(seg, opt.window, fs, rec.subject_id, rec.task)) {
                per_recording[i].push_back(
                    {rec.subject_id, rec.task, i, w.start_index, extract_features(w, bands, fs).flatten()});
            }
        }
    });

    std::vector<TaggedFeatures> all;
    for (auto& v : per_recording) {
        for (auto& t : v) all.push_back(std::move(t));
    }
    if (all.empty()) return Dataset{std::move(schema), {}};
    return assemble(std::move(all), std::move(schema));
}

}  // namespace eegstem
