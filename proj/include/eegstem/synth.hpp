#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eegstem/ingest.hpp"
#include "eegstem/spectral.hpp"
#include "eegstem/types.hpp"
#include "eegstem/util.hpp"

namespace eegstem {

using BandAmplitudes = std::array<std::array<double, kNumBands>, kNumChannels>;

/// Per-task ground truth: one sinusoid per (channel, band) with the given amplitude in microvolts.
struct TaskProfile {
    TaskLabel task = TaskLabel::MSPAN;
    BandAmplitudes amplitudes{};
    std::array<double, kNumBands> tone_hz{2.0, 6.0, 10.0, 20.0, 40.0};

    /// Tones must sit inside their band and on an exact bin of a `window_len`-point transform.
    void validate(double fs, std::size_t window_len, const BandSet& bands) const {
        for (const auto& ch : amplitudes) {
            for (double a : ch) {
                if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("profile amplitudes must be >= 0");
            }
        }
        for (std::size_t b = 0; b < kNumBands; ++b) {
            if (!bands[b].contains(tone_hz[b])) {
                throw ConfigError("tone " + format_double(tone_hz[b]) + " Hz lies outside band " + bands[b].name);
            }
            const double bin = tone_hz[b] * static_cast<double>(window_len) / fs;
            if (std::abs(bin - std::round(bin)) > 1e-9) {
                throw ConfigError("tone " + format_double(tone_hz[b]) + " Hz is not on a transform bin");
            }
        }
    }
};

struct SynthConfig {
    double sample_rate_hz = kDefaultSampleRateHz;
    double duration_s = 60.0;
    double noise_sigma = 20.0;
    std::size_t n_subjects = 20;
    double marker_rate_hz = 0.0;  ///< mean rate of synthetic blink/jaw markers; 0 disables
    std::uint64_t seed = 0;

    std::size_t samples() const noexcept {
        return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    }

    void validate(std::size_t window_len) const {
        if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
        if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
        if (!(marker_rate_hz >= 0.0)) throw ConfigError("marker rate must be >= 0");
        if (n_subjects < 1) throw ConfigError("need at least one subject");
        if (samples() < window_len) throw ConfigError("duration too short for one window");
    }
};

inline std::string subject_label(std::size_t subject_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "S%02zu", subject_index + 1);
    return buf;
}

/// Sum of per-band tones with stream-derived phases plus white Gaussian noise.
inline RawRecording generate_recording(const TaskProfile& profile, const SynthConfig& cfg,
                                       std::size_t subject_index) {
    const double fs = cfg.sample_rate_hz;
    const std::size_t n = cfg.samples();
    RawRecording rec;
    rec.subject_id = subject_label(subject_index);
    rec.task = profile.task;
    rec.sample_rate_hz = fs;

    const auto task_index = index_of(profile.task);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        std::mt19937_64 rng(derive_seed(cfg.seed, subject_index, task_index, c));
        std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
        std::array<double, kNumBands> phase{};
        for (auto& p : phase) p = phase_dist(rng);

        auto& x = rec.samples[c];
        x.assign(n, 0.0);
        for (std::size_t b = 0; b < kNumBands; ++b) {
            const double amp = profile.amplitudes[c][b];
            if (amp == 0.0) continue;
            const double omega = 2.0 * std::numbers::pi * profile.tone_hz[b] / fs;
            for (std::size_t i = 0; i < n; ++i) x[i] += amp * std::sin(omega * static_cast<double>(i) + phase[b]);
        }
        if (cfg.noise_sigma > 0.0) {
            std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
            for (auto& v : x) v += noise(rng);
        }
    }

    if (cfg.marker_rate_hz > 0.0) {
        std::mt19937_64 rng(derive_seed(cfg.seed, subject_index, task_index, kNumChannels));
        std::exponential_distribution<double> gap(cfg.marker_rate_hz);
        std::bernoulli_distribution jaw(0.5);
        const double duration = rec.duration_s();
        for (double t = gap(rng); t < duration; t += gap(rng)) {
            // Snap to the sample grid so a CSV round trip preserves marker times exactly.
            const double snapped = std::min(std::round(t * fs), static_cast<double>(n - 1)) / fs;
            rec.markers.push_back({snapped, jaw(rng) ? MarkerKind::JawClench : MarkerKind::Blink});
        }
    }
    return rec;
}

/// n_subjects x 5 recordings, subject-major and in canonical task order.
inline std::vector<RawRecording> generate_study(std::span<const TaskProfile> profiles, const SynthConfig& cfg) {
    std::array<const TaskProfile*, kNumTasks> by_task{};
    for (const auto& p : profiles) {
        auto& slot = by_task[index_of(p.task)];
        if (slot != nullptr) throw ConfigError("duplicate profile for task " + std::string(task_name(p.task)));
        slot = &p;
    }
    for (auto t : kTasks) {
        if (by_task[index_of(t)] == nullptr) throw ConfigError("missing profile for task " + std::string(task_name(t)));
    }
    std::vector<RawRecording> out;
    out.reserve(cfg.n_subjects * kNumTasks);
    for (std::size_t s = 0; s < cfg.n_subjects; ++s) {
        for (auto t : kTasks) out.push_back(generate_recording(*by_task[index_of(t)], cfg, s));
    }
    return out;
}

namespace detail {

inline std::array<TaskProfile, kNumTasks> profiles_from(const std::array<std::array<double, kNumBands>, kNumTasks>& task_band,
                                                        const std::array<double, kNumChannels>& channel_gain) {
    std::array<TaskProfile, kNumTasks> out;
    for (auto t : kTasks) {
        auto& p = out[index_of(t)];
        p.task = t;
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            for (std::size_t b = 0; b < kNumBands; ++b) p.amplitudes[c][b] = task_band[index_of(t)][b] * channel_gain[c];
        }
    }
    return out;
}

}  // namespace detail

/// Built-in profile set with qualitatively distinct task spectra: BCST carries the largest
/// amplitudes in every band and MathProc the smallest.
inline std::array<TaskProfile, kNumTasks> default_profiles() {
    constexpr std::array<double, kNumBands> base{12.0, 7.0, 6.0, 4.0, 2.0};
    constexpr std::array<std::array<double, kNumBands>, kNumTasks> scale{{
        {1.00, 1.00, 1.00, 1.00, 1.00},  // MSPAN
        {0.80, 0.75, 0.75, 0.80, 0.75},  // MathProc
        {1.30, 1.30, 1.30, 1.30, 1.35},  // BCST
        {1.15, 0.90, 1.10, 0.90, 1.05},  // Connections
        {0.90, 1.15, 0.85, 1.15, 0.90},  // TOL
    }};
    std::array<std::array<double, kNumBands>, kNumTasks> task_band{};
    for (std::size_t t = 0; t < kNumTasks; ++t) {
        for (std::size_t b = 0; b < kNumBands; ++b) task_band[t][b] = base[b] * scale[t][b];
    }
    return detail::profiles_from(task_band, {1.0, 0.9, 0.95, 1.05});
}

/// Each task owns one band (task i -> band i) at `amplitude`; every other tone is silent.
inline std::array<TaskProfile, kNumTasks> separated_profiles(double amplitude = 10.0) {
    std::array<std::array<double, kNumBands>, kNumTasks> task_band{};
    for (std::size_t t = 0; t < kNumTasks; ++t) task_band[t][t] = amplitude;
    return detail::profiles_from(task_band, {1.0, 1.0, 1.0, 1.0});
}

/// Default task spectra on `channel` only; the other channels carry nothing but noise.
inline std::array<TaskProfile, kNumTasks> planted_channel_profiles(ChannelId channel) {
    auto profiles = default_profiles();
    for (auto& p : profiles) {
        for (auto c : kChannels) {
            if (c != channel) p.amplitudes[index_of(c)].fill(0.0);
        }
    }
    return profiles;
}

}  // namespace eegstem
