#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eegstem/ingest.hpp"
#include "eegstem/types.hpp"

namespace eegstem {

/// Windowing geometry. At 256 Hz the defaults give 1024-sample windows with a 102-sample stride.
struct WindowConfig {
    double window_seconds = 4.0;
    double overlap_fraction = 0.9;

    std::size_t window_len(double fs) const noexcept {
        return static_cast<std::size_t>(std::llround(window_seconds * fs));
    }
    std::size_t stride(double fs) const noexcept {
        const auto s = std::llround(static_cast<double>(window_len(fs)) * (1.0 - overlap_fraction));
        return static_cast<std::size_t>(std::max<long long>(1, s));
    }

    void validate(double fs) const {
        if (!(window_seconds > 0.0)) throw ConfigError("window_seconds must be positive");
        if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
            throw ConfigError("overlap_fraction must lie in [0, 1)");
        }
        if (window_len(fs) < 2) throw ConfigError("window length must be at least 2 samples");
    }
};

struct Window {
    std::string subject_id;
    TaskLabel task = TaskLabel::MSPAN;
    std::size_t start_index = 0;  ///< into the parent recording
    ChannelSamples data;          ///< channel rows in canonical order
    std::size_t ordinal = 0;      ///< assigned at dataset assembly

    std::size_t size() const noexcept { return data[0].size(); }
};

/// Start offsets 0, stride, 2*stride, ... for every full window that fits in `length` samples.
inline std::vector<std::size_t> window_offsets(std::size_t length, std::size_t window_len, std::size_t stride) {
    std::vector<std::size_t> offsets;
    if (window_len == 0 || stride == 0 || length < window_len) return offsets;
    offsets.reserve((length - window_len) / stride + 1);
    for (std::size_t o = 0; o + window_len <= length; o += stride) offsets.push_back(o);
    return offsets;
}

/// Cuts overlapping windows out of one clean segment; windows never straddle segment edges.
inline std::vector<Window> segment(const CleanSegment& seg, const WindowConfig& cfg, double fs,
                                   const std::string& subject_id = {}, TaskLabel task = TaskLabel::MSPAN) {
    cfg.validate(fs);
    const std::size_t len = cfg.window_len(fs);
    std::vector<Window> windows;
    for (auto offset : window_offsets(seg.size(), len, cfg.stride(fs))) {
        Window w;
        w.subject_id = subject_id;
        w.task = task;
        w.start_index = seg.start_index + offset;
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            const auto first = seg.samples[c].begin() + static_cast<std::ptrdiff_t>(offset);
            w.data[c].assign(first, first + static_cast<std::ptrdiff_t>(len));
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

/// X(k) = (1/N) sum_n x(n) exp(-j 2 pi k n / N), k = 0..N-1.
struct Spectrum {
    std::vector<std::complex<double>> coefficients;
    double sample_rate_hz = kDefaultSampleRateHz;

    std::size_t size() const noexcept { return coefficients.size(); }
    double bin_hz(std::size_t k) const noexcept {
        return static_cast<double>(k) * sample_rate_hz / static_cast<double>(size());
    }
};

constexpr bool is_power_of_two(std::size_t n) noexcept { return n >= 1 && (n & (n - 1)) == 0; }

/// Iterative radix-2 decimation-in-time transform with per-stage exact twiddles.
inline Spectrum dft(std::span<const double> x, double fs) {
    const std::size_t n = x.size();
    if (n < 2 || !is_power_of_two(n)) {
        throw std::invalid_argument("dft: length " + std::to_string(n) + " is not a power of two >= 2");
    }
    std::vector<std::complex<double>> a(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
        a[r] = x[i];
    }

    std::vector<std::complex<double>> twiddle(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle[k] = {std::cos(angle), std::sin(angle)};
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const auto t = twiddle[j * step] * a[base + j + half];
                const auto u = a[base + j];
                a[base + j] = u + t;
                a[base + j + half] = u - t;
            }
        }
    }
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= scale;
    return {std::move(a), fs};
}

inline constexpr std::size_t kNumBands = 5;
inline constexpr double kMinBandHz = 0.5;

/// Half-open [lo_hz, hi_hz); the top band may include its upper edge (Nyquist).
struct BandDefinition {
    std::string name;
    std::string key;  ///< feature column suffix, keyed by range
    double lo_hz = 0.0;
    double hi_hz = 0.0;
    bool inclusive_hi = false;

    bool contains(double f) const noexcept { return f >= lo_hz && (inclusive_hi ? f <= hi_hz : f < hi_hz); }
};

using BandSet = std::array<BandDefinition, kNumBands>;

/// Band table: delta [0.5,4), theta [4,8), "beta" [8,12), "alpha" [12,35), gamma [35, cap].
/// The beta/alpha names deliberately swap the usual convention; columns are
/// keyed by range (b8_12, b12_35) so the names never matter downstream.
inline BandSet make_bands(double fs, std::array<double, kNumBands> lower_edges = {0.5, 4.0, 8.0, 12.0, 35.0},
                          std::optional<double> gamma_cap_hz = std::nullopt) {
    const double nyquist = fs / 2.0;
    const double top = gamma_cap_hz ? std::min(*gamma_cap_hz, nyquist) : nyquist;
    auto edge = [](double v) {
        auto s = format_double(v);
        for (auto& ch : s) {
            if (ch == '.') ch = 'p';
        }
        return s;
    };
    BandSet bands;
    const std::array<std::string, kNumBands> names{"delta", "theta", "beta", "alpha", "gamma"};
    for (std::size_t b = 0; b < kNumBands; ++b) {
        bands[b].name = names[b];
        bands[b].lo_hz = lower_edges[b];
        bands[b].hi_hz = b + 1 < kNumBands ? lower_edges[b + 1] : top;
        bands[b].inclusive_hi = b + 1 == kNumBands;
        if (!(bands[b].lo_hz < bands[b].hi_hz)) throw ConfigError("band edges must be strictly increasing");
        if (bands[b].hi_hz > nyquist) throw ConfigError("band edge above Nyquist");
    }
    if (lower_edges[0] < kMinBandHz) throw ConfigError("lowest band edge must be >= 0.5 Hz");
    bands[0].key = "d";
    bands[1].key = "t";
    bands[2].key = "b" + edge(bands[2].lo_hz) + "_" + edge(bands[2].hi_hz);
    bands[3].key = "b" + edge(bands[3].lo_hz) + "_" + edge(bands[3].hi_hz);
    bands[4].key = "g";
    return bands;
}

/// Sum of |X(k)|^2 over one-sided bins k in [1, N/2] whose frequency falls in the band.
/// Symmetric bins are not doubled; DC and anything below 0.5 Hz never count.
inline double band_power(const Spectrum& s, const BandDefinition& band) {
    const std::size_t n = s.size();
    double total = 0.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double f = s.bin_hz(k);
        if (f < kMinBandHz || !band.contains(f)) continue;
        total += std::norm(s.coefficients[k]);
    }
    return total;
}

/// Channel-major band powers; values[channel][band], bands ascending by frequency.
struct BandPowers {
    std::array<std::array<double, kNumBands>, kNumChannels> values{};

    double at(ChannelId c, std::size_t band) const noexcept { return values[index_of(c)][band]; }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(kNumChannels * kNumBands);
        for (const auto& ch : values) out.insert(out.end(), ch.begin(), ch.end());
        return out;
    }
};

inline BandPowers extract_features(const Window& w, const BandSet& bands, double fs) {
    BandPowers out;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const auto spectrum = dft(w.data[c], fs);
        for (std::size_t b = 0; b < kNumBands; ++b) out.values[c][b] = band_power(spectrum, bands[b]);
    }
    return out;
}

/// Column names in Feature CSV order: tp9_d, tp9_t, tp9_b8_12, ..., tp10_g.
inline std::vector<std::string> feature_column_names(const BandSet& bands) {
    std::vector<std::string> names;
    for (auto c : kChannels) {
        for (const auto& b : bands) names.push_back(std::string(channel_prefix(c)) + "_" + b.key);
    }
    return names;
}

}  // namespace eegstem
