#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eegstem/types.hpp"
#include "eegstem/util.hpp"

namespace eegstem {

inline constexpr double kDefaultSampleRateHz = 256.0;
inline constexpr double kDefaultExclusionRadiusS = 0.5;

enum class MarkerKind : std::uint8_t { Blink, JawClench };

struct MarkerEvent {
    double time_s = 0.0;
    MarkerKind kind = MarkerKind::Blink;

    friend bool operator==(const MarkerEvent&, const MarkerEvent&) = default;
};

using ChannelSamples = std::array<std::vector<double>, kNumChannels>;

/// One subject x task session: four equal-length microvolt channels plus artifact markers.
struct RawRecording {
    std::string subject_id;
    TaskLabel task = TaskLabel::MSPAN;
    double sample_rate_hz = kDefaultSampleRateHz;
    ChannelSamples samples;
    std::vector<MarkerEvent> markers;

    std::size_t size() const noexcept { return samples[0].size(); }
    double duration_s() const noexcept { return static_cast<double>(size()) / sample_rate_hz; }

    void validate() const {
        if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
            throw DataError("recording " + subject_id + ": sample rate must be positive");
        }
        for (const auto& ch : samples) {
            if (ch.size() != size()) throw DataError("recording " + subject_id + ": channel lengths differ");
            if (!std::all_of(ch.begin(), ch.end(), [](double v) { return std::isfinite(v); })) {
                throw DataError("recording " + subject_id + ": non-finite sample");
            }
        }
        if (!std::is_sorted(markers.begin(), markers.end(),
                            [](const MarkerEvent& a, const MarkerEvent& b) { return a.time_s < b.time_s; })) {
            throw DataError("recording " + subject_id + ": markers not sorted");
        }
    }
};

/// Maximal artifact-free run of samples; start_index refers to the parent recording.
struct CleanSegment {
    std::size_t start_index = 0;
    ChannelSamples samples;

    std::size_t size() const noexcept { return samples[0].size(); }
};

struct RecordingLabels {
    std::string subject_id;
    TaskLabel task = TaskLabel::MSPAN;
};

/// `<subject>_<task>.csv`; the task is the text after the last underscore.
inline RecordingLabels labels_from_filename(const std::filesystem::path& path) {
    const std::string stem = path.stem().string();
    const auto pos = stem.rfind('_');
    if (pos == std::string::npos || pos == 0) {
        throw DataError(path.string() + ": file name does not follow <subject>_<task>.csv");
    }
    auto task = parse_task(std::string_view(stem).substr(pos + 1));
    if (!task) throw DataError(path.string() + ": unknown task '" + stem.substr(pos + 1) + "'");
    return {stem.substr(0, pos), *task};
}

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    out = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        out = out * 10 + (s[i] - '0');
    }
    return true;
}

}  // namespace detail

/// Accepts epoch seconds ("1677672000.25") or ISO-8601 ("2023-03-01 12:00:00.250", 'T' separator,
/// optional trailing 'Z'). Returns seconds since the Unix epoch.
inline std::optional<double> parse_timestamp(std::string_view s) {
    s = detail::trim(s);
    double epoch = 0.0;
    if (parse_double(s, epoch)) return epoch;

    if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T') || s[13] != ':' ||
        s[16] != ':') {
        return std::nullopt;
    }
    if (!detail::parse_fixed_int(s, 0, 4, y) || !detail::parse_fixed_int(s, 5, 2, mo) ||
        !detail::parse_fixed_int(s, 8, 2, d) || !detail::parse_fixed_int(s, 11, 2, h) ||
        !detail::parse_fixed_int(s, 14, 2, mi) || !detail::parse_fixed_int(s, 17, 2, sec)) {
        return std::nullopt;
    }
    double frac = 0.0;
    if (s.size() > 19) {
        if (s[19] != '.' || s.size() == 20) return std::nullopt;
        std::string digits("0");
        digits.append(s.substr(19));
        if (!parse_double(digits, frac)) return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec + frac;
}

/// Parses a Muse-Monitor-style CSV document.
///
/// Rows lacking any RAW_* value are dropped (Muse Monitor writes marker-only rows that way).
/// A row whose Elements cell mentions `blink` or `jaw_clench` (case-insensitive) yields a marker
/// placed at the sample index of the next retained row, i.e. at that row itself when it carries
/// data. Sample times are index / sample_rate_hz; CSV timestamps are only checked for ordering.
inline RawRecording parse_muse_csv(std::string_view text, std::string subject_id, TaskLabel task,
                                   double sample_rate_hz = kDefaultSampleRateHz,
                                   std::string_view source = "<input>") {
    const std::string where(source);
    if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");

    RawRecording rec;
    rec.subject_id = std::move(subject_id);
    rec.task = task;
    rec.sample_rate_hz = sample_rate_hz;

    auto unquote = [](std::string_view cell) {
        cell = detail::trim(cell);
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
        return cell;
    };

    constexpr std::array<std::string_view, kNumChannels> raw_columns{"RAW_TP9", "RAW_AF7", "RAW_AF8", "RAW_TP10"};
    std::size_t ts_col = 0, elements_col = 0;
    std::array<std::size_t, kNumChannels> raw_col{};
    bool have_header = false;
    std::optional<double> last_ts;
    std::vector<MarkerKind> pending;  // markers waiting for the next retained row
    std::size_t line_no = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (detail::trim(line).empty()) continue;

        const auto cells = split(line, ',');
        if (!have_header) {
            auto find = [&](std::string_view name) -> std::size_t {
                for (std::size_t i = 0; i < cells.size(); ++i) {
                    if (detail::iequals(unquote(cells[i]), name)) return i;
                }
                throw DataError(where + ": missing required column " + std::string(name));
            };
            ts_col = find("TimeStamp");
            for (std::size_t c = 0; c < kNumChannels; ++c) raw_col[c] = find(raw_columns[c]);
            elements_col = find("Elements");
            have_header = true;
            continue;
        }

        auto cell = [&](std::size_t i) { return i < cells.size() ? unquote(cells[i]) : std::string_view{}; };
        const auto at = where + ":" + std::to_string(line_no);

        const auto ts = parse_timestamp(cell(ts_col));
        if (!ts) throw DataError(at + ": unparseable TimeStamp '" + std::string(cell(ts_col)) + "'");
        if (last_ts && *ts < *last_ts) throw DataError(at + ": non-monotonic TimeStamp");
        last_ts = ts;

        std::string elements(cell(elements_col));
        std::transform(elements.begin(), elements.end(), elements.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (elements.find("blink") != std::string::npos) pending.push_back(MarkerKind::Blink);
        if (elements.find("jaw_clench") != std::string::npos) pending.push_back(MarkerKind::JawClench);

        std::array<double, kNumChannels> values{};
        bool complete = true;
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            const auto v = cell(raw_col[c]);
            if (v.empty()) {
                complete = false;
                continue;
            }
            if (!parse_double(v, values[c])) {
                throw DataError(at + ": unparseable numeric cell '" + std::string(v) + "' in " +
                                std::string(raw_columns[c]));
            }
        }
        if (!complete) continue;

        const double t = static_cast<double>(rec.size()) / sample_rate_hz;
        for (auto kind : pending) rec.markers.push_back({t, kind});
        pending.clear();
        for (std::size_t c = 0; c < kNumChannels; ++c) rec.samples[c].push_back(values[c]);
    }

    if (!have_header) throw DataError(where + ": empty document (no header row)");
    if (rec.size() == 0) throw DataError(where + ": no data rows after filtering");
    const double last_t = static_cast<double>(rec.size() - 1) / sample_rate_hz;
    for (auto kind : pending) rec.markers.push_back({last_t, kind});
    return rec;
}

/// Splits a recording into maximal runs of samples lying outside
/// [marker - radius_s, marker + radius_s] for every marker.
inline std::vector<CleanSegment> reject_artifacts(const RawRecording& rec,
                                                  double radius_s = kDefaultExclusionRadiusS) {
    if (!(radius_s >= 0.0)) throw ConfigError("exclusion radius must be >= 0");
    const std::size_t n = rec.size();
    const double fs = rec.sample_rate_hz;
    std::vector<char> excluded(n, 0);

    auto time_of = [fs](std::size_t i) { return static_cast<double>(i) / fs; };
    for (const auto& m : rec.markers) {
        const double lo_t = m.time_s - radius_s;
        const double hi_t = m.time_s + radius_s;
        if (hi_t < 0.0) continue;
        // Estimate the index range, then correct it against the exact time predicate.
        auto lo = static_cast<std::ptrdiff_t>(std::ceil(std::max(lo_t, 0.0) * fs));
        while (lo > 0 && time_of(static_cast<std::size_t>(lo - 1)) >= lo_t) --lo;
        while (lo < static_cast<std::ptrdiff_t>(n) && time_of(static_cast<std::size_t>(lo)) < lo_t) ++lo;
        auto hi = static_cast<std::ptrdiff_t>(std::floor(hi_t * fs));
        hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n) - 1);
        while (hi + 1 < static_cast<std::ptrdiff_t>(n) && time_of(static_cast<std::size_t>(hi + 1)) <= hi_t) ++hi;
        while (hi >= 0 && time_of(static_cast<std::size_t>(hi)) > hi_t) --hi;
        for (auto i = lo; i <= hi; ++i) excluded[static_cast<std::size_t>(i)] = 1;
    }

    std::vector<CleanSegment> segments;
    std::size_t i = 0;
    while (i < n) {
        if (excluded[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !excluded[j]) ++j;
        CleanSegment seg;
        seg.start_index = i;
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            const auto& src = rec.samples[c];
            seg.samples[c].assign(src.begin() + static_cast<std::ptrdiff_t>(i),
                                  src.begin() + static_cast<std::ptrdiff_t>(j));
        }
        segments.push_back(std::move(seg));
        i = j;
    }
    return segments;
}

/// Serializes a recording in the Muse CSV layout read by parse_muse_csv. Markers become
/// marker-only rows ahead of the sample they annotate, as Muse Monitor writes them; sample
/// values use shortest round-trip decimals so a re-parse is lossless.
inline std::string write_muse_csv(const RawRecording& rec) {
    std::string out = "TimeStamp,RAW_TP9,RAW_AF7,RAW_AF8,RAW_TP10,Elements\n";
    const std::size_t n = rec.size();
    const double fs = rec.sample_rate_hz;
    std::size_t next_marker = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string ts = format_double(static_cast<double>(i) / fs);
        while (next_marker < rec.markers.size()) {
            const auto& m = rec.markers[next_marker];
            const auto idx = static_cast<std::size_t>(std::max(0.0, std::ceil(m.time_s * fs - 1e-9)));
            if (std::min(idx, n - 1) != i) break;
            out += ts;
            out += m.kind == MarkerKind::Blink ? ",,,,,/muse/elements/blink\n" : ",,,,,/muse/elements/jaw_clench\n";
            ++next_marker;
        }
        out += ts;
        for (const auto& ch : rec.samples) {
            out += ',';
            out += format_double(ch[i]);
        }
        out += ",\n";
    }
    return out;
}

}  // namespace eegstem
