#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eegstem {

/// Malformed or unusable input data (bad CSV, wrong schema, empty dataset).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration (bad flag, unknown key, out-of-range parameter).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Muse headset electrodes in canonical order.
enum class ChannelId : std::uint8_t { TP9, AF7, AF8, TP10 };

inline constexpr std::size_t kNumChannels = 4;
inline constexpr std::array<ChannelId, kNumChannels> kChannels{ChannelId::TP9, ChannelId::AF7, ChannelId::AF8,
                                                               ChannelId::TP10};

/// Cognitive task classes in canonical order; the order drives tie-breaking and report rows.
enum class TaskLabel : std::uint8_t { MSPAN, MathProc, BCST, Connections, TOL };

inline constexpr std::size_t kNumTasks = 5;
inline constexpr std::array<TaskLabel, kNumTasks> kTasks{TaskLabel::MSPAN, TaskLabel::MathProc, TaskLabel::BCST,
                                                         TaskLabel::Connections, TaskLabel::TOL};

constexpr std::size_t index_of(ChannelId c) noexcept { return static_cast<std::size_t>(c); }
constexpr std::size_t index_of(TaskLabel t) noexcept { return static_cast<std::size_t>(t); }

constexpr std::string_view channel_name(ChannelId c) noexcept {
    constexpr std::array<std::string_view, kNumChannels> names{"TP9", "AF7", "AF8", "TP10"};
    return names[index_of(c)];
}

/// Lower-case column prefix, e.g. "af8".
constexpr std::string_view channel_prefix(ChannelId c) noexcept {
    constexpr std::array<std::string_view, kNumChannels> names{"tp9", "af7", "af8", "tp10"};
    return names[index_of(c)];
}

constexpr std::string_view task_name(TaskLabel t) noexcept {
    constexpr std::array<std::string_view, kNumTasks> names{"MSPAN", "MathProc", "BCST", "Connections", "TOL"};
    return names[index_of(t)];
}

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// Case-insensitive channel lookup ("af8", "AF8").
inline std::optional<ChannelId> parse_channel(std::string_view s) noexcept {
    s = detail::trim(s);
    for (auto c : kChannels) {
        if (detail::iequals(s, channel_name(c))) return c;
    }
    return std::nullopt;
}

/// Exact-name task lookup, falling back to a case-insensitive match.
inline std::optional<TaskLabel> parse_task(std::string_view s) noexcept {
    s = detail::trim(s);
    for (auto t : kTasks) {
        if (s == task_name(t)) return t;
    }
    for (auto t : kTasks) {
        if (detail::iequals(s, task_name(t))) return t;
    }
    return std::nullopt;
}

}  // namespace eegstem
