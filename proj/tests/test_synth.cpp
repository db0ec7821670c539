#include <gtest/gtest.h>

#include <set>

#include "eegstem/pipeline.hpp"
#include "eegstem/synth.hpp"

using namespace eegstem;

namespace {

BandPowers powers_of_first_window(const RawRecording& rec) {
    Window w;
    for (std::size_t c = 0; c < kNumChannels; ++c) w.data[c].assign(rec.samples[c].begin(), rec.samples[c].begin() + 1024);
    return extract_features(w, make_bands(rec.sample_rate_hz), rec.sample_rate_hz);
}

SynthConfig quiet(double seconds = 4.0) {
    SynthConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.duration_s = seconds;
    cfg.seed = 17;
    return cfg;
}

}  // namespace

TEST(Synth, SingleToneGivesQuarterSquaredAmplitude) {
    TaskProfile p;
    p.task = TaskLabel::Connections;
    p.amplitudes[index_of(ChannelId::AF7)][2] = 6.0;
    const auto rec = generate_recording(p, quiet(), 3);
    const auto bp = powers_of_first_window(rec);
    for (auto c : kChannels) {
        for (std::size_t b = 0; b < kNumBands; ++b) {
            if (c == ChannelId::AF7 && b == 2) {
                EXPECT_NEAR(bp.at(c, b), 9.0, 9.0 * 1e-9);
            } else {
                EXPECT_LE(bp.at(c, b), 1e-12);
            }
        }
    }
}

TEST(Synth, EveryBandToneIsExact) {
    TaskProfile p;
    for (auto& ch : p.amplitudes) ch = {1.0, 2.0, 3.0, 4.0, 5.0};
    const auto rec = generate_recording(p, quiet(), 0);
    const auto bp = powers_of_first_window(rec);
    for (auto c : kChannels) {
        for (std::size_t b = 0; b < kNumBands; ++b) {
            const double a = static_cast<double>(b + 1);
            EXPECT_NEAR(bp.at(c, b), a * a / 4.0, a * a * 1e-9);
        }
    }
}

TEST(Synth, ZeroProfileIsSilent) {
    const auto rec = generate_recording(TaskProfile{}, quiet(), 0);
    for (const auto& ch : rec.samples) {
        for (double v : ch) ASSERT_EQ(v, 0.0);
    }
    const auto bp = powers_of_first_window(rec);
    for (const auto& ch : bp.values) {
        for (double v : ch) EXPECT_EQ(v, 0.0);
    }
}

TEST(Synth, DeterministicUnderSeed) {
    const auto profiles = default_profiles();
    SynthConfig cfg;
    cfg.duration_s = 5.0;
    cfg.seed = 99;
    cfg.marker_rate_hz = 0.5;
    const auto a = generate_recording(profiles[2], cfg, 4);
    const auto b = generate_recording(profiles[2], cfg, 4);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.markers, b.markers);
    cfg.seed = 100;
    EXPECT_NE(generate_recording(profiles[2], cfg, 4).samples, a.samples);
}

TEST(Synth, DistinctSubjectsGetDistinctPhases) {
    TaskProfile p;
    p.amplitudes[0][2] = 1.0;
    const auto cfg = quiet();
    std::set<double> first_samples;
    for (std::size_t s = 0; s < 10; ++s) first_samples.insert(generate_recording(p, cfg, s).samples[0][0]);
    EXPECT_EQ(first_samples.size(), 10u);
}

TEST(Synth, MarkersLieOnSampleGrid) {
    SynthConfig cfg;
    cfg.duration_s = 30.0;
    cfg.marker_rate_hz = 1.0;
    const auto rec = generate_recording(default_profiles()[0], cfg, 0);
    ASSERT_GT(rec.markers.size(), 10u);
    for (const auto& m : rec.markers) {
        const double idx = m.time_s * rec.sample_rate_hz;
        EXPECT_EQ(idx, std::round(idx));
        EXPECT_LT(m.time_s, rec.duration_s());
    }
    EXPECT_NO_THROW(rec.validate());
}

TEST(Synth, StudyShapeAndOrder) {
    const auto profiles = default_profiles();
    SynthConfig cfg;
    cfg.n_subjects = 1;
    cfg.duration_s = 4.0;
    auto study = generate_study(profiles, cfg);
    ASSERT_EQ(study.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(study[i].task, kTasks[i]);
        EXPECT_EQ(study[i].subject_id, "S01");
    }
    cfg.n_subjects = 3;
    study = generate_study(profiles, cfg);
    ASSERT_EQ(study.size(), 15u);
    EXPECT_EQ(study[5].subject_id, "S02");
    EXPECT_EQ(study[14].task, TaskLabel::TOL);

    auto dup = profiles;
    dup[1].task = TaskLabel::MSPAN;
    EXPECT_THROW(generate_study(dup, cfg), ConfigError);
    EXPECT_THROW(generate_study(std::span<const TaskProfile>(profiles.data(), 4), cfg), ConfigError);
}

TEST(Synth, DefaultStudyDimensions) {
    const SynthConfig cfg;
    EXPECT_EQ(cfg.samples(), 15360u);
    EXPECT_EQ(window_offsets(cfg.samples(), 1024, 102).size(), 141u);
    EXPECT_EQ(cfg.n_subjects * kNumTasks * 141, 14100u);
}

TEST(Synth, NoiseOnlyPowerMatchesExpectation) {
    SynthConfig cfg;
    cfg.noise_sigma = 5.0;
    cfg.duration_s = 4.0;
    cfg.n_subjects = 150;
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t s = 0; s < cfg.n_subjects; ++s) {
        const auto rec = generate_recording(TaskProfile{}, cfg, s);
        const auto bp = powers_of_first_window(rec);
        for (const auto& ch : bp.values) {
            for (double v : ch) total += v;
            ++windows;
        }
    }
    ASSERT_GE(windows, 500u);
    // 511 of the 1024 bins fall in [0.5 Hz, Nyquist]; each carries sigma^2 / N on average.
    const double expected = 25.0 * 511.0 / 1024.0;
    EXPECT_NEAR(total / static_cast<double>(windows), expected, 0.1 * expected);
}

TEST(Synth, ProfilesValidateAndRankAsDesigned) {
    const auto bands = make_bands(256.0);
    for (const auto& p : default_profiles()) EXPECT_NO_THROW(p.validate(256.0, 1024, bands));
    const auto profiles = default_profiles();
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        for (std::size_t b = 0; b < kNumBands; ++b) {
            for (auto t : kTasks) {
                const double a = profiles[index_of(t)].amplitudes[c][b];
                EXPECT_GE(profiles[index_of(TaskLabel::BCST)].amplitudes[c][b], a);
                EXPECT_LE(profiles[index_of(TaskLabel::MathProc)].amplitudes[c][b], a);
            }
        }
    }
    TaskProfile off;
    off.tone_hz[2] = 10.1;
    EXPECT_THROW(off.validate(256.0, 1024, bands), ConfigError);
    off.tone_hz[2] = 14.0;
    EXPECT_THROW(off.validate(256.0, 1024, bands), ConfigError);
}

TEST(Synth, PlantedProfilesSilenceOtherChannels) {
    for (const auto& p : planted_channel_profiles(ChannelId::AF8)) {
        for (auto c : kChannels) {
            const auto& row = p.amplitudes[index_of(c)];
            const double sum = row[0] + row[1] + row[2] + row[3] + row[4];
            if (c == ChannelId::AF8) {
                EXPECT_GT(sum, 0.0);
            } else {
                EXPECT_EQ(sum, 0.0);
            }
        }
    }
}

TEST(Synth, MuseCsvRoundTripOfGeneratedRecording) {
    SynthConfig cfg;
    cfg.duration_s = 6.0;
    cfg.marker_rate_hz = 0.7;
    const auto rec = generate_recording(default_profiles()[3], cfg, 2);
    const auto back = parse_muse_csv(write_muse_csv(rec), rec.subject_id, rec.task);
    EXPECT_EQ(back.samples, rec.samples);
    EXPECT_EQ(back.markers, rec.markers);
}
