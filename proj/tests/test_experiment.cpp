#include <gtest/gtest.h>

#include <sstream>

#include "eegstem/experiment.hpp"
#include "eegstem/pipeline.hpp"
#include "eegstem/synth.hpp"
#include "support.hpp"

using namespace eegstem;

namespace {

Dataset small_study(const std::array<TaskProfile, kNumTasks>& profiles, double sigma, std::size_t subjects = 2,
                    double seconds = 20.0) {
    SynthConfig cfg;
    cfg.noise_sigma = sigma;
    cfg.n_subjects = subjects;
    cfg.duration_s = seconds;
    cfg.seed = 7;
    const auto recs = generate_study(profiles, cfg);
    return extract_dataset(recs, FeatureOptions{});
}

TrainConfig quick(std::size_t trees = 30) {
    TrainConfig cfg;
    cfg.n_trees = trees;
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST(RunSweep, SingleCell) {
    const auto d = support::blobs(100, 4, 1.0, 61);
    const auto out = run_sweep(d, {ClassifierKind::RandomForest}, {2}, quick(10));
    ASSERT_EQ(out.results.size(), 1u);
    EXPECT_TRUE(out.skipped.empty());
    EXPECT_EQ(out.results[0].k, 2u);
    EXPECT_EQ(out.results[0].confusion.total(), 50u);
    EXPECT_EQ(out.results[0].channels.size(), 4u);
}

TEST(RunSweep, OrderingAndSkips) {
    const auto d = support::blobs(60, 3, 1.0, 62);
    std::vector<std::size_t> seen_k;
    const auto out = run_sweep(d, {ClassifierKind::RandomForest, ClassifierKind::GBoost, ClassifierKind::Bagging},
                               {2, 100, 8, 4, 8}, quick(5),
                               [&](const ExperimentResult& r, const EnsembleModel&) { seen_k.push_back(r.k); });
    ASSERT_EQ(out.results.size(), 9u);
    ASSERT_EQ(out.skipped.size(), 3u);
    EXPECT_EQ(out.skipped[0].k, 100u);
    const std::vector<std::string> names{"Bagging Classifier", "Random Forest", "XGBoost Classifier"};
    for (std::size_t i = 0; i < out.results.size(); ++i) {
        EXPECT_EQ(out.results[i].k, std::vector<std::size_t>({8, 4, 2})[i / 3]);
        EXPECT_EQ(display_name(out.results[i].classifier), names[i % 3]);
    }
    EXPECT_EQ(seen_k.size(), 9u);
}

TEST(RunSweep, SingleClassTrainingSetIsSkippedForBoosting) {
    // With k = 5 every training row has the same label (i mod 5 == 0).
    const auto d = support::blobs(50, 2, 1.0, 63);
    const auto out = run_sweep(d, {ClassifierKind::GBoost, ClassifierKind::RandomForest}, {5}, quick(5));
    ASSERT_EQ(out.results.size(), 1u);
    EXPECT_EQ(out.results[0].classifier, ClassifierKind::RandomForest);
    ASSERT_EQ(out.skipped.size(), 1u);
    EXPECT_EQ(out.skipped[0].classifier, ClassifierKind::GBoost);
}

TEST(RunSweep, DeterministicTable) {
    const auto d = support::blobs(200, 4, 0.5, 64);
    auto render = [&](std::size_t workers) {
        auto cfg = quick(10);
        cfg.workers = workers;
        const auto out = run_sweep(d, {kClassifiers.begin(), kClassifiers.end()}, {2, 4, 16}, cfg);
        std::ostringstream s;
        write_sweep_csv(s, out.results);
        write_per_label_csv(s, out.results);
        return s.str();
    };
    const auto a = render(1);
    EXPECT_EQ(a, render(1));
    EXPECT_EQ(a, render(3));
}

TEST(RunSweep, SmallerIntervalHelpsOnSyntheticStudy) {
    const auto d = small_study(default_profiles(), 20.0, 3, 30.0);
    const auto out = run_sweep(d, {ClassifierKind::RandomForest}, {2, 256}, quick());
    ASSERT_EQ(out.results.size(), 2u);
    EXPECT_GE(out.results[1].metrics.accuracy, out.results[0].metrics.accuracy);
}

TEST(RunSweep, SeparatedProfilesAreNearlyPerfect) {
    const auto d = small_study(separated_profiles(), 2.0);
    const auto out = run_sweep(d, {ClassifierKind::RandomForest}, {2}, quick());
    EXPECT_GE(out.results.at(0).metrics.accuracy, 0.99);
}

TEST(ChannelStudy, PlantedChannelRanksFirst) {
    const auto d = small_study(planted_channel_profiles(ChannelId::AF8), 20.0, 2, 30.0);
    const auto results = run_channel_study(d, quick());
    ASSERT_EQ(results.size(), 5u);
    EXPECT_EQ(channel_set_name(results[4].channels), "TP9+AF7+AF8+TP10");
    double best_single = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        ASSERT_EQ(results[i].channels.size(), 1u);
        EXPECT_EQ(results[i].channels[0], kChannels[i]);
        EXPECT_EQ(results[i].k, 2u);
        best_single = std::max(best_single, results[i].metrics.accuracy);
    }
    EXPECT_EQ(results[index_of(ChannelId::AF8)].metrics.accuracy, best_single);
    EXPECT_GE(results[4].metrics.accuracy, best_single - 0.01);
}

TEST(ChannelStudy, RequiresFullSchema) {
    auto d = support::blobs(20, 2, 1.0, 65);
    EXPECT_THROW(run_channel_study(d, quick(2)), DataError);
}

TEST(Psd, KnownValuesAndOmittedTasks) {
    Dataset d;
    d.schema = {"tp9_d", "af7_d", "tp9_g", "af7_g"};
    d.rows = {{{1, 3, 5, 7}, TaskLabel::MSPAN, "S", 0}, {{3, 5, 7, 9}, TaskLabel::MSPAN, "S", 1},
              {{2, 2, 2, 2}, TaskLabel::TOL, "S", 2}};
    const auto s = psd_summary(d);
    ASSERT_EQ(s.entries.size(), 8u);
    EXPECT_EQ(s.entries[0].task, TaskLabel::MSPAN);
    EXPECT_EQ(s.entries[0].channel, ChannelId::TP9);
    EXPECT_EQ(s.entries[0].band, "d");
    EXPECT_DOUBLE_EQ(s.entries[0].mean, 2.0);
    EXPECT_DOUBLE_EQ(s.entries[0].std, 1.0);
    EXPECT_DOUBLE_EQ(s.entries[4].mean, 2.0);
    EXPECT_DOUBLE_EQ(s.entries[4].std, 0.0);
    ASSERT_EQ(s.cross_channel.size(), 4u);
    EXPECT_EQ(s.cross_channel[0].band, "d");
    EXPECT_DOUBLE_EQ(s.cross_channel[0].mean, 3.0);
    EXPECT_DOUBLE_EQ(s.cross_channel[1].mean, 7.0);
    EXPECT_EQ(s.omitted, (std::vector<TaskLabel>{TaskLabel::MathProc, TaskLabel::BCST, TaskLabel::Connections}));

    std::ostringstream a, b;
    write_psd_channel_csv(a, s);
    write_psd_band_csv(b, s);
    EXPECT_EQ(a.str().substr(0, a.str().find('\n', 30) + 1), "task,channel,band,mean,std\nMSPAN,TP9,d,2,1\n");
    EXPECT_EQ(b.str().substr(0, b.str().find('\n', 20) + 1), "task,band,mean\nMSPAN,d,3\n");
}

TEST(Psd, ScalingOneTaskByTwoQuadruplesItsMeans) {
    SynthConfig cfg;
    cfg.n_subjects = 1;
    cfg.duration_s = 8.0;
    auto recs = generate_study(default_profiles(), cfg);
    const auto base = psd_summary(extract_dataset(recs, FeatureOptions{}));
    for (auto& ch : recs[index_of(TaskLabel::TOL)].samples) {
        for (auto& v : ch) v *= 2.0;
    }
    const auto scaled = psd_summary(extract_dataset(recs, FeatureOptions{}));
    ASSERT_EQ(base.entries.size(), scaled.entries.size());
    for (std::size_t i = 0; i < base.entries.size(); ++i) {
        const double factor = base.entries[i].task == TaskLabel::TOL ? 4.0 : 1.0;
        EXPECT_NEAR(scaled.entries[i].mean, factor * base.entries[i].mean, 1e-9 * scaled.entries[i].mean);
    }
}

TEST(Psd, LoudestTaskHasHighestMeanInEveryBand) {
    const auto s = psd_summary(small_study(default_profiles(), 4.0, 2, 10.0));
    for (std::size_t b = 0; b < kNumBands; ++b) {
        double best = -1.0;
        TaskLabel best_task = TaskLabel::MSPAN;
        for (const auto& e : s.cross_channel) {
            if (e.band != s.cross_channel[b].band) continue;
            if (e.mean > best) {
                best = e.mean;
                best_task = e.task;
            }
        }
        EXPECT_EQ(best_task, TaskLabel::BCST) << s.cross_channel[b].band;
    }
}

TEST(Reports, SweepRowFormatting) {
    MetricsReport m;
    m.accuracy = 0.9107;
    m.macro_f1 = 0.9105;
    m.macro_precision = 0.9109;
    m.macro_recall = 0.9101;
    EXPECT_EQ(sweep_row(2, ClassifierKind::RandomForest, m), "2,Random Forest,91.07%,91.05%,91.09%,91.01%");

    ExperimentResult r;
    r.metrics = m;
    std::ostringstream s;
    write_sweep_csv(s, std::span<const ExperimentResult>(&r, 1));
    EXPECT_EQ(s.str(), "interval,classifier,accuracy,f1,precision,recall\n2,Random Forest,91.07%,91.05%,91.09%,91.01%\n");
}

TEST(Reports, PerLabelAndChannelLayouts) {
    const auto d = support::blobs(60, 2, 3.0, 66);
    const auto out = run_sweep(d, {ClassifierKind::RandomForest}, {2}, quick(5));
    std::ostringstream pl, cs;
    write_per_label_csv(pl, out.results);
    write_channel_study_csv(cs, out.results);
    std::istringstream lines(pl.str());
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "interval,classifier,channel_set,label,accuracy,precision,recall,f1");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        EXPECT_EQ(line.rfind("2,Random Forest,TP9+AF7+AF8+TP10,", 0), 0u) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 5u);
    EXPECT_EQ(cs.str().substr(0, cs.str().find('\n')), "interval,classifier,channel_set,accuracy,f1,precision,recall");
}
