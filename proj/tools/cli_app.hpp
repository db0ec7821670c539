#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <glob.h>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eegstem/eegstem.hpp"
#include "run_config.hpp"

namespace eegstem::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2 };

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    if (::access(dir.c_str(), W_OK) != 0) throw ConfigError("output directory " + dir.string() + " is not writable");
}

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void write_atomic(const fs::path& path, std::string_view content) {
    const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("cannot write " + path.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot write " + path.string() + ": " + ec.message());
}

/// Files, directories (their *.csv, sorted) and glob patterns, in argument order.
inline std::vector<fs::path> expand_inputs(const std::vector<std::string>& specs) {
    std::vector<fs::path> out;
    for (const auto& spec : specs) {
        if (spec.find_first_of("*?[") != std::string::npos) {
            glob_t g{};
            const int rc = ::glob(spec.c_str(), 0, nullptr, &g);
            if (rc == 0) {
                for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
            }
            ::globfree(&g);
            if (rc != 0) throw ConfigError("no input matches '" + spec + "'");
        } else if (fs::is_directory(spec)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(spec)) {
                if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(spec)) {
            out.emplace_back(spec);
        } else {
            throw ConfigError("input not found: " + spec);
        }
    }
    return out;
}

/// Collects what a command did; written atomically as `<command>.manifest.json` at the end.
class Manifest {
public:
    Manifest(std::string command, const RunConfig& cfg) : command_(std::move(command)), config_(to_json(cfg)) {
        started_ = utc_now();
    }

    void add_input(const fs::path& path, std::string_view bytes) {
        inputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(bytes)}});
    }
    void add_output(const fs::path& path) { outputs_.push_back(path.filename().string()); }

    template <typename Fn>
    auto stage(const std::string& name, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            Manifest* self;
            std::string name;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                self->stages_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        } record{this, name, t0};
        return fn();
    }

    void write(const fs::path& dir) const {
        nlohmann::ordered_json j;
        j["command"] = command_;
        j["versions"] = {{"eegstem", kToolVersion}, {"model_format", kModelFormatVersion}};
        j["config"] = config_;
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        nlohmann::ordered_json timing;
        timing["started_utc"] = started_;
        timing["finished_utc"] = utc_now();
        timing["stage_seconds"] = stages_;
        j["timing"] = timing;
        write_atomic(dir / (command_ + ".manifest.json"), j.dump(2) + "\n");
    }

private:
    std::string command_;
    nlohmann::ordered_json config_;
    nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
    std::vector<std::string> outputs_;
    std::map<std::string, double> stages_;
    std::string started_;
};

inline void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

template <typename Writer>
std::string render(Writer&& writer) {
    std::ostringstream ss;
    writer(ss);
    return ss.str();
}

inline Dataset load_features(const fs::path& path, Manifest& manifest) {
    const auto bytes = read_file(path);
    manifest.add_input(path, bytes);
    std::istringstream in(bytes);
    auto d = read_feature_csv(in, path.string());
    d.validate();
    return d;
}

inline std::array<TaskProfile, kNumTasks> profiles_for(const std::string& name) {
    if (name == "default") return default_profiles();
    if (name == "separated") return separated_profiles();
    const std::string prefix = "planted:";
    if (name.rfind(prefix, 0) == 0) {
        if (auto c = parse_channel(name.substr(prefix.size()))) return planted_channel_profiles(*c);
    }
    throw ConfigError("unknown profile '" + name + "' (default, separated, planted:<channel>)");
}

inline int cmd_synth(const RunConfig& cfg) {
    const fs::path out(cfg.output_dir);
    ensure_dir(out);
    Manifest manifest("synth", cfg);
    SynthConfig sc;
    sc.sample_rate_hz = cfg.sample_rate_hz;
    sc.duration_s = cfg.duration_s;
    sc.noise_sigma = cfg.noise_sigma;
    sc.n_subjects = cfg.subjects;
    sc.marker_rate_hz = cfg.marker_rate_hz;
    sc.seed = cfg.seed;
    const WindowConfig wc{cfg.window_seconds, cfg.overlap_fraction};
    sc.validate(wc.window_len(sc.sample_rate_hz));
    const auto profiles = profiles_for(cfg.profile);
    const auto bands = make_bands(sc.sample_rate_hz, cfg.band_edges_hz, cfg.gamma_cap_hz);
    for (const auto& p : profiles) p.validate(sc.sample_rate_hz, wc.window_len(sc.sample_rate_hz), bands);

    const auto recordings = manifest.stage("generate", [&] { return generate_study(profiles, sc); });
    std::vector<std::string> texts(recordings.size());
    manifest.stage("serialize", [&] {
        parallel_for(recordings.size(), cfg.workers(), [&](std::size_t i) { texts[i] = write_muse_csv(recordings[i]); });
        return 0;
    });
    manifest.stage("write", [&] {
        for (std::size_t i = 0; i < recordings.size(); ++i) {
            const auto name = recordings[i].subject_id + "_" + std::string(task_name(recordings[i].task)) + ".csv";
            write_atomic(out / name, texts[i]);
            manifest.add_output(out / name);
        }
        return 0;
    });
    manifest.write(out);
    std::cout << "wrote " << recordings.size() << " recordings to " << out.string() << '\n';
    return kOk;
}

inline int cmd_features(const RunConfig& cfg) {
    if (cfg.inputs.empty()) throw ConfigError("features: no input files");
    const fs::path out(cfg.output_dir);
    ensure_dir(out);
    Manifest manifest("features", cfg);
    const auto paths = expand_inputs(cfg.inputs);
    if (paths.empty()) throw ConfigError("features: inputs matched no files");

    std::vector<std::string> texts;
    for (const auto& p : paths) {
        texts.push_back(read_file(p));
        manifest.add_input(p, texts.back());
    }
    std::vector<RawRecording> recordings(paths.size());
    manifest.stage("ingest", [&] {
        parallel_for(paths.size(), cfg.workers(), [&](std::size_t i) {
            RecordingLabels labels;
            if (!cfg.subject || !cfg.task) labels = labels_from_filename(paths[i]);
            if (cfg.subject) labels.subject_id = *cfg.subject;
            if (cfg.task) labels.task = *parse_task(*cfg.task);
            recordings[i] =
                parse_muse_csv(texts[i], labels.subject_id, labels.task, cfg.sample_rate_hz, paths[i].string());
        });
        return 0;
    });
    const auto d = manifest.stage("extract", [&] { return extract_dataset(recordings, cfg.feature_options()); });
    if (d.size() == 0) warn("no clean window survived artifact rejection; feature file has a header only");

    const auto path = out / "features.csv";
    write_atomic(path, render([&](std::ostream& os) { write_feature_csv(os, d); }));
    manifest.add_output(path);
    manifest.write(out);
    std::cout << "wrote " << d.size() << " windows to " << path.string() << '\n';
    return kOk;
}

inline Dataset prepare_for_training(const RunConfig& cfg, Dataset d) {
    if (d.size() == 0) throw DataError("feature file has no rows");
    const auto channels = cfg.channel_ids();
    if (channels.size() != kNumChannels || !std::is_sorted(channels.begin(), channels.end())) {
        d = select_channels(d, channels);
    }
    if (cfg.zscore_per_subject) d = zscore_per_subject(d);
    return d;
}

inline int cmd_sweep(const RunConfig& cfg) {
    if (cfg.inputs.size() != 1) throw ConfigError("sweep: expected exactly one feature file");
    const fs::path out(cfg.output_dir);
    ensure_dir(out);
    Manifest manifest("sweep", cfg);
    auto d = prepare_for_training(cfg, load_features(cfg.inputs.front(), manifest));

    for (auto k : cfg.k_values) {
        if (k > d.size()) {
            const auto msg = "interval " + std::to_string(k) + " exceeds dataset size " + std::to_string(d.size());
            if (cfg.strict) throw ConfigError(msg);
            warn(msg + "; skipped");
        }
    }
    if (cfg.write_models) ensure_dir(out / "models");
    if (cfg.export_splits) {
        ensure_dir(out / "splits");
        for (auto k : cfg.k_values) {
            if (k > d.size()) continue;
            const auto path = out / "splits" / ("split_k" + std::to_string(k) + ".json");
            write_atomic(path, to_json(interval_split(d.size(), k)).dump() + "\n");
        }
    }
    const ModelSink sink = [&](const ExperimentResult& r, const EnsembleModel& m) {
        if (!cfg.write_models) return;
        const auto path =
            out / "models" / (std::string(kind_id(r.classifier)) + "_k" + std::to_string(r.k) + ".json");
        write_atomic(path, serialize(m));
    };
    const auto outcome = manifest.stage(
        "sweep", [&] { return run_sweep(d, cfg.classifier_kinds(), cfg.k_values, cfg.train_config(), sink); });
    for (const auto& s : outcome.skipped) {
        if (s.k <= d.size()) warn(std::string(display_name(s.classifier)) + " at k=" + std::to_string(s.k) + ": " + s.reason);
    }

    const auto sweep_path = out / "sweep.csv";
    write_atomic(sweep_path, render([&](std::ostream& os) { write_sweep_csv(os, outcome.results); }));
    const auto label_path = out / "per_label.csv";
    write_atomic(label_path, render([&](std::ostream& os) { write_per_label_csv(os, outcome.results); }));
    manifest.add_output(sweep_path);
    manifest.add_output(label_path);
    manifest.write(out);
    std::cout << render([&](std::ostream& os) { write_sweep_csv(os, outcome.results); });
    return kOk;
}

inline int cmd_channel_study(const RunConfig& cfg) {
    if (cfg.inputs.size() != 1) throw ConfigError("channel-study: expected exactly one feature file");
    const fs::path out(cfg.output_dir);
    ensure_dir(out);
    Manifest manifest("channel-study", cfg);
    auto d = load_features(cfg.inputs.front(), manifest);
    if (d.size() == 0) throw DataError("feature file has no rows");
    if (cfg.zscore_per_subject) d = zscore_per_subject(d);
    const auto results = manifest.stage("study", [&] { return run_channel_study(d, cfg.train_config()); });

    const auto study_path = out / "channel_study.csv";
    write_atomic(study_path, render([&](std::ostream& os) { write_channel_study_csv(os, results); }));
    const auto label_path = out / "channel_per_label.csv";
    write_atomic(label_path, render([&](std::ostream& os) { write_per_label_csv(os, results); }));
    manifest.add_output(study_path);
    manifest.add_output(label_path);
    manifest.write(out);
    std::cout << render([&](std::ostream& os) { write_channel_study_csv(os, results); });
    return kOk;
}

inline int cmd_psd_summary(const RunConfig& cfg) {
    if (cfg.inputs.size() != 1) throw ConfigError("psd-summary: expected exactly one feature file");
    const fs::path out(cfg.output_dir);
    ensure_dir(out);
    Manifest manifest("psd-summary", cfg);
    const auto d = load_features(cfg.inputs.front(), manifest);
    const auto summary = manifest.stage("summarize", [&] { return psd_summary(d); });
    for (auto t : summary.omitted) warn("task " + std::string(task_name(t)) + " has no windows; omitted");

    const auto channel_path = out / "psd_by_channel.csv";
    write_atomic(channel_path, render([&](std::ostream& os) { write_psd_channel_csv(os, summary); }));
    const auto band_path = out / "psd_by_task.csv";
    write_atomic(band_path, render([&](std::ostream& os) { write_psd_band_csv(os, summary); }));
    manifest.add_output(channel_path);
    manifest.add_output(band_path);
    manifest.write(out);
    return kOk;
}

/// Concatenates report CSVs that share a header.
inline int cmd_report(const RunConfig& cfg, const std::string& name) {
    if (cfg.inputs.empty()) throw ConfigError("report: no input CSVs");
    const fs::path out(cfg.output_dir);
    ensure_dir(out);
    Manifest manifest("report", cfg);
    std::string header, merged;
    for (const auto& p : expand_inputs(cfg.inputs)) {
        const auto text = read_file(p);
        manifest.add_input(p, text);
        std::istringstream in(text);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (first) {
                first = false;
                if (header.empty()) {
                    header = line;
                } else if (line != header) {
                    throw DataError(p.string() + ": header differs from the first input's header");
                }
                continue;
            }
            if (!line.empty()) merged += line + "\n";
        }
    }
    if (header.empty()) throw DataError("report: inputs are empty");
    const auto path = out / name;
    write_atomic(path, header + "\n" + merged);
    manifest.add_output(path);
    manifest.write(out);
    return kOk;
}

/// Command-line entry point; returns the process exit code.
inline int run(int argc, char** argv) {
    CLI::App app{"EEG band-power classification toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    struct Flags {
        std::string config;
        std::uint64_t seed = 0;
        std::string out;
        double fs = 0.0;
        std::vector<std::size_t> k;
        std::vector<std::string> classifier;
        std::size_t trees = 0;
        std::vector<std::string> channels;
        bool strict = false;
        std::size_t threads = 0;
        std::vector<std::string> inputs;
        // features
        double window = 0.0, overlap = 0.0, radius = 0.0, gamma_cap = 0.0;
        std::string subject, task;
        // sweep
        bool boost_full_rounds = false, hard_vote = false, zscore = false, no_models = false, export_splits = false;
        // synth
        std::size_t subjects = 0;
        double duration = 0.0, noise = 0.0, marker_rate = 0.0;
        std::string profile;
        // report
        std::string name = "report.csv";
    } f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config file (flags override it)");
        sub->add_option("--seed", f.seed, "Random seed");
        sub->add_option("--out", f.out, "Output directory");
        sub->add_option("--fs", f.fs, "Sample rate in Hz");
        sub->add_option("--k", f.k, "Interval sizes, comma separated")->delimiter(',');
        sub->add_option("--classifier", f.classifier, "bagging,random_forest,gboost")->delimiter(',');
        sub->add_option("--trees", f.trees, "Trees per ensemble");
        sub->add_option("--channels", f.channels, "Channel subset, e.g. AF7,AF8")->delimiter(',');
        sub->add_flag("--strict", f.strict, "Fail instead of skipping oversized intervals");
        sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    };

    auto* synth = app.add_subcommand("synth", "Write a synthetic study as Muse CSV files");
    common(synth);
    synth->add_option("--subjects", f.subjects, "Number of subjects");
    synth->add_option("--duration", f.duration, "Seconds per recording");
    synth->add_option("--noise", f.noise, "Gaussian noise sigma in microvolts");
    synth->add_option("--marker-rate", f.marker_rate, "Synthetic artifact markers per second");
    synth->add_option("--profile", f.profile, "default | separated | planted:<channel>");

    auto* features = app.add_subcommand("features", "Muse CSV recordings to a feature CSV");
    common(features);
    features->add_option("inputs", f.inputs, "CSV files, directories or globs");
    features->add_option("--window", f.window, "Window length in seconds");
    features->add_option("--overlap", f.overlap, "Window overlap fraction");
    features->add_option("--radius", f.radius, "Artifact exclusion radius in seconds");
    features->add_option("--gamma-cap", f.gamma_cap, "Upper gamma edge in Hz");
    features->add_option("--subject", f.subject, "Subject id for all inputs");
    features->add_option("--task", f.task, "Task label for all inputs");

    auto add_training = [&](CLI::App* sub) {
        sub->add_flag("--boost-full-rounds", f.boost_full_rounds,
                                                   "Boost n_trees rounds instead of n_trees trees in total");
        sub->add_flag("--hard-vote", f.hard_vote, "Forests vote by per-tree argmax");
        sub->add_flag("--zscore", f.zscore, "Z-score features per subject");
    };
    auto* sweep = app.add_subcommand("sweep", "Interval sweep over the classifiers");
    common(sweep);
    add_training(sweep);
    sweep->add_option("features", f.inputs, "Feature CSV")->required();
    sweep->add_flag("--no-models", f.no_models, "Do not write model files");
    sweep->add_flag("--export-splits", f.export_splits, "Write split plans as JSON");

    auto* channel = app.add_subcommand("channel-study", "Single-channel random forest ablation at k=2");
    common(channel);
    add_training(channel);
    channel->add_option("features", f.inputs, "Feature CSV")->required();

    auto* psd = app.add_subcommand("psd-summary", "Band-power means per task, channel and band");
    common(psd);
    psd->add_option("features", f.inputs, "Feature CSV")->required();

    auto* report = app.add_subcommand("report", "Merge report CSVs with identical headers");
    common(report);
    report->add_option("inputs", f.inputs, "CSV files")->required();
    report->add_option("--name", f.name, "Merged file name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    auto has = [&](const std::string& flag) {
        for (auto* sub : app.get_subcommands()) {
            if (const auto* opt = sub->get_option_no_throw(flag); opt != nullptr && opt->count() > 0) return true;
        }
        return false;
    };

    try {
        RunConfig cfg;
        if (has("--config")) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(read_file(f.config));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(f.config + ": " + e.what());
            }
            apply_json(cfg, j);
        }
        if (has("--seed")) cfg.seed = f.seed;
        if (has("--out")) cfg.output_dir = f.out;
        if (has("--fs")) cfg.sample_rate_hz = f.fs;
        if (has("--k")) cfg.k_values = f.k;
        if (has("--classifier")) cfg.classifiers = f.classifier;
        if (has("--trees")) cfg.trees = f.trees;
        if (has("--channels")) cfg.channels = f.channels;
        if (has("--strict")) cfg.strict = true;
        if (has("--threads")) cfg.threads = f.threads;
        if (!f.inputs.empty()) cfg.inputs = f.inputs;
        if (has("--window")) cfg.window_seconds = f.window;
        if (has("--overlap")) cfg.overlap_fraction = f.overlap;
        if (has("--radius")) cfg.exclusion_radius_s = f.radius;
        if (has("--gamma-cap")) cfg.gamma_cap_hz = f.gamma_cap;
        if (has("--subject")) cfg.subject = f.subject;
        if (has("--task")) cfg.task = f.task;
        if (has("--boost-full-rounds")) cfg.boost_full_rounds = true;
        if (has("--hard-vote")) cfg.hard_vote = true;
        if (has("--zscore")) cfg.zscore_per_subject = true;
        if (has("--no-models")) cfg.write_models = false;
        if (has("--export-splits")) cfg.export_splits = true;
        if (has("--subjects")) cfg.subjects = f.subjects;
        if (has("--duration")) cfg.duration_s = f.duration;
        if (has("--noise")) cfg.noise_sigma = f.noise;
        if (has("--marker-rate")) cfg.marker_rate_hz = f.marker_rate;
        if (has("--profile")) cfg.profile = f.profile;
        cfg.validate();

        if (synth->parsed()) return cmd_synth(cfg);
        if (features->parsed()) return cmd_features(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (channel->parsed()) return cmd_channel_study(cfg);
        if (psd->parsed()) return cmd_psd_summary(cfg);
        if (report->parsed()) return cmd_report(cfg, f.name);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace eegstem::cli
