#include <glob.h>

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopforge/dataset.hpp"
#include "loopforge/error.hpp"
#include "loopforge/harness.hpp"
#include "loopforge/io.hpp"
#include "loopforge/pipeline.hpp"
#include "loopforge/plot.hpp"

namespace fs = std::filesystem;
using namespace loopforge;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("LOOPFORGE_SEED");
    if (!raw || !*raw) return std::nullopt;
    const std::string text(raw);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw UsageError("LOOPFORGE_SEED must be an unsigned integer, got '" + text + "'");
    }
    return value;
}

/// flag > LOOPFORGE_SEED > config
io::RunConfig load_config(const std::string& path, const std::optional<std::uint64_t>& flag_seed) {
    io::RunConfig cfg = io::read_run_config(path);
    std::optional<std::uint64_t> seed = flag_seed;
    if (!seed) seed = env_seed();
    if (seed) {
        cfg.seed = *seed;
        cfg.pipeline.seed = *seed;
        cfg.world.seed = *seed;
    }
    return cfg;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<std::string> out;
    if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) {
        throw Error(ErrorCode::IoError, "cannot expand '" + pattern + "'");
    }
    return out;
}

struct SimulateArgs {
    std::string config, out;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
    const io::RunConfig cfg = load_config(a.config, a.seed);
    const auto dataset = harness::generate(cfg.world);
    write_dataset(a.out, dataset, cfg);
    std::cerr << "simulate: " << dataset.size() << " keyframes, " << dataset.revisits.size()
              << " revisits, config " << io::run_config_hash(cfg) << " -> " << a.out << "\n";
    return 0;
}

struct VocabArgs {
    std::string descriptors, out;
    std::size_t k = 0;
    std::uint64_t seed = 0;
};

int cmd_vocab_build(const VocabArgs& a) {
    const auto files = expand_glob(a.descriptors);
    if (files.empty()) {
        throw Error(ErrorCode::IoError, "no descriptor files match '" + a.descriptors + "'");
    }
    std::vector<LocalDescriptorSet> training;
    for (const auto& f : files) {
        const auto lcdb = io::read_lcdb(f);
        if (lcdb.kind != io::DescriptorKind::Local) {
            throw Error(ErrorCode::DimMismatch, f + " does not hold local descriptors");
        }
        for (const auto& frame : lcdb.frames) training.push_back(io::to_local_set(frame));
    }
    const Vocabulary vocab = build_vocabulary(training, a.k, a.seed);
    io::write_text(a.out, io::vocabulary_json(vocab));
    std::cerr << "vocab-build: " << files.size() << " files, " << training.size() << " frames, k=" << vocab.k()
              << " -> " << a.out << "\n";
    return 0;
}

struct DatasetArgs {
    std::string dataset, config;
    std::optional<std::uint64_t> seed;
};

int cmd_detect(const DatasetArgs& a, const std::string& out) {
    const io::RunConfig cfg = load_config(a.config, a.seed);
    const LoadedDataset data = load_dataset(a.dataset);
    const Vocabulary vocab = vocabulary_for(cfg.pipeline, data.locals);
    const auto candidates = detect(data.keyframes, *data.providers, vocab, cfg.pipeline);
    io::write_text(out, io::candidates_json(config_hash(cfg.pipeline), candidates));
    std::cerr << "detect: " << data.keyframes.size() << " keyframes, " << candidates.size() << " candidates -> "
              << out << "\n";
    return 0;
}

int cmd_close(const DatasetArgs& a, const std::string& out_traj, const std::string& out_events) {
    const io::RunConfig cfg = load_config(a.config, a.seed);
    const LoadedDataset data = load_dataset(a.dataset);
    const Vocabulary vocab = vocabulary_for(cfg.pipeline, data.locals);
    const RunResult result = run(data.keyframes, data.providers->providers(), vocab, cfg.pipeline);
    io::write_tum(out_traj, result.trajectory);
    io::write_text(out_events, io::event_log_json(result.log));
    std::size_t rejected = 0;
    for (const auto& e : result.log.events) {
        rejected += std::holds_alternative<event::LoopRejected>(e) ? 1 : 0;
    }
    std::cerr << "close: " << data.keyframes.size() << " keyframes, " << result.loops.size() << " loops accepted, "
              << rejected << " rejected -> " << out_traj << ", " << out_events << "\n";
    return 0;
}

int cmd_eval(const std::string& gt, const std::string& est, const std::string& align) {
    const double ate = harness::ate_rmse(io::read_tum(fs::path(gt)), io::read_tum(fs::path(est)),
                                         harness::parse_alignment(align));
    std::cout << nlohmann::json{{"ate_rmse", ate}}.dump() << "\n";
    return 0;
}

int cmd_plot(const std::string& gt, const std::string& est_a, const std::string& est_b, const std::string& out) {
    std::vector<PlotSeries> series;
    series.push_back({fs::path(gt).filename().string(), "#000000", io::read_tum(fs::path(gt))});
    series.push_back({fs::path(est_a).filename().string(), "#d62728", io::read_tum(fs::path(est_a))});
    series.push_back({fs::path(est_b).filename().string(), "#1f77b4", io::read_tum(fs::path(est_b))});
    io::write_text(out, trajectory_svg(series));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loop-closure backend: simulate, build vocabularies, detect and close loops, evaluate."};
    app.name("loopforge");
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset directory");
    simulate->add_option("--config", sim.config, "Run config (JSON)")->required();
    simulate->add_option("--out", sim.out, "Output dataset directory")->required();
    simulate->add_option("--seed", sim.seed, "Overrides LOOPFORGE_SEED and the config seed");

    VocabArgs voc;
    auto* vocab_build = app.add_subcommand("vocab-build", "Train a VLAD vocabulary from LCDB local descriptors");
    vocab_build->add_option("--descriptors", voc.descriptors, "Glob of LCDB files")->required();
    vocab_build->add_option("--k", voc.k, "Number of centers")->required()->check(CLI::PositiveNumber);
    vocab_build->add_option("--seed", voc.seed, "k-means++ seed")->required();
    vocab_build->add_option("--out", voc.out, "Output vocabulary (JSON)")->required();

    DatasetArgs det;
    std::string det_out;
    auto* detect_cmd = app.add_subcommand("detect", "Report loop candidates before verification");
    detect_cmd->add_option("--dataset", det.dataset, "Dataset directory")->required();
    detect_cmd->add_option("--config", det.config, "Run config (JSON)")->required();
    detect_cmd->add_option("--out", det_out, "Output candidates (JSON)")->required();
    detect_cmd->add_option("--seed", det.seed, "Overrides LOOPFORGE_SEED and the config seed");

    DatasetArgs cls;
    std::string out_traj, out_events;
    auto* close_cmd = app.add_subcommand("close", "Run the full loop-closure pipeline");
    close_cmd->add_option("--dataset", cls.dataset, "Dataset directory")->required();
    close_cmd->add_option("--config", cls.config, "Run config (JSON)")->required();
    close_cmd->add_option("--out-traj", out_traj, "Output trajectory (TUM)")->required();
    close_cmd->add_option("--out-events", out_events, "Output event log (JSON)")->required();
    close_cmd->add_option("--seed", cls.seed, "Overrides LOOPFORGE_SEED and the config seed");

    std::string gt, est, align = "sim3";
    auto* eval = app.add_subcommand("eval", "Print the ATE RMSE of an estimate as JSON");
    eval->add_option("--gt", gt, "Ground truth (TUM)")->required();
    eval->add_option("--est", est, "Estimate (TUM)")->required();
    eval->add_option("--align", align, "none, se3 or sim3")->check(CLI::IsMember({"none", "se3", "sim3"}));

    std::string plot_gt, est_a, est_b, plot_out;
    auto* plot = app.add_subcommand("plot", "Overlay trajectories in an SVG");
    plot->add_option("--gt", plot_gt, "Ground truth (TUM)")->required();
    plot->add_option("--est-a", est_a, "First estimate (TUM)")->required();
    plot->add_option("--est-b", est_b, "Second estimate (TUM)")->required();
    plot->add_option("--out", plot_out, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (vocab_build->parsed()) return cmd_vocab_build(voc);
        if (detect_cmd->parsed()) return cmd_detect(det, det_out);
        if (close_cmd->parsed()) return cmd_close(cls, out_traj, out_events);
        if (eval->parsed()) return cmd_eval(gt, est, align);
        if (plot->parsed()) return cmd_plot(plot_gt, est_a, est_b, plot_out);
    } catch (const UsageError& e) {
        std::cerr << "loopforge: " << e.what() << "\n";
        return kUsageError;
    } catch (const Error& e) {
        std::cerr << "loopforge: " << e.what() << "\n";
        return kDataError;
    }
    return kUsageError;
}
