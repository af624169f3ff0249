#include "loopforge/dataset.hpp"

#include <string>

#include "loopforge/error.hpp"
#include "loopforge/seed.hpp"

namespace loopforge {

namespace {

constexpr std::uint64_t kVocabularyStream = 5;

}  // namespace

DatasetPaths::DatasetPaths(const std::filesystem::path& dir)
    : ground_truth(dir / "gt.tum"),
      odometry(dir / "odometry.graph"),
      odometry_tum(dir / "odometry.tum"),
      locals(dir / "locals.lcdb"),
      correspondences(dir / "correspondences.txt"),
      world(dir / "world.json") {}

void write_dataset(const std::filesystem::path& dir, const harness::SyntheticDataset& dataset,
                   const io::RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    }
    const DatasetPaths paths(dir);

    io::write_tum(paths.ground_truth, harness::make_trajectory(dataset.ground_truth, dataset.timestamps));

    const auto chained = harness::integrate(dataset.ground_truth.front(), dataset.odometry);
    PoseGraph graph;
    for (std::size_t i = 0; i < chained.size(); ++i) {
        graph.add_node(i, chained[i]);
    }
    for (std::size_t i = 0; i < dataset.odometry.size(); ++i) {
        graph.add_edge({i, i + 1, dataset.odometry[i], 1.0, EdgeKind::Odometry});
    }
    io::write_graph(paths.odometry, graph);
    io::write_tum(paths.odometry_tum, harness::make_trajectory(chained, dataset.timestamps));

    io::write_lcdb(paths.locals, io::to_lcdb(dataset.locals, dataset.timestamps));

    io::CorrespondenceTable table;
    HarnessProviders harness_providers(dataset);
    for (const auto& [later, earlier] : same_place_pairs(dataset)) {
        table[{later, earlier}] = harness_providers.correspondences(later, earlier);
    }
    io::write_correspondences(paths.correspondences, table);

    io::write_text(paths.world, io::canonical_json(cfg) + "\n");
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
    const DatasetPaths paths(dir);
    LoadedDataset out;

    const io::LcdbFile lcdb = io::read_lcdb(paths.locals);
    if (lcdb.kind != io::DescriptorKind::Local) {
        throw Error(ErrorCode::DimMismatch, paths.locals.string() + " does not hold local descriptors");
    }
    std::map<FrameId, LocalDescriptorSet> locals;
    for (const auto& frame : lcdb.frames) {
        if (!out.keyframes.empty() && frame.frame_id <= out.keyframes.back().frame_id) {
            throw Error(ErrorCode::ProviderDesync, "frame ids in " + paths.locals.string() + " must increase");
        }
        out.keyframes.push_back({frame.frame_id, frame.timestamp});
        out.locals.push_back(io::to_local_set(frame));
        locals[frame.frame_id] = out.locals.back();
    }

    const PoseGraph graph = io::read_graph(paths.odometry);
    std::map<std::pair<FrameId, FrameId>, Sim3> odometry;
    for (const auto& e : graph.edges()) {
        if (e.kind == EdgeKind::Odometry) odometry[{e.from, e.to}] = e.measurement;
    }
    Sim3 initial = Sim3::identity();
    if (!out.keyframes.empty()) {
        const auto it = graph.nodes().find(out.keyframes.front().frame_id);
        if (it == graph.nodes().end()) {
            throw Error(ErrorCode::ProviderDesync, "odometry graph has no node for the first keyframe");
        }
        initial = it->second;
    }

    io::CorrespondenceTable table;
    if (std::filesystem::exists(paths.correspondences)) {
        table = io::read_correspondences(paths.correspondences);
    }
    out.providers = std::make_unique<TableProviders>(std::move(locals), initial, std::move(odometry),
                                                     std::move(table));
    return out;
}

Vocabulary vocabulary_for(const PipelineConfig& cfg, std::span<const LocalDescriptorSet> training) {
    if (!cfg.vocabulary_path.empty()) {
        return io::parse_vocabulary(io::read_text(cfg.vocabulary_path));
    }
    return build_vocabulary(training, cfg.vocabulary_k, derive_seed(cfg.seed, {kVocabularyStream}));
}

}  // namespace loopforge
