#include "loopforge/pipeline.hpp"

#include <future>
#include <string>

#include "loopforge/seed.hpp"

namespace loopforge {

namespace {

struct InFlight {
    std::future<OptimizationResult> result;
    std::size_t run = 0;
    std::size_t due_index = 0;
};

OptimizationResult optimize_snapshot(PoseGraph snapshot, OptimizerConfig cfg) {
    return optimize(snapshot, cfg);
}

PoseMap poses_of(const Trajectory& trajectory) {
    PoseMap out;
    for (const auto& e : trajectory) {
        out[e.frame_id] = e.pose;
    }
    return out;
}

}  // namespace

void validate(const PipelineConfig& cfg) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (cfg.retrieval_k < 1) fail("retrieval_k must be at least 1");
    if (cfg.vocabulary_k < 1) fail("vocabulary_k must be at least 1");
    if (cfg.threshold.warmup_target < 1 || cfg.threshold.window < 1) {
        fail("threshold warmup_target and window must be at least 1");
    }
    if (cfg.ransac.max_iters < 1) fail("ransac.max_iters must be at least 1");
    if (!(cfg.ransac.inlier_dist > 0.0)) fail("ransac.inlier_dist must be positive");
    if (cfg.ransac.min_inliers < 3) fail("ransac.min_inliers must be at least 3");
    if (!(cfg.ransac.confidence > 0.0 && cfg.ransac.confidence < 1.0)) {
        fail("ransac.confidence must lie in (0, 1)");
    }
    if (cfg.pgo.max_iterations < 1) fail("pgo.max_iterations must be at least 1");
    if (!(cfg.pgo.initial_damping > 0.0)) fail("pgo.initial_damping must be positive");
    if (!(cfg.pgo.cost_tolerance >= 0.0)) fail("pgo.cost_tolerance must be non-negative");
    if (!(cfg.pgo.huber_delta > 0.0)) fail("pgo.huber_delta must be positive");
}

FrameId event_frame(const PipelineEvent& e) {
    return std::visit([](const auto& v) { return v.frame_id; }, e);
}

std::string event_name(const PipelineEvent& e) {
    struct Namer {
        std::string operator()(const event::KeyframeIngested&) const { return "KeyframeIngested"; }
        std::string operator()(const event::CandidateScored&) const { return "CandidateScored"; }
        std::string operator()(const event::LoopAccepted&) const { return "LoopAccepted"; }
        std::string operator()(const event::LoopRejected&) const { return "LoopRejected"; }
        std::string operator()(const event::OptimizationStarted&) const { return "OptimizationStarted"; }
        std::string operator()(const event::OptimizationFinished&) const { return "OptimizationFinished"; }
    };
    return std::visit(Namer{}, e);
}

RunResult run(std::span<const KeyframeInfo> stream, const Providers& providers,
              const Vocabulary& vocabulary, const PipelineConfig& cfg) {
    validate(cfg);
    RunResult out;
    out.log.config_hash = config_hash(cfg);
    auto& events = out.log.events;

    DescriptorDatabase db;
    PoseGraph graph;
    TrajectoryStore trajectory;
    AdaptiveThreshold threshold(cfg.threshold);
    std::optional<InFlight> in_flight;
    bool pending = false;
    std::size_t runs = 0;
    const std::size_t lag = std::max<std::size_t>(cfg.optimization_lag, 1);

    auto launch = [&](FrameId at, std::size_t index) {
        InFlight job;
        job.run = runs++;
        job.due_index = index + lag;
        events.push_back(event::OptimizationStarted{at, job.run, graph.nodes().size(),
                                                    graph.edges().size(), graph.loop_edge_count()});
        job.result = std::async(std::launch::async, optimize_snapshot, graph, cfg.pgo);
        in_flight = std::move(job);
        pending = false;
    };
    auto finish = [&](FrameId at) {
        event::OptimizationFinished done;
        done.frame_id = at;
        done.run = in_flight->run;
        try {
            OptimizationResult result = in_flight->result.get();
            done.report = result.report;
            trajectory.apply_correction(result.poses);
            const PoseMap corrected = poses_of(trajectory.snapshot());
            graph.set_poses(corrected);
            db.update_poses(corrected);
        } catch (const Error& e) {
            done.error = e.code();
        }
        in_flight.reset();
        events.push_back(done);
    };

    std::optional<FrameId> previous;
    Sim3 odometry_pose;
    for (std::size_t index = 0; index < stream.size(); ++index) {
        const KeyframeInfo& kf = stream[index];
        if (previous && kf.frame_id <= *previous) {
            throw Error(ErrorCode::ProviderDesync,
                        "keyframe stream ids must increase (" + std::to_string(kf.frame_id) + ")");
        }

        if (in_flight && index >= in_flight->due_index) {
            finish(kf.frame_id);
            if (pending) {
                launch(kf.frame_id, index);
            }
        }

        const GlobalDescriptor descriptor =
            aggregate_vlad(providers.descriptors.local_descriptors(kf.frame_id), vocabulary);

        Sim3 pose;
        if (!previous) {
            pose = providers.odometry.initial_pose();
            odometry_pose = pose;
        } else {
            const Sim3 rel = providers.odometry.relative(*previous, kf.frame_id);
            pose = *trajectory.pose(*previous) * rel;
            odometry_pose = odometry_pose * rel;
        }
        graph.add_node(kf.frame_id, pose);
        if (previous) {
            graph.add_edge({*previous, kf.frame_id,
                            providers.odometry.relative(*previous, kf.frame_id), 1.0,
                            EdgeKind::Odometry});
        }
        trajectory.append({kf.frame_id, kf.timestamp, pose, previous});
        out.odometry_trajectory.push_back({kf.frame_id, kf.timestamp, odometry_pose, previous});
        events.push_back(event::KeyframeIngested{kf.frame_id, kf.timestamp, descriptor.degenerate});

        const auto ranked = db.query_top_k(descriptor, kf.frame_id, cfg.retrieval_k, cfg.exclusion_window);
        const auto best = best_candidate(ranked);
        const bool valid = best && !descriptor.degenerate && !db.find(best->match_id)->descriptor.degenerate;
        if (valid) {
            const auto thresh = threshold.loop_thresh();
            const bool is_loop = threshold.is_loop(best->similarity);
            events.push_back(event::CandidateScored{kf.frame_id, best->match_id, best->similarity,
                                                    thresh, is_loop});
            if (is_loop) {
                RansacConfig rc = cfg.ransac;
                rc.seed = derive_seed(cfg.seed, {kf.frame_id, best->match_id});
                VerifyOutcome outcome;
                try {
                    const auto corr = providers.correspondences.correspondences(kf.frame_id, best->match_id);
                    outcome = verify_loop(*best, corr, rc);
                } catch (const Error& e) {
                    outcome.reason = e.code();
                }
                if (outcome.constraint) {
                    const LoopConstraint& c = *outcome.constraint;
                    const double weight = loop_edge_weight(c.inliers, cfg.ransac.min_inliers);
                    graph.add_edge({c.match_id, c.query_id, c.relative, weight, EdgeKind::Loop});
                    out.loops.push_back(c);
                    events.push_back(event::LoopAccepted{kf.frame_id, c.match_id, c.similarity,
                                                         *thresh, c.inliers, weight, c.relative});
                    pending = true;
                } else {
                    events.push_back(event::LoopRejected{kf.frame_id, best->match_id, *outcome.reason});
                }
            }
            threshold.observe(best->similarity);
        }

        db.insert({kf.frame_id, kf.timestamp, descriptor, pose});

        if (pending && !in_flight) {
            launch(kf.frame_id, index);
        }
        previous = kf.frame_id;
    }

    while (in_flight) {
        finish(*previous);
        if (pending) {
            launch(*previous, stream.size());
        }
    }

    out.trajectory = trajectory.snapshot();
    return out;
}

std::vector<event::CandidateScored> detect(std::span<const KeyframeInfo> stream,
                                           const DescriptorProvider& descriptors,
                                           const Vocabulary& vocabulary, const PipelineConfig& cfg) {
    validate(cfg);
    DescriptorDatabase db;
    AdaptiveThreshold threshold(cfg.threshold);
    std::vector<event::CandidateScored> out;
    for (const auto& kf : stream) {
        const GlobalDescriptor descriptor = aggregate_vlad(descriptors.local_descriptors(kf.frame_id), vocabulary);
        const auto ranked = db.query_top_k(descriptor, kf.frame_id, cfg.retrieval_k, cfg.exclusion_window);
        const auto best = best_candidate(ranked);
        if (best && !descriptor.degenerate && !db.find(best->match_id)->descriptor.degenerate) {
            if (threshold.is_loop(best->similarity)) {
                out.push_back({kf.frame_id, best->match_id, best->similarity, threshold.loop_thresh(), true});
            }
            threshold.observe(best->similarity);
        }
        db.insert({kf.frame_id, kf.timestamp, descriptor, Sim3::identity()});
    }
    return out;
}

Trajectory replay(const EventLog& log, std::span<const KeyframeInfo> stream,
                  const OdometryProvider& odometry, const PipelineConfig& cfg) {
    if (log.config_hash != config_hash(cfg)) {
        throw Error(ErrorCode::ConfigMismatch, "event log was recorded with config " +
                                                   log.config_hash + ", not " + config_hash(cfg));
    }

    PoseGraph graph;
    TrajectoryStore trajectory;
    struct Pending {
        std::size_t run;
        OptimizationResult result;
        std::optional<ErrorCode> error;
    };
    std::optional<Pending> in_flight;
    std::size_t cursor = 0;
    std::optional<FrameId> previous;

    auto missing = [](const std::string& what) { throw Error(ErrorCode::MissingEvent, what); };

    for (std::size_t index = 0; index < stream.size(); ++index) {
        const KeyframeInfo& kf = stream[index];
        bool ingested = false;
        const bool last = index + 1 == stream.size();
        while (cursor < log.events.size() && event_frame(log.events[cursor]) == kf.frame_id) {
            const PipelineEvent& e = log.events[cursor];
            if (const auto* k = std::get_if<event::KeyframeIngested>(&e)) {
                if (ingested) {
                    throw Error(ErrorCode::ReplayDivergence,
                                "frame " + std::to_string(k->frame_id) + " ingested twice");
                }
                Sim3 pose = odometry.initial_pose();
                if (previous) {
                    pose = *trajectory.pose(*previous) * odometry.relative(*previous, kf.frame_id);
                }
                graph.add_node(kf.frame_id, pose);
                if (previous) {
                    graph.add_edge({*previous, kf.frame_id, odometry.relative(*previous, kf.frame_id),
                                    1.0, EdgeKind::Odometry});
                }
                trajectory.append({kf.frame_id, kf.timestamp, pose, previous});
                ingested = true;
            } else if (const auto* a = std::get_if<event::LoopAccepted>(&e)) {
                graph.add_edge({a->match_id, a->frame_id, a->relative, a->weight, EdgeKind::Loop});
            } else if (std::holds_alternative<event::OptimizationStarted>(e)) {
                const auto& s = std::get<event::OptimizationStarted>(e);
                Pending p{s.run, {}, std::nullopt};
                try {
                    p.result = optimize(graph, cfg.pgo);
                } catch (const Error& err) {
                    p.error = err.code();
                }
                in_flight = std::move(p);
            } else if (const auto* f = std::get_if<event::OptimizationFinished>(&e)) {
                if (!in_flight || in_flight->run != f->run) {
                    missing("OptimizationStarted for run " + std::to_string(f->run) + " is missing");
                }
                if (in_flight->error != f->error ||
                    (!f->error && in_flight->result.report.final_cost != f->report.final_cost)) {
                    throw Error(ErrorCode::ReplayDivergence,
                                "optimization run " + std::to_string(f->run) + " diverged from the log");
                }
                if (!in_flight->error) {
                    trajectory.apply_correction(in_flight->result.poses);
                    graph.set_poses(poses_of(trajectory.snapshot()));
                }
                in_flight.reset();
            }
            ++cursor;
            if (!last && ingested && cursor < log.events.size() &&
                std::holds_alternative<event::KeyframeIngested>(log.events[cursor])) {
                break;
            }
        }
        if (!ingested) {
            missing("no KeyframeIngested event for frame " + std::to_string(kf.frame_id));
        }
        previous = kf.frame_id;
    }
    if (in_flight) {
        missing("optimization run " + std::to_string(in_flight->run) + " never finished");
    }
    if (cursor != log.events.size()) {
        throw Error(ErrorCode::ReplayDivergence, "event log has events past the keyframe stream");
    }
    return trajectory.snapshot();
}

}  // namespace loopforge
