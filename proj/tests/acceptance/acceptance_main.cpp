// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "loopforge/dataset.hpp"
#include "loopforge/descriptor_db.hpp"
#include "loopforge/error.hpp"
#include "loopforge/harness.hpp"
#include "loopforge/io.hpp"
#include "loopforge/pipeline.hpp"
#include "loopforge/providers.hpp"
#include "loopforge/threshold.hpp"
#include "loopforge/verification.hpp"
#include "random_sim3.hpp"

using namespace loopforge;
using loopforge::testing::max_abs_diff;
using loopforge::testing::random_sim3;
using loopforge::testing::random_vec;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits.
constexpr double kUmeyamaTol = 1e-9;
constexpr double kUmeyamaSeconds = 1.0;
constexpr int kRansacTrials = 100;
constexpr int kRansacMinAccepted = 95;
constexpr double kRansacRotationDeg = 1.0;
constexpr double kRansacScaleRel = 0.01;
constexpr double kRansacTranslation = 0.05;
constexpr double kRansacSeconds = 10.0;
constexpr double kAteRatio = 0.30;
constexpr double kZeroNoiseAte = 1e-6;
constexpr double kEndToEndSeconds = 60.0;
constexpr double kPgoRecoveryTol = 1e-6;
constexpr double kJacobianRelTol = 1e-4;
constexpr double kTumTol = 1e-8;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

/// Runs a check; an escaped exception counts as a failure.
void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& check) {
    try {
        const auto [ok, detail] = check();
        report(name, ok, detail);
    } catch (const std::exception& e) {
        report(name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

template <class E>
std::vector<E> events_of(const EventLog& log) {
    std::vector<E> out;
    for (const auto& e : log.events)
        if (const auto* v = std::get_if<E>(&e)) out.push_back(*v);
    return out;
}

std::optional<ErrorCode> error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// ---- criteria ----

std::pair<bool, std::string> umeyama_exactness() {
    std::mt19937_64 rng(101);
    double rot = 0, scale = 0, trans = 0;
    const auto t0 = Clock::now();
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 4 + static_cast<std::size_t>(i) * 96 / 99;
        const Sim3 truth = random_sim3(rng, 3.0, 1.0, 5.0);
        std::vector<Vec3> src, dst;
        for (std::size_t k = 0; k < n; ++k) {
            src.push_back(random_vec(rng, 2.0));
            dst.push_back(truth * src.back());
        }
        const Sim3 est = umeyama(src, dst);
        rot = std::max(rot, rotation_angle_between(est.r, truth.r));
        scale = std::max(scale, std::abs(est.s - truth.s) / truth.s);
        trans = std::max(trans, (est.t - truth.t).norm());
    }
    const double elapsed = seconds_since(t0);

    // Mirror image of a point set: the best proper rotation must still have det +1.
    std::vector<Vec3> src, dst;
    for (int k = 0; k < 20; ++k) {
        src.push_back(random_vec(rng, 1.0));
        dst.push_back(Vec3(-src.back().x(), src.back().y(), src.back().z()));
    }
    const double det = umeyama(src, dst).rotation_matrix().determinant();

    const bool ok = rot < kUmeyamaTol && scale < kUmeyamaTol && trans < kUmeyamaTol &&
                    std::abs(det - 1.0) < 1e-12 && elapsed < kUmeyamaSeconds;
    return {ok, fmt("max rot %.2e rad, max |ds|/s %.2e, max |dt| %.2e (tol %.0e); reflection det %.15f; %.3f s (< %.0f s)",
                    rot, scale, trans, kUmeyamaTol, det, elapsed, kUmeyamaSeconds)};
}

std::pair<bool, std::string> ransac_robustness() {
    std::mt19937_64 rng(202);
    std::normal_distribution<double> noise(0.0, 0.01);
    int good = 0;
    const auto t0 = Clock::now();
    for (int trial = 0; trial < kRansacTrials; ++trial) {
        const Sim3 truth = random_sim3(rng, 3.0, 0.5, 3.0);
        std::vector<Correspondence> corr;
        for (int k = 0; k < 200; ++k) {
            Correspondence c;
            c.p = random_vec(rng, 2.0);
            if (k % 2 == 0) {
                c.q = truth * c.p + Vec3(noise(rng), noise(rng), noise(rng));
            } else {
                c.q = truth * random_vec(rng, 2.0);
            }
            corr.push_back(c);
        }
        std::shuffle(corr.begin(), corr.end(), rng);
        RansacConfig cfg;
        cfg.inlier_dist = 0.05;
        cfg.seed = static_cast<std::uint64_t>(trial);
        const auto r = ransac_sim3(corr, cfg);
        const double rot_deg = rotation_angle_between(r.transform.r, truth.r) * 180.0 / std::numbers::pi;
        const double scale = std::abs(r.transform.s - truth.s) / truth.s;
        const double trans = (r.transform.t - truth.t).norm();
        if (r.accepted && rot_deg < kRansacRotationDeg && scale < kRansacScaleRel && trans < kRansacTranslation) ++good;
    }
    const double elapsed = seconds_since(t0);
    return {good >= kRansacMinAccepted && elapsed < kRansacSeconds,
            fmt("%d/%d trials accepted within 1 deg / 1%% / 0.05 (need >= %d); %.3f s (< %.0f s)", good, kRansacTrials,
                kRansacMinAccepted, elapsed, kRansacSeconds)};
}

std::pair<bool, std::string> inlier_gate() {
    std::mt19937_64 rng(303);
    const Sim3 truth = random_sim3(rng);
    auto perfect = [&](int n) {
        std::vector<Correspondence> corr;
        for (int k = 0; k < n; ++k) {
            Correspondence c;
            c.p = random_vec(rng, 2.0);
            c.q = truth * c.p;
            corr.push_back(c);
        }
        return corr;
    };
    RansacConfig cfg;
    const auto r29 = ransac_sim3(perfect(29), cfg);
    const auto r30 = ransac_sim3(perfect(30), cfg);
    return {!r29.accepted && r30.accepted && r30.inlier_indices.size() == 30,
            fmt("29 perfect -> %s, 30 perfect -> %s (%zu inliers)", r29.accepted ? "accepted" : "rejected",
                r30.accepted ? "accepted" : "rejected", r30.inlier_indices.size())};
}

std::pair<bool, std::string> adaptive_threshold() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool early_loop = false, median_ok = true, monotone = true, identical = true;
    for (int stream = 0; stream < 50; ++stream) {
        std::vector<double> scores(200);
        for (auto& s : scores) s = u(rng) * (0.5 + 0.5 * stream / 50.0);
        AdaptiveThreshold a, b;
        double last = -INFINITY;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const bool da = a.is_loop(scores[i]);
            const bool db = b.is_loop(scores[i]);
            identical = identical && da == db && a.loop_thresh() == b.loop_thresh();
            if (i < 5 && da) early_loop = true;
            a.observe(scores[i]);
            b.observe(scores[i]);
            if (i == 4) {
                std::vector<double> first(scores.begin(), scores.begin() + 5);
                std::sort(first.begin(), first.end());
                median_ok = median_ok && a.loop_thresh() && *a.loop_thresh() == first[2];
            }
            if (a.loop_thresh()) {
                monotone = monotone && *a.loop_thresh() >= last;
                last = *a.loop_thresh();
            }
        }
    }
    return {!early_loop && median_ok && monotone && identical,
            fmt("50 streams x 200 scores: loop before 5 scores %s, median of first 5 %s, monotone %s, identical %s",
                early_loop ? "yes" : "no", median_ok ? "ok" : "wrong", monotone ? "yes" : "no",
                identical ? "yes" : "no")};
}

std::pair<bool, std::string> retrieval_oracle() {
    std::mt19937_64 rng(505);
    std::normal_distribution<double> g(0.0, 1.0);
    auto random_descriptor = [&] {
        GlobalDescriptor d;
        d.values = Eigen::VectorXd::NullaryExpr(64, [&] { return g(rng); }).normalized();
        d.degenerate = false;
        return d;
    };
    DescriptorDatabase db;
    std::vector<KeyframeRecord> records;
    for (FrameId id = 0; id < 500; ++id) {
        records.push_back({id, 0.1 * static_cast<double>(id), random_descriptor(), Sim3::identity()});
        db.insert(records.back());
    }
    constexpr std::uint64_t window = 50;
    int mismatches = 0, violations = 0;
    std::uniform_int_distribution<FrameId> pick(0, 549);
    for (int q = 0; q < 50; ++q) {
        const GlobalDescriptor query = random_descriptor();
        const FrameId qid = pick(rng);
        const std::size_t k = 1 + static_cast<std::size_t>(q % 10);
        std::vector<LoopCandidate> oracle;
        for (const auto& r : records) {
            if (frame_gap(qid, r.frame_id) <= window) continue;
            double dot = 0, na = 0, nb = 0;
            for (Eigen::Index i = 0; i < 64; ++i) {
                dot += query.values(i) * r.descriptor.values(i);
                na += query.values(i) * query.values(i);
                nb += r.descriptor.values(i) * r.descriptor.values(i);
            }
            oracle.push_back({qid, r.frame_id, dot / (std::sqrt(na) * std::sqrt(nb))});
        }
        std::stable_sort(oracle.begin(), oracle.end(),
                         [](const LoopCandidate& a, const LoopCandidate& b) { return a.similarity > b.similarity; });
        oracle.resize(std::min(k, oracle.size()));
        const auto got = db.query_top_k(query, qid, k, window);
        if (got.size() != oracle.size()) {
            ++mismatches;
            continue;
        }
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i].match_id != oracle[i].match_id || std::abs(got[i].similarity - oracle[i].similarity) > 1e-12) {
                ++mismatches;
                break;
            }
        }
        for (const auto& c : got) violations += frame_gap(qid, c.match_id) <= window ? 1 : 0;
    }
    return {mismatches == 0 && violations == 0,
            fmt("50 queries over 500 records: %d ranking mismatches, %d window violations", mismatches, violations)};
}

harness::WorldConfig acceptance_world(bool noisy) {
    harness::WorldConfig w;
    w.shape = harness::TrajectoryShape::Square;
    w.keyframes = 400;
    w.seed = 7;
    w.places.separation = 10.0 * w.places.noise_sigma;
    if (noisy) {
        w.drift.translation_sigma = 0.01;
        w.drift.rotation_sigma = 0.002;
        w.drift.scale_sigma = 0.001;
    } else {
        w.correspondences.noise_sigma = 0.0;
    }
    return w;
}

struct EndToEnd {
    harness::SyntheticDataset ds;
    RunResult result;
    double pre_ate = 0, post_ate = 0;
};

EndToEnd run_world(const harness::WorldConfig& world) {
    EndToEnd out;
    out.ds = harness::generate(world);
    const HarnessProviders hp(out.ds);
    PipelineConfig cfg;
    cfg.seed = world.seed;
    const Vocabulary vocab = vocabulary_for(cfg, out.ds.locals);
    out.result = run(hp.keyframes(), hp.providers(), vocab, cfg);
    const auto gt = harness::make_trajectory(out.ds.ground_truth, out.ds.timestamps);
    out.pre_ate = harness::ate_rmse(gt, out.result.odometry_trajectory, harness::Alignment::Sim3);
    out.post_ate = harness::ate_rmse(gt, out.result.trajectory, harness::Alignment::Sim3);
    return out;
}

std::optional<EndToEnd> noisy_run;

std::pair<bool, std::string> end_to_end() {
    const auto t0 = Clock::now();
    noisy_run = run_world(acceptance_world(true));
    const EndToEnd zero = run_world(acceptance_world(false));
    const double elapsed = seconds_since(t0);
    const auto loops = events_of<event::LoopAccepted>(noisy_run->result.log).size();
    const double ratio = noisy_run->post_ate / noisy_run->pre_ate;
    const bool ok = loops >= 1 && ratio <= kAteRatio && zero.post_ate < kZeroNoiseAte && elapsed < kEndToEndSeconds;
    return {ok, fmt("%zu loops accepted; ATE %.4f -> %.4f (ratio %.3f, need <= %.2f); zero-noise ATE %.2e (< %.0e); "
                    "%.2f s (< %.0f s)",
                    loops, noisy_run->pre_ate, noisy_run->post_ate, ratio, kAteRatio, zero.post_ate, kZeroNoiseAte,
                    elapsed, kEndToEndSeconds)};
}

Tangent7 random_tangent(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Tangent7 v;
    for (int k = 0; k < 7; ++k) v(k) = u(rng);
    return v;
}

std::pair<bool, std::string> pgo_properties() {
    std::mt19937_64 rng(606);

    // Cost history of every optimization in the end-to-end run, plus the gauge.
    bool costs_ok = true;
    std::size_t runs = 0;
    if (!noisy_run) noisy_run = run_world(acceptance_world(true));
    for (const auto& f : events_of<event::OptimizationFinished>(noisy_run->result.log)) {
        ++runs;
        const auto& c = f.report.accepted_costs;
        for (std::size_t i = 1; i < c.size(); ++i) costs_ok = costs_ok && c[i] <= c[i - 1];
        costs_ok = costs_ok && !f.error;
    }
    const Sim3 initial = noisy_run->ds.ground_truth.front();
    const bool gauge_ok = max_abs_diff(noisy_run->result.trajectory.front().pose, initial) == 0.0;

    // Consistent graphs, 10% perturbed.
    double worst_recovery = 0;
    bool gauge_fixed = true;
    for (int g = 0; g < 10; ++g) {
        const std::size_t n = 30;
        std::vector<Sim3> truth;
        truth.push_back(random_sim3(rng, 1.0, 0.2, 2.0));
        for (std::size_t i = 1; i < n; ++i) truth.push_back(truth.back() * random_sim3(rng, 0.3, 0.05, 1.0));
        PoseGraph graph;
        for (std::size_t i = 0; i < n; ++i) graph.add_node(i, truth[i]);
        auto consistent = [&](FrameId a, FrameId b, EdgeKind kind) {
            graph.add_edge({a, b, sim3_inverse(truth[a]) * truth[b], kind == EdgeKind::Loop ? 10.0 : 1.0, kind});
        };
        for (FrameId i = 0; i + 1 < n; ++i) consistent(i, i + 1, EdgeKind::Odometry);
        for (int k = 0; k < 6; ++k) {
            const FrameId a = std::uniform_int_distribution<FrameId>(0, n - 3)(rng);
            consistent(a, std::uniform_int_distribution<FrameId>(a + 2, n - 1)(rng), EdgeKind::Loop);
        }
        double extent = 0;
        for (const auto& p : truth) extent = std::max(extent, (p.t - truth[0].t).norm());
        for (std::size_t i = 1; i < n; ++i) {
            Tangent7 d = random_tangent(rng, 0.1);
            d.head<3>() *= extent;
            Sim3 p = truth[i] * sim3_exp(d);
            graph.set_pose(i, p);
        }
        OptimizerConfig cfg;
        cfg.max_iterations = 200;
        cfg.cost_tolerance = 0.0;
        const auto result = optimize(graph, cfg);
        for (std::size_t i = 0; i < n; ++i) worst_recovery = std::max(worst_recovery, max_abs_diff(result.poses.at(i), truth[i]));
        gauge_fixed = gauge_fixed && max_abs_diff(result.poses.at(0), truth[0]) == 0.0;
        const auto& c = result.report.accepted_costs;
        for (std::size_t i = 1; i < c.size(); ++i) costs_ok = costs_ok && c[i] <= c[i - 1];
    }

    // Analytic vs central-difference Jacobians on 20 random graphs.
    double worst_jac = 0;
    for (int g = 0; g < 20; ++g) {
        const std::size_t n = 6;
        PoseMap poses;
        for (FrameId i = 0; i < n; ++i) poses[i] = random_sim3(rng, 2.5, 0.7, 5.0);
        for (FrameId i = 0; i + 1 < n; ++i) {
            const PoseEdge e{i, i + 1, (sim3_inverse(poses[i]) * poses[i + 1]) * sim3_exp(random_tangent(rng, 0.3)), 1.0,
                             EdgeKind::Odometry};
            const auto an = linearize_edge(e, poses);
            const auto nu = linearize_edge_numeric(e, poses);
            worst_jac = std::max(worst_jac, (an.d_from - nu.d_from).norm() / an.d_from.norm());
            worst_jac = std::max(worst_jac, (an.d_to - nu.d_to).norm() / an.d_to.norm());
        }
    }

    const bool ok = costs_ok && gauge_ok && gauge_fixed && worst_recovery < kPgoRecoveryTol && worst_jac < kJacobianRelTol;
    return {ok, fmt("costs non-increasing %s (%zu pipeline runs + 10 graphs); gauge immobile %s; recovery %.2e (< %.0e); "
                    "jacobian rel err %.2e (< %.0e)",
                    costs_ok ? "yes" : "no", runs, gauge_ok && gauge_fixed ? "yes" : "no", worst_recovery,
                    kPgoRecoveryTol, worst_jac, kJacobianRelTol)};
}

int run_cli(const std::string& args) {
    const std::string cmd = "'" + std::string(LOOPFORGE_CLI) + "' " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::pair<bool, std::string> determinism() {
    const fs::path dir = fs::temp_directory_path() / "loopforge_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    io::RunConfig cfg;
    cfg.seed = 7;
    cfg.world = acceptance_world(true);
    cfg.pipeline.seed = cfg.seed;
    io::write_text(dir / "config.json", io::canonical_json(cfg));
    const std::string d = dir.string();
    if (run_cli("simulate --config " + d + "/config.json --out " + d + "/ds") != 0) return {false, "simulate failed"};
    for (const char* tag : {"a", "b"}) {
        const std::string t(tag);
        if (run_cli("close --dataset " + d + "/ds --config " + d + "/config.json --out-traj " + d + "/" + t +
                    ".tum --out-events " + d + "/" + t + ".json") != 0)
            return {false, "close failed"};
    }
    const bool traj = io::read_text(dir / "a.tum") == io::read_text(dir / "b.tum");
    const bool events = io::read_text(dir / "a.json") == io::read_text(dir / "b.json");
    const auto log = io::parse_event_log(io::read_text(dir / "a.json"));
    fs::remove_all(dir);
    return {traj && events, fmt("two close runs: trajectories %s, event logs %s (%zu events)",
                                traj ? "identical" : "differ", events ? "identical" : "differ", log.events.size())};
}

std::pair<bool, std::string> format_round_trips() {
    std::mt19937_64 rng(808);
    std::vector<std::string> problems;

    // LCDB: bit-exact.
    io::LcdbFile lcdb;
    lcdb.n = 5;
    lcdb.d = 4;
    std::normal_distribution<float> gf(0.0f, 1.0f);
    for (FrameId i = 0; i < 3; ++i) {
        lcdb.frames.push_back({i, 0.5 * static_cast<double>(i), io::FloatMatrix::NullaryExpr(5, 4, [&] { return gf(rng); })});
    }
    const std::string bytes = io::encode_lcdb(lcdb);
    const auto back = io::decode_lcdb(bytes);
    bool lcdb_ok = io::encode_lcdb(back) == bytes;
    for (std::size_t i = 0; i < 3; ++i) lcdb_ok = lcdb_ok && back.frames[i].values == lcdb.frames[i].values;
    if (!lcdb_ok) problems.push_back("lcdb payload");
    if (error_of([&] { io::decode_lcdb("NOPE" + bytes.substr(4)); }) != ErrorCode::BadMagic) problems.push_back("lcdb magic");
    if (error_of([&] { io::decode_lcdb(bytes.substr(0, bytes.size() - 3)); }) != ErrorCode::TruncatedPayload)
        problems.push_back("lcdb truncation");
    std::string v9 = bytes;
    v9[4] = 9;
    if (error_of([&] { io::decode_lcdb(v9); }) != ErrorCode::UnsupportedVersion) problems.push_back("lcdb version");

    // TUM: 1e-8.
    Trajectory traj;
    for (FrameId i = 0; i < 100; ++i) traj.push_back({i, 1e3 + 0.05 * static_cast<double>(i), random_sim3(rng, 3.0, 0.0, 20.0), std::nullopt});
    std::stringstream tum;
    io::write_tum(tum, traj);
    const auto tback = io::read_tum(tum);
    double tum_err = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        tum_err = std::max(tum_err, std::abs(tback[i].timestamp - traj[i].timestamp) / traj[i].timestamp);
        tum_err = std::max(tum_err, (tback[i].pose.t - traj[i].pose.t).cwiseAbs().maxCoeff() / std::max(1.0, traj[i].pose.t.norm()));
        tum_err = std::max(tum_err, rotation_angle_between(tback[i].pose.r, traj[i].pose.r));
    }
    if (!(tum_err < kTumTol)) problems.push_back(fmt("tum error %.2e", tum_err));
    std::stringstream seven("0 0 0 0 0 0 0 1\n1 0 0 0 0 0 0\n");
    if (error_of([&] { io::read_tum(seven); }) != ErrorCode::ParseError) problems.push_back("tum 7 fields");

    // Correspondences: exact.
    io::CorrespondenceTable table;
    for (int k = 0; k < 50; ++k) table[{90, 10}].push_back({random_vec(rng, 3.0), random_vec(rng, 3.0)});
    std::stringstream cs;
    io::write_correspondences(cs, table);
    const auto cback = io::read_correspondences(cs);
    bool corr_ok = cback.size() == 1 && cback.at({90, 10}).size() == 50;
    for (std::size_t k = 0; corr_ok && k < 50; ++k) {
        corr_ok = cback.at({90, 10})[k].p == table.at({90, 10})[k].p && cback.at({90, 10})[k].q == table.at({90, 10})[k].q;
    }
    if (!corr_ok) problems.push_back("correspondences");
    std::stringstream short_line("90 10 1 2 3\n");
    if (error_of([&] { io::read_correspondences(short_line); }) != ErrorCode::ParseError) problems.push_back("corr short line");

    // Config: canonical form is a fixed point, key order does not matter.
    const auto a = io::parse_run_config(R"({"seed": 3, "pipeline": {"retrieval_k": 4, "exclusion_window": 40}})");
    const auto b = io::parse_run_config(R"({"pipeline": {"exclusion_window": 40, "retrieval_k": 4}, "seed": 3})");
    if (io::run_config_hash(a) != io::run_config_hash(b)) problems.push_back("config key order");
    if (io::canonical_json(io::parse_run_config(io::canonical_json(a))) != io::canonical_json(a)) problems.push_back("config fixed point");
    if (error_of([] { io::parse_run_config(R"({"pipeline": {"retrival_k": 4}})"); }) != ErrorCode::ConfigSchemaError)
        problems.push_back("config unknown key");

    std::string detail = "lcdb bit-exact, tum " + fmt("%.1e", tum_err) + " (< 1e-8), correspondences exact, config canonical";
    if (!problems.empty()) {
        detail = "problems:";
        for (const auto& p : problems) detail += " [" + p + "]";
    }
    return {problems.empty(), detail};
}

}  // namespace

int main() {
    criterion("umeyama_exactness", umeyama_exactness);
    criterion("ransac_robustness", ransac_robustness);
    criterion("inlier_gate", inlier_gate);
    criterion("adaptive_threshold", adaptive_threshold);
    criterion("retrieval_oracle", retrieval_oracle);
    criterion("end_to_end_closure", end_to_end);
    criterion("pgo_properties", pgo_properties);
    criterion("determinism", determinism);
    criterion("format_round_trips", format_round_trips);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
