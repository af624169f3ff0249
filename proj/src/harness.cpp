#include "loopforge/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "loopforge/error.hpp"
#include "loopforge/seed.hpp"

namespace loopforge::harness {

namespace {

constexpr std::size_t kCorridorTurnFrames = 10;

// Landmark sampling box in the query camera frame.
const Vec3 kBoxMin(-2.0, -2.0, 1.0);
const Vec3 kBoxMax(2.0, 2.0, 5.0);

enum SeedStream : std::uint64_t { kDrift = 1, kSignature = 2, kLocals = 3 };

Sim3 planar_pose(double x, double y, double yaw) {
    return Sim3(1.0, rot_z(yaw), Vec3(x, y, 0.0));
}

struct Layout {
    std::vector<Sim3> poses;
    std::vector<std::size_t> place_of;
};

Layout lap_layout(const WorldConfig& cfg) {
    const std::size_t period = cfg.effective_period();
    Layout out;
    std::size_t next_place = 0;
    for (std::size_t i = 0; i < cfg.keyframes; ++i) {
        const std::size_t phase = i % period;
        const double u = static_cast<double>(phase) / static_cast<double>(period);
        if (cfg.shape == TrajectoryShape::Square) {
            const double side = cfg.extent;
            const double along = u * 4.0 * side;
            const auto segment = std::min<std::size_t>(3, static_cast<std::size_t>(along / side));
            const double offset = along - static_cast<double>(segment) * side;
            static constexpr double kHeading[4] = {0.0, 0.5, 1.0, 1.5};
            const double yaw = kHeading[segment] * std::numbers::pi;
            Vec3 corner[4] = {{0, 0, 0}, {side, 0, 0}, {side, side, 0}, {0, side, 0}};
            const Vec3 p = corner[segment] + offset * Vec3(std::cos(yaw), std::sin(yaw), 0.0);
            out.poses.push_back(planar_pose(p.x(), p.y(), yaw));
        } else {
            const double a = cfg.extent;
            const double th = 2.0 * std::numbers::pi * u;
            const double x = a * std::sin(th);
            const double y = a * std::sin(th) * std::cos(th);
            const double yaw = std::atan2(a * std::cos(2.0 * th), a * std::cos(th));
            out.poses.push_back(planar_pose(x, y, yaw));
        }
        out.place_of.push_back(i < period ? next_place++ : out.place_of[i - period]);
    }
    return out;
}

Layout corridor_layout(const WorldConfig& cfg) {
    Layout out;
    const std::size_t turn = std::min(kCorridorTurnFrames, cfg.keyframes / 4);
    const std::size_t out_leg = (cfg.keyframes - turn + 1) / 2;
    const double step = cfg.extent / static_cast<double>(std::max<std::size_t>(out_leg - 1, 1));
    std::size_t next_place = 0;
    for (std::size_t i = 0; i < out_leg; ++i) {
        out.poses.push_back(planar_pose(static_cast<double>(i) * step, 0.0, 0.0));
        out.place_of.push_back(next_place++);
    }
    const double end_x = static_cast<double>(out_leg - 1) * step;
    for (std::size_t k = 1; k <= turn && out.poses.size() < cfg.keyframes; ++k) {
        const double yaw = std::numbers::pi * static_cast<double>(k) / static_cast<double>(turn + 1);
        out.poses.push_back(planar_pose(end_x, 0.0, yaw));
        out.place_of.push_back(next_place++);
    }
    for (std::size_t m = 1; out.poses.size() < cfg.keyframes; ++m) {
        const std::size_t mirror = out_leg - 1 - std::min(m, out_leg - 1);
        out.poses.push_back(planar_pose(static_cast<double>(mirror) * step, 0.0, std::numbers::pi));
        out.place_of.push_back(out.place_of[mirror]);
    }
    return out;
}

Tangent7 drift_noise(std::mt19937_64& rng, const DriftParams& drift) {
    std::normal_distribution<double> unit(0.0, 1.0);
    Tangent7 v;
    for (int k = 0; k < 3; ++k) v(k) = drift.translation_sigma * unit(rng);
    for (int k = 3; k < 6; ++k) v(k) = drift.rotation_sigma * unit(rng);
    v(6) = drift.scale_sigma * unit(rng);
    return v;
}

Vec3 uniform_in_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec3 p;
    for (int k = 0; k < 3; ++k) {
        p(k) = kBoxMin(k) + (kBoxMax(k) - kBoxMin(k)) * unit(rng);
    }
    return p;
}

}  // namespace

std::string to_string(TrajectoryShape shape) {
    switch (shape) {
        case TrajectoryShape::Square: return "square";
        case TrajectoryShape::FigureEight: return "figure-eight";
        case TrajectoryShape::Corridor: return "corridor";
    }
    return "square";
}

TrajectoryShape parse_shape(const std::string& name) {
    if (name == "square") return TrajectoryShape::Square;
    if (name == "figure-eight") return TrajectoryShape::FigureEight;
    if (name == "corridor") return TrajectoryShape::Corridor;
    throw Error(ErrorCode::InvalidConfig, "unknown trajectory shape '" + name + "'");
}

std::string to_string(Alignment alignment) {
    switch (alignment) {
        case Alignment::None: return "none";
        case Alignment::SE3: return "se3";
        case Alignment::Sim3: return "sim3";
    }
    return "none";
}

Alignment parse_alignment(const std::string& name) {
    if (name == "none") return Alignment::None;
    if (name == "se3") return Alignment::SE3;
    if (name == "sim3") return Alignment::Sim3;
    throw Error(ErrorCode::InvalidConfig, "unknown alignment '" + name + "'");
}

std::size_t WorldConfig::effective_period() const {
    if (revisit_period > 0) {
        return revisit_period;
    }
    return std::max<std::size_t>(1, (keyframes * 9) / 10);
}

void validate(const WorldConfig& cfg) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (cfg.keyframes < 10) fail("keyframe count must be at least 10");
    const auto& d = cfg.drift;
    if (!(d.rotation_sigma >= 0.0) || !(d.translation_sigma >= 0.0) || !(d.scale_sigma >= 0.0)) {
        fail("drift sigmas must be non-negative");
    }
    const auto& p = cfg.places;
    if (p.descriptor_dim == 0 || p.signatures_per_place == 0 || p.locals_per_signature == 0) {
        fail("place signature sizes must be positive");
    }
    if (!(p.noise_sigma >= 0.0) || !(p.separation > 0.0)) {
        fail("place noise must be non-negative and separation positive");
    }
    const auto& c = cfg.correspondences;
    if (!(c.outlier_ratio >= 0.0 && c.outlier_ratio < 1.0)) fail("outlier ratio must be in [0, 1)");
    if (c.count < 3) fail("correspondence count must be at least 3");
    if (!(c.noise_sigma >= 0.0)) fail("correspondence noise must be non-negative");
    if (!(cfg.extent > 0.0) || !(cfg.frame_interval > 0.0)) fail("extent and frame interval must be positive");
    if (cfg.shape != TrajectoryShape::Corridor && cfg.effective_period() < 4) {
        fail("revisit period must be at least 4 frames");
    }
}

bool SyntheticDataset::same_place(FrameId a, FrameId b) const {
    if (a >= place_of.size() || b >= place_of.size()) {
        return false;
    }
    return place_of[a] == place_of[b];
}

std::vector<Sim3> integrate(const Sim3& start, std::span<const Sim3> relatives) {
    std::vector<Sim3> out;
    out.reserve(relatives.size() + 1);
    out.push_back(start);
    for (const auto& rel : relatives) {
        out.push_back(out.back() * rel);
    }
    return out;
}

SyntheticDataset generate(const WorldConfig& cfg) {
    validate(cfg);
    SyntheticDataset ds;
    ds.config = cfg;

    Layout layout = cfg.shape == TrajectoryShape::Corridor ? corridor_layout(cfg) : lap_layout(cfg);
    ds.ground_truth = std::move(layout.poses);
    ds.place_of = std::move(layout.place_of);

    const std::size_t n = ds.ground_truth.size();
    for (std::size_t i = 0; i < n; ++i) {
        ds.timestamps.push_back(static_cast<double>(i) * cfg.frame_interval);
    }

    const bool noisy = cfg.drift.rotation_sigma > 0.0 || cfg.drift.translation_sigma > 0.0 ||
                       cfg.drift.scale_sigma > 0.0;
    std::mt19937_64 drift_rng(derive_seed(cfg.seed, {kDrift}));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        Sim3 rel = sim3_inverse(ds.ground_truth[i]) * ds.ground_truth[i + 1];
        if (noisy) {
            rel = rel * sim3_exp(drift_noise(drift_rng, cfg.drift));
        }
        ds.odometry.push_back(rel);
    }

    std::vector<std::size_t> first_frame_of_place;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t place = ds.place_of[i];
        if (place >= first_frame_of_place.size()) {
            first_frame_of_place.resize(place + 1, n);
        }
        if (first_frame_of_place[place] == n) {
            first_frame_of_place[place] = i;
        } else {
            ds.revisits.emplace_back(i, first_frame_of_place[place]);
        }
    }

    const auto& pp = cfg.places;
    const auto dim = static_cast<Eigen::Index>(pp.descriptor_dim);
    const auto rows = static_cast<Eigen::Index>(pp.signatures_per_place * pp.locals_per_signature);
    std::vector<LocalDescriptorSet> signatures(first_frame_of_place.size());
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t place = 0; place < signatures.size(); ++place) {
        std::mt19937_64 rng(derive_seed(cfg.seed, {kSignature, place}));
        LocalDescriptorSet sig(static_cast<Eigen::Index>(pp.signatures_per_place), dim);
        for (Eigen::Index r = 0; r < sig.rows(); ++r) {
            Eigen::RowVectorXd v(dim);
            do {
                for (Eigen::Index c = 0; c < dim; ++c) v(c) = unit(rng);
            } while (v.norm() < 1e-9);
            sig.row(r) = pp.separation * v.normalized();
        }
        signatures[place] = std::move(sig);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 rng(derive_seed(cfg.seed, {kLocals, i}));
        const auto& sig = signatures[ds.place_of[i]];
        LocalDescriptorSet locals(rows, dim);
        Eigen::Index row = 0;
        for (Eigen::Index s = 0; s < sig.rows(); ++s) {
            for (std::size_t rep = 0; rep < pp.locals_per_signature; ++rep, ++row) {
                for (Eigen::Index c = 0; c < dim; ++c) {
                    locals(row, c) = sig(s, c) + pp.noise_sigma * unit(rng);
                }
            }
        }
        ds.locals.push_back(std::move(locals));
    }
    return ds;
}

CorrespondenceSet make_correspondences(const SyntheticDataset& dataset, FrameId frame_a,
                                       FrameId frame_b, std::size_t n, double outlier_ratio,
                                       double noise_sigma, std::uint64_t seed) {
    if (frame_a >= dataset.size() || frame_b >= dataset.size()) {
        throw Error(ErrorCode::InvalidFrames, "frame pair (" + std::to_string(frame_a) + ", " +
                                                  std::to_string(frame_b) + ") outside the dataset");
    }
    if (n < 3) {
        throw Error(ErrorCode::InvalidFrames, "need at least 3 correspondences");
    }
    if (!(outlier_ratio >= 0.0 && outlier_ratio <= 1.0) || !(noise_sigma >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "outlier ratio must lie in [0, 1] and noise be non-negative");
    }

    CorrespondenceSet out;
    out.ground_truth = sim3_inverse(dataset.ground_truth[frame_b]) * dataset.ground_truth[frame_a];
    out.inlier_count = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - outlier_ratio)));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::pair<Correspondence, bool>> pairs;
    pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Correspondence c;
        c.p = uniform_in_box(rng);
        const bool inlier = i < out.inlier_count;
        if (inlier) {
            c.q = out.ground_truth * c.p;
            if (noise_sigma > 0.0) {
                c.q += noise_sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
            }
        } else {
            c.q = out.ground_truth * uniform_in_box(rng);
        }
        pairs.emplace_back(c, inlier);
    }
    std::shuffle(pairs.begin(), pairs.end(), rng);
    for (auto& [c, inlier] : pairs) {
        out.pairs.push_back(c);
        out.is_inlier.push_back(inlier);
    }
    return out;
}

double ate_rmse(std::span<const Vec3> gt, std::span<const Vec3> est, Alignment alignment) {
    if (gt.size() != est.size()) {
        throw Error(ErrorCode::LengthMismatch, "trajectories have " + std::to_string(gt.size()) +
                                                   " and " + std::to_string(est.size()) + " poses");
    }
    if (gt.empty()) {
        return 0.0;
    }
    Sim3 align;
    if (alignment != Alignment::None && gt.size() >= 3) {
        UmeyamaOptions opts;
        opts.with_scale = alignment == Alignment::Sim3;
        opts.require_rank_two = false;
        if (auto fitted = try_umeyama(est, gt, opts)) {
            align = *fitted;
        } else {
            // Every estimated position coincides: only a translation is recoverable.
            Vec3 mu_gt = Vec3::Zero();
            Vec3 mu_est = Vec3::Zero();
            for (std::size_t i = 0; i < gt.size(); ++i) {
                mu_gt += gt[i];
                mu_est += est[i];
            }
            align.t = (mu_gt - mu_est) / static_cast<double>(gt.size());
        }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        sum += (gt[i] - align * est[i]).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(gt.size()));
}

double ate_rmse(const Trajectory& gt, const Trajectory& est, Alignment alignment) {
    if (gt.size() != est.size()) {
        throw Error(ErrorCode::LengthMismatch, "trajectories have " + std::to_string(gt.size()) +
                                                   " and " + std::to_string(est.size()) + " poses");
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i].frame_id != est[i].frame_id) {
            throw Error(ErrorCode::LengthMismatch,
                        "frame ids differ at index " + std::to_string(i));
        }
    }
    const auto a = positions(gt);
    const auto b = positions(est);
    return ate_rmse(a, b, alignment);
}

std::vector<Vec3> positions(const Trajectory& trajectory) {
    std::vector<Vec3> out;
    out.reserve(trajectory.size());
    for (const auto& e : trajectory) out.push_back(e.pose.t);
    return out;
}

std::vector<Vec3> positions(std::span<const Sim3> poses) {
    std::vector<Vec3> out;
    out.reserve(poses.size());
    for (const auto& p : poses) out.push_back(p.t);
    return out;
}

Trajectory make_trajectory(std::span<const Sim3> poses, std::span<const double> timestamps) {
    Trajectory out;
    out.reserve(poses.size());
    for (std::size_t i = 0; i < poses.size(); ++i) {
        TrajectoryEntry e;
        e.frame_id = i;
        e.timestamp = i < timestamps.size() ? timestamps[i] : static_cast<double>(i);
        e.pose = poses[i];
        if (i > 0) e.reference = i - 1;
        out.push_back(e);
    }
    return out;
}

}  // namespace loopforge::harness
