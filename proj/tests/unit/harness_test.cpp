#include <gtest/gtest.h>

#include <random>

#include "loopforge/error.hpp"
#include "loopforge/harness.hpp"
#include "loopforge/providers.hpp"
#include "random_sim3.hpp"

using namespace loopforge;
using loopforge::testing::max_abs_diff;
using loopforge::testing::random_sim3;

namespace {

harness::WorldConfig drift_world(std::uint64_t seed) {
    harness::WorldConfig cfg;
    cfg.seed = seed;
    cfg.drift = {0.002, 0.01, 0.001};
    return cfg;
}

ErrorCode code_of(auto fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

}  // namespace

TEST(Generate, ZeroNoiseOdometryIntegratesToGroundTruth) {
    for (auto shape : {harness::TrajectoryShape::Square, harness::TrajectoryShape::FigureEight,
                       harness::TrajectoryShape::Corridor}) {
        harness::WorldConfig cfg;
        cfg.shape = shape;
        const auto ds = harness::generate(cfg);
        ASSERT_EQ(ds.odometry.size() + 1, ds.size());
        const auto chained = harness::integrate(ds.ground_truth.front(), ds.odometry);
        double worst = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) worst = std::max(worst, max_abs_diff(chained[i], ds.ground_truth[i]));
        EXPECT_LT(worst, 1e-12) << harness::to_string(shape);
    }
}

TEST(Generate, SquareRevisitsItsStart) {
    const auto ds = harness::generate(harness::WorldConfig{});
    ASSERT_EQ(ds.size(), 400u);
    // Default period is 360 frames: frame 380 revisits frame 20.
    EXPECT_TRUE(ds.same_place(380, 20));
    EXPECT_LT((ds.ground_truth[380].t - ds.ground_truth[20].t).norm(), 1e-9);
    EXPECT_FALSE(ds.same_place(200, 20));
    EXPECT_EQ(ds.revisits.size(), 40u);
    for (const auto& [later, earlier] : ds.revisits) {
        EXPECT_GT(later, earlier);
        EXPECT_TRUE(ds.same_place(later, earlier));
    }
    for (std::size_t i = 1; i < ds.size(); ++i) EXPECT_GT(ds.timestamps[i], ds.timestamps[i - 1]);
}

TEST(Generate, CorridorReturnLegMirrorsTheOutwardLeg) {
    harness::WorldConfig cfg;
    cfg.shape = harness::TrajectoryShape::Corridor;
    const auto ds = harness::generate(cfg);
    ASSERT_FALSE(ds.revisits.empty());
    for (const auto& [later, earlier] : ds.revisits) {
        EXPECT_LT((ds.ground_truth[later].t - ds.ground_truth[earlier].t).norm(), 1e-9);
    }
}

TEST(Generate, PartialLapHasNoRevisits) {
    harness::WorldConfig cfg;
    cfg.keyframes = 100;
    cfg.revisit_period = 150;
    EXPECT_TRUE(harness::generate(cfg).revisits.empty());
}

TEST(Generate, DeterministicPerSeed) {
    const auto a = harness::generate(drift_world(3));
    const auto b = harness::generate(drift_world(3));
    const auto c = harness::generate(drift_world(4));
    for (std::size_t i = 0; i < a.odometry.size(); ++i) {
        EXPECT_EQ(a.odometry[i].t, b.odometry[i].t);
        EXPECT_EQ(a.odometry[i].r.coeffs(), b.odometry[i].r.coeffs());
        EXPECT_EQ(a.odometry[i].s, b.odometry[i].s);
    }
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.locals[i], b.locals[i]);
    EXPECT_NE(a.odometry[0].t, c.odometry[0].t);
}

TEST(Generate, DriftAccumulates) {
    const auto ds = harness::generate(drift_world(5));
    const auto chained = harness::integrate(ds.ground_truth.front(), ds.odometry);
    const double early = (chained[10].t - ds.ground_truth[10].t).norm();
    const double late = (chained.back().t - ds.ground_truth.back().t).norm();
    EXPECT_GT(late, early);
    EXPECT_GT(late, 0.05);
}

TEST(Generate, SamePlaceDescriptorsAreCloser) {
    const auto ds = harness::generate(harness::WorldConfig{});
    const double same = (ds.locals[380] - ds.locals[20]).norm();
    const double other = (ds.locals[200] - ds.locals[20]).norm();
    EXPECT_LT(same, other);
}

TEST(Generate, InvalidConfig) {
    harness::WorldConfig cfg;
    cfg.keyframes = 5;
    EXPECT_EQ(code_of([&] { harness::generate(cfg); }), ErrorCode::InvalidConfig);
    cfg = {};
    cfg.correspondences.outlier_ratio = 1.0;
    EXPECT_EQ(code_of([&] { harness::generate(cfg); }), ErrorCode::InvalidConfig);
    cfg = {};
    cfg.drift.rotation_sigma = -1.0;
    EXPECT_EQ(code_of([&] { harness::generate(cfg); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { harness::parse_shape("spiral"); }), ErrorCode::InvalidConfig);
}

TEST(MakeCorrespondences, NoOutliersRecoversTheTransform) {
    harness::WorldConfig cfg;
    cfg.seed = 6;
    const auto ds = harness::generate(cfg);
    const auto set = harness::make_correspondences(ds, 380, 20, 200, 0.0, 0.0, 9);
    EXPECT_EQ(set.inlier_count, 200u);
    std::vector<Vec3> p, q;
    for (const auto& c : set.pairs) {
        p.push_back(c.p);
        q.push_back(c.q);
    }
    EXPECT_LT(max_abs_diff(umeyama(p, q), set.ground_truth), 1e-9);
    const Sim3 want = sim3_inverse(ds.ground_truth[20]) * ds.ground_truth[380];
    EXPECT_LT(max_abs_diff(set.ground_truth, want), 1e-12);
}

TEST(MakeCorrespondences, HalfOutliersGiveExactlyHalfInliers) {
    const auto ds = harness::generate(harness::WorldConfig{});
    const auto set = harness::make_correspondences(ds, 380, 20, 200, 0.5, 0.01, 10);
    EXPECT_EQ(set.inlier_count, 100u);
    ASSERT_EQ(set.is_inlier.size(), 200u);
    std::size_t flagged = 0, close = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        flagged += set.is_inlier[i] ? 1 : 0;
        const double err = (set.ground_truth * set.pairs[i].p - set.pairs[i].q).norm();
        if (set.is_inlier[i]) {
            EXPECT_LT(err, 0.1);
            ++close;
        }
    }
    EXPECT_EQ(flagged, 100u);
    EXPECT_EQ(close, 100u);
}

TEST(MakeCorrespondences, SameFrameIsIdentity) {
    const auto ds = harness::generate(drift_world(11));
    const auto set = harness::make_correspondences(ds, 42, 42, 50, 0.0, 0.0, 12);
    EXPECT_LT(max_abs_diff(set.ground_truth, Sim3::identity()), 1e-12);
    for (const auto& c : set.pairs) EXPECT_LT((c.p - c.q).norm(), 1e-12);
}

TEST(MakeCorrespondences, Errors) {
    const auto ds = harness::generate(harness::WorldConfig{});
    EXPECT_EQ(code_of([&] { harness::make_correspondences(ds, 400, 0, 50, 0.0, 0.0, 0); }), ErrorCode::InvalidFrames);
    EXPECT_EQ(code_of([&] { harness::make_correspondences(ds, 1, 0, 2, 0.0, 0.0, 0); }), ErrorCode::InvalidFrames);
    EXPECT_EQ(code_of([&] { harness::make_correspondences(ds, 1, 0, 50, 1.5, 0.0, 0); }), ErrorCode::InvalidConfig);
}

TEST(AteRmse, HandComputedExamples) {
    const std::vector<Vec3> gt = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    EXPECT_EQ(harness::ate_rmse(gt, gt, harness::Alignment::None), 0.0);
    const std::vector<Vec3> shifted = {{0, 1, 0}, {1, 1, 0}, {2, 1, 0}};
    EXPECT_NEAR(harness::ate_rmse(gt, shifted, harness::Alignment::None), 1.0, 1e-15);
    EXPECT_LT(harness::ate_rmse(gt, shifted, harness::Alignment::SE3), 1e-12);
    const std::vector<Vec3> one_off = {{0, 0, 0}, {1, 0, 0}, {2, 0, 3}};
    EXPECT_NEAR(harness::ate_rmse(gt, one_off, harness::Alignment::None), std::sqrt(3.0), 1e-15);
    EXPECT_EQ(code_of([&] { harness::ate_rmse(gt, std::span(shifted).first(2), harness::Alignment::None); }),
              ErrorCode::LengthMismatch);
}

TEST(AteRmse, InvariantUnderTheAlignedGroup) {
    std::mt19937_64 rng(13);
    const auto ds = harness::generate(drift_world(14));
    const auto gt = harness::positions(ds.ground_truth);
    const auto odo = harness::positions(harness::integrate(ds.ground_truth.front(), ds.odometry));
    const double base_sim3 = harness::ate_rmse(gt, odo, harness::Alignment::Sim3);
    const double base_se3 = harness::ate_rmse(gt, odo, harness::Alignment::SE3);
    for (int trial = 0; trial < 5; ++trial) {
        const Sim3 g = random_sim3(rng);
        const Sim3 rigid(1.0, g.rotation_matrix(), g.t);
        std::vector<Vec3> moved_sim, moved_rigid;
        for (const auto& p : odo) {
            moved_sim.push_back(g * p);
            moved_rigid.push_back(rigid * p);
        }
        EXPECT_NEAR(harness::ate_rmse(gt, moved_sim, harness::Alignment::Sim3), base_sim3, 1e-9);
        EXPECT_NEAR(harness::ate_rmse(gt, moved_rigid, harness::Alignment::SE3), base_se3, 1e-9);
    }
    EXPECT_LE(base_sim3, base_se3 + 1e-12);
}

TEST(AteRmse, TrajectoryOverloadChecksFrameIds) {
    const auto ds = harness::generate(harness::WorldConfig{});
    const auto gt = harness::make_trajectory(ds.ground_truth, ds.timestamps);
    EXPECT_LT(harness::ate_rmse(gt, gt, harness::Alignment::Sim3), 1e-12);
    EXPECT_EQ(harness::ate_rmse(gt, gt, harness::Alignment::None), 0.0);
    auto other = gt;
    other[3].frame_id = 999;
    EXPECT_EQ(code_of([&] { harness::ate_rmse(gt, other, harness::Alignment::None); }), ErrorCode::LengthMismatch);
}

TEST(HarnessProviders, ServeTheDataset) {
    const auto ds = harness::generate(harness::WorldConfig{});
    const HarnessProviders hp(ds);
    const auto frames = hp.keyframes();
    ASSERT_EQ(frames.size(), ds.size());
    EXPECT_EQ(frames[7].frame_id, 7u);
    EXPECT_EQ(frames[7].timestamp, ds.timestamps[7]);
    EXPECT_EQ(hp.local_descriptors(9), ds.locals[9]);
    EXPECT_LT(max_abs_diff(hp.relative(4, 5), ds.odometry[4]), 0.0 + 1e-300);
    EXPECT_EQ(code_of([&] { hp.relative(4, 6); }), ErrorCode::ProviderDesync);

    // Same place: consistent with the ground truth; different place: clutter.
    const auto same = hp.correspondences(380, 20);
    const auto again = hp.correspondences(380, 20);
    ASSERT_EQ(same.size(), again.size());
    for (std::size_t i = 0; i < same.size(); ++i) EXPECT_EQ(same[i].q, again[i].q);
    RansacConfig rc;
    EXPECT_TRUE(ransac_sim3(same, rc).accepted);
    EXPECT_FALSE(ransac_sim3(hp.correspondences(200, 20), rc).accepted);
    EXPECT_EQ(same_place_pairs(ds).size(), ds.revisits.size());
}
