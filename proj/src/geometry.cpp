#include "loopforge/geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include "loopforge/error.hpp"

namespace loopforge {

namespace {

constexpr double kAngleNearPiMargin = 1e-6;

// Translational coupling matrix W(sigma, phi) = int_0^1 e^{sigma u} exp(u phi^) du,
// the translation of exp(rho, phi, sigma) is W * rho. Computed as the upper-right
// block of exp([[sigma I + phi^, I], [0, 0]]).
Mat3 translation_coupling(const Vec3& phi, double sigma) {
    Eigen::Matrix<double, 6, 6> block = Eigen::Matrix<double, 6, 6>::Zero();
    block.topLeftCorner<3, 3>() = skew(phi) + sigma * Mat3::Identity();
    block.topRightCorner<3, 3>() = Mat3::Identity();
    const Eigen::Matrix<double, 6, 6> e = block.exp();
    return e.topRightCorner<3, 3>();
}

}  // namespace

Sim3::Sim3(double scale, const Eigen::Quaterniond& rotation, const Vec3& translation)
    : s(scale), r(rotation.normalized()), t(translation) {}

Sim3::Sim3(double scale, const Mat3& rotation, const Vec3& translation)
    : s(scale), r(Eigen::Quaterniond(rotation).normalized()), t(translation) {}

Eigen::Matrix4d Sim3::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = s * rotation_matrix();
    m.topRightCorner<3, 1>() = t;
    return m;
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

Eigen::Quaterniond so3_exp(const Vec3& phi) {
    const double theta = phi.norm();
    const double half = 0.5 * theta;
    const double k = theta < 1e-8 ? 0.5 - theta * theta / 48.0 : std::sin(half) / theta;
    Eigen::Quaterniond q(std::cos(half), k * phi.x(), k * phi.y(), k * phi.z());
    return q.normalized();
}

Vec3 so3_log(const Eigen::Quaterniond& q_in) {
    Eigen::Quaterniond q = q_in.normalized();
    if (q.w() < 0.0) {
        q.coeffs() = -q.coeffs();
    }
    const Vec3 v = q.vec();
    const double vn = v.norm();
    const double w = q.w();
    double k;
    if (vn < 1e-8) {
        k = 2.0 / w * (1.0 - vn * vn / (3.0 * w * w));
    } else {
        k = 2.0 * std::atan2(vn, w) / vn;
    }
    return k * v;
}

Eigen::Quaterniond rot_z(double radians) {
    return Eigen::Quaterniond(Eigen::AngleAxisd(radians, Vec3::UnitZ()));
}

double rotation_angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
    return so3_log(a.conjugate() * b).norm();
}

Vec3 sim3_apply(const Sim3& a, const Vec3& p) {
    return a.s * (a.r * p) + a.t;
}

Sim3 sim3_compose(const Sim3& a, const Sim3& b) {
    Sim3 out;
    out.s = a.s * b.s;
    out.r = (a.r * b.r).normalized();
    out.t = a.s * (a.r * b.t) + a.t;
    return out;
}

Sim3 sim3_inverse(const Sim3& a) {
    Sim3 out;
    out.s = 1.0 / a.s;
    out.r = a.r.conjugate().normalized();
    out.t = -(out.s * (out.r * a.t));
    return out;
}

Tangent7 sim3_log(const Sim3& a) {
    const Vec3 phi = so3_log(a.r);
    if (phi.norm() >= std::numbers::pi - kAngleNearPiMargin) {
        throw Error(ErrorCode::AngleNearPi, "rotation angle too close to pi for sim3 log");
    }
    const double sigma = std::log(a.s);
    const Mat3 w = translation_coupling(phi, sigma);
    Tangent7 v;
    v.head<3>() = w.partialPivLu().solve(a.t);
    v.segment<3>(3) = phi;
    v(6) = sigma;
    return v;
}

Sim3 sim3_exp(const Tangent7& v) {
    const Vec3 rho = v.head<3>();
    const Vec3 phi = v.segment<3>(3);
    const double sigma = v(6);
    Sim3 out;
    out.s = std::exp(sigma);
    out.r = so3_exp(phi);
    out.t = translation_coupling(phi, sigma) * rho;
    return out;
}

Mat7 sim3_adjoint(const Sim3& a) {
    const Mat3 rot = a.rotation_matrix();
    Mat7 adj = Mat7::Zero();
    adj.block<3, 3>(0, 0) = a.s * rot;
    adj.block<3, 3>(0, 3) = skew(a.t) * rot;
    adj.block<3, 1>(0, 6) = -a.t;
    adj.block<3, 3>(3, 3) = rot;
    adj(6, 6) = 1.0;
    return adj;
}

Mat7 sim3_ad(const Tangent7& v) {
    const Vec3 rho = v.head<3>();
    const Vec3 phi = v.segment<3>(3);
    const double sigma = v(6);
    Mat7 ad = Mat7::Zero();
    ad.block<3, 3>(0, 0) = skew(phi) + sigma * Mat3::Identity();
    ad.block<3, 3>(0, 3) = skew(rho);
    ad.block<3, 1>(0, 6) = -rho;
    ad.block<3, 3>(3, 3) = skew(phi);
    return ad;
}

Mat7 sim3_right_jacobian(const Tangent7& v) {
    // J_r = sum_k (-ad_v)^k / (k+1)!; the series is entire, so truncating once the
    // terms fall below double precision is exact to rounding.
    const Mat7 minus_ad = -sim3_ad(v);
    Mat7 term = Mat7::Identity();
    Mat7 sum = Mat7::Identity();
    for (int k = 1; k < 60; ++k) {
        term = term * minus_ad / static_cast<double>(k + 1);
        sum += term;
        if (term.lpNorm<Eigen::Infinity>() < 1e-18) {
            break;
        }
    }
    return sum;
}

}  // namespace loopforge
