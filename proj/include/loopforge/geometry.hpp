#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace loopforge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tangent coordinates of sim(3), ordered (translation[0..2], rotation[3..5],
/// log-scale[6]). Residuals and Jacobians in the pose graph use this order.
using Tangent7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;

/// Similarity transform x -> s * R * x + t.
///
/// Scale is stored linearly (as Umeyama produces it); the rotation is a unit
/// quaternion that is renormalized after every composition so long odometry
/// chains do not drift off the manifold.
struct Sim3 {
    double s = 1.0;
    Eigen::Quaterniond r = Eigen::Quaterniond::Identity();
    Vec3 t = Vec3::Zero();

    Sim3() = default;
    Sim3(double scale, const Eigen::Quaterniond& rotation, const Vec3& translation);
    Sim3(double scale, const Mat3& rotation, const Vec3& translation);

    static Sim3 identity() { return {}; }

    Mat3 rotation_matrix() const { return r.toRotationMatrix(); }
    Eigen::Matrix4d matrix() const;
};

Vec3 sim3_apply(const Sim3& a, const Vec3& p);

/// Result applies b first, then a.
Sim3 sim3_compose(const Sim3& a, const Sim3& b);

Sim3 sim3_inverse(const Sim3& a);

/// Throws Error(AngleNearPi) when the rotation angle is within 1e-6 of pi.
Tangent7 sim3_log(const Sim3& a);
Sim3 sim3_exp(const Tangent7& v);

inline Sim3 operator*(const Sim3& a, const Sim3& b) { return sim3_compose(a, b); }
inline Vec3 operator*(const Sim3& a, const Vec3& p) { return sim3_apply(a, p); }

/// Adjoint: a * exp(v) * a^-1 == exp(adjoint(a) * v).
Mat7 sim3_adjoint(const Sim3& a);

/// Matrix of the Lie bracket [v, .] in tangent coordinates.
Mat7 sim3_ad(const Tangent7& v);

/// Right Jacobian: exp(v + d) ~= exp(v) * exp(J_r(v) * d) for small d.
Mat7 sim3_right_jacobian(const Tangent7& v);

Eigen::Quaterniond so3_exp(const Vec3& phi);
Vec3 so3_log(const Eigen::Quaterniond& q);

Mat3 skew(const Vec3& v);

/// Geodesic angle between two rotations, in radians.
double rotation_angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Rotation about +z by `radians`.
Eigen::Quaterniond rot_z(double radians);

}  // namespace loopforge
