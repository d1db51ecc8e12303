/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>

namespace gsedit {

    using Vec2 = Eigen::Vector2d;
    using Vec3 = Eigen::Vector3d;
    /// Quaternions are stored as (w, x, y, z), the layout of rot_0..rot_3 in GS PLY files.
    using Vec4 = Eigen::Vector4d;
    using Mat2 = Eigen::Matrix2d;
    using Mat3 = Eigen::Matrix3d;

    constexpr double kPi = 3.14159265358979323846;

    inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

    inline double logistic(double x) {
        if (x >= 0.0) {
            return 1.0 / (1.0 + std::exp(-x));
        }
        const double e = std::exp(x);
        return e / (1.0 + e);
    }

    inline Vec4 identity_quat() { return {1.0, 0.0, 0.0, 0.0}; }

    inline Vec4 normalized_quat(const Vec4& q) { return q / q.norm(); }

    /// Rotation matrix of a unit quaternion (w, x, y, z).
    inline Mat3 quat_to_matrix(const Vec4& q) {
        const double w = q[0], x = q[1], y = q[2], z = q[3];
        Mat3 r;
        r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
            2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
            2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
        return r;
    }

    /// Gradient of a scalar with respect to a unit quaternion, given the gradient
    /// with respect to the rotation matrix it produces.
    inline Vec4 quat_matrix_vjp(const Vec4& q, const Mat3& g) {
        const double w = q[0], x = q[1], y = q[2], z = q[3];
        Vec4 out;
        out[0] = 2.0 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) + x * g(2, 1));
        out[1] = 2.0 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2.0 * x * g(1, 1) - w * g(1, 2) +
                        z * g(2, 0) + w * g(2, 1) - 2.0 * x * g(2, 2));
        out[2] = 2.0 * (-2.0 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2) -
                        w * g(2, 0) + z * g(2, 1) - 2.0 * y * g(2, 2));
        out[3] = 2.0 * (-2.0 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) - 2.0 * z * g(1, 1) +
                        y * g(1, 2) + x * g(2, 0) + y * g(2, 1));
        return out;
    }

    /// Chain rule through q -> q / |q|.
    inline Vec4 normalize_vjp(const Vec4& q, const Vec4& grad_unit) {
        const double n = q.norm();
        const Vec4 u = q / n;
        return (grad_unit - u * u.dot(grad_unit)) / n;
    }

    /// Quaternion (w, x, y, z) of a rotation matrix.
    inline Vec4 matrix_to_quat(const Mat3& r) {
        const Eigen::Quaterniond q(r);
        return Vec4(q.w(), q.x(), q.y(), q.z()).normalized();
    }

    /// Quaternion for a rotation of `angle_rad` about `axis`.
    inline Vec4 axis_angle_quat(const Vec3& axis, double angle_rad) {
        const Vec3 a = axis.normalized();
        const double s = std::sin(0.5 * angle_rad);
        return {std::cos(0.5 * angle_rad), a.x() * s, a.y() * s, a.z() * s};
    }

} // namespace gsedit
