/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/camera.hpp"
#include "gsedit/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace gsedit {

    void Intrinsics::validate() const {
        if (!(fx > 0.0) || !(fy > 0.0)) {
            fail(ErrorCode::Validation, "intrinsics focal lengths must be positive");
        }
        if (width <= 0 || height <= 0) {
            fail(ErrorCode::Validation, "intrinsics image size must be positive");
        }
        if (!std::isfinite(cx) || !std::isfinite(cy)) {
            fail(ErrorCode::Validation, "intrinsics principal point must be finite");
        }
    }

    Intrinsics Intrinsics::from_fov(int width, int height, double fov_y_deg) {
        if (!(fov_y_deg > 0.0 && fov_y_deg < 180.0)) {
            fail(ErrorCode::Config, "field of view must be in (0, 180) degrees");
        }
        Intrinsics k;
        k.width = width;
        k.height = height;
        k.fy = 0.5 * height / std::tan(0.5 * deg_to_rad(fov_y_deg));
        k.fx = k.fy;
        k.cx = 0.5 * (width - 1);
        k.cy = 0.5 * (height - 1);
        k.validate();
        return k;
    }

    CameraPose CameraPose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
        const Vec3 forward = (target - eye).normalized();
        Vec3 right = forward.cross(up);
        if (right.norm() < 1e-12) {
            // Looking straight along the up axis; any perpendicular right vector works.
            right = forward.cross(Vec3::UnitZ());
        }
        right.normalize();
        const Vec3 down = forward.cross(right);
        Mat3 r;
        r.row(0) = right.transpose();
        r.row(1) = down.transpose();
        r.row(2) = forward.transpose();
        CameraPose pose;
        pose.rotation = matrix_to_quat(r);
        pose.translation = -(quat_to_matrix(pose.rotation) * eye);
        return pose;
    }

    void PoseSamplerConfig::validate() const {
        if (!look_at.allFinite()) {
            fail(ErrorCode::Config, "pose sampler look_at must be finite");
        }
        if (!(radius_min > 0.0) || !(radius_max >= radius_min)) {
            fail(ErrorCode::Config, "pose sampler radius range must satisfy 0 < min <= max");
        }
        if (!(elevation_max_deg >= elevation_min_deg) || elevation_min_deg < -90.0 || elevation_max_deg > 90.0) {
            fail(ErrorCode::Config, "pose sampler elevation range must be a non-empty interval within [-90, 90]");
        }
        if (!(azimuth_max_deg >= azimuth_min_deg) || azimuth_max_deg - azimuth_min_deg > 360.0) {
            fail(ErrorCode::Config, "pose sampler azimuth range must be a non-empty interval of at most 360 degrees");
        }
        if (!(interval_deg > 0.0)) {
            fail(ErrorCode::Config, "pose sampler interval must be positive");
        }
    }

    namespace {
        constexpr double kGridTol = 1e-9;

        bool divides(double span, double interval) {
            const double steps = span / interval;
            return std::abs(steps - std::round(steps)) < kGridTol;
        }

        bool full_turn(const PoseSamplerConfig& cfg) {
            return cfg.azimuth_max_deg - cfg.azimuth_min_deg >= 360.0 - kGridTol;
        }
    } // namespace

    void PoseSamplerConfig::validate_grid() const {
        validate();
        if (!(radius_max > radius_min)) {
            fail(ErrorCode::Config, "grid sampling needs a radius range of nonzero width");
        }
        const double el_span = elevation_max_deg - elevation_min_deg;
        const double az_span = azimuth_max_deg - azimuth_min_deg;
        if (!divides(el_span, interval_deg)) {
            fail(ErrorCode::Config, "grid interval does not divide the elevation span");
        }
        if (!divides(az_span, interval_deg)) {
            fail(ErrorCode::Config, "grid interval does not divide the azimuth span");
        }
    }

    CameraPose orbit_pose(const Vec3& look_at, double radius, double elevation_deg, double azimuth_deg) {
        const double el = deg_to_rad(elevation_deg);
        const double az = deg_to_rad(azimuth_deg);
        const Vec3 offset(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
        return CameraPose::look_at(look_at + radius * offset, look_at);
    }

    CameraPose sample_random_pose(const PoseSamplerConfig& cfg, std::mt19937_64& rng) {
        cfg.validate();
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double r = cfg.radius_min + (cfg.radius_max - cfg.radius_min) * unit(rng);
        const double el = cfg.elevation_min_deg + (cfg.elevation_max_deg - cfg.elevation_min_deg) * unit(rng);
        const double az = cfg.azimuth_min_deg + (cfg.azimuth_max_deg - cfg.azimuth_min_deg) * unit(rng);
        return orbit_pose(cfg.look_at, r, el, az);
    }

    std::vector<CameraPose> sample_refinement_grid(const PoseSamplerConfig& cfg) {
        cfg.validate_grid();
        const double radius = 0.5 * (cfg.radius_min + cfg.radius_max);
        const int el_steps =
            static_cast<int>(std::lround((cfg.elevation_max_deg - cfg.elevation_min_deg) / cfg.interval_deg));
        int az_steps = static_cast<int>(std::lround((cfg.azimuth_max_deg - cfg.azimuth_min_deg) / cfg.interval_deg));
        const int az_count = full_turn(cfg) ? std::max(az_steps, 1) : az_steps + 1;

        std::vector<CameraPose> poses;
        poses.reserve(static_cast<std::size_t>((el_steps + 1) * az_count));
        for (int e = 0; e <= el_steps; ++e) {
            const double el = cfg.elevation_min_deg + e * cfg.interval_deg;
            for (int a = 0; a < az_count; ++a) {
                const double az = cfg.azimuth_min_deg + a * cfg.interval_deg;
                poses.push_back(orbit_pose(cfg.look_at, radius, el, az));
            }
        }
        return poses;
    }

    namespace {
        double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
            return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
        }

        /// Andrew's monotone chain; counter-clockwise, no collinear points.
        std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
            std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
                return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
            });
            pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
            if (pts.size() < 3)
                return pts;
            std::vector<Vec2> hull(2 * pts.size());
            std::size_t k = 0;
            for (const auto& p : pts) {
                while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0)
                    --k;
                hull[k++] = p;
            }
            for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
                while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
                    --k;
                hull[k++] = pts[i];
            }
            hull.resize(k - 1);
            return hull;
        }
    } // namespace

    Mask project_box(const BoundingBox3D& box, const CameraPose& pose, const Intrinsics& intrinsics) {
        box.validate();
        intrinsics.validate();
        const auto corners_world = box.corners();
        std::array<Vec3, 8> cam;
        bool any_in_front = false;
        for (std::size_t i = 0; i < 8; ++i) {
            cam[i] = pose.to_camera(corners_world[i]);
            any_in_front = any_in_front || cam[i].z() > kNearPlane;
        }
        if (!any_in_front) {
            fail(ErrorCode::EmptyRegion, "box projection is empty: all corners are behind the near plane");
        }

        std::vector<Vec3> clipped;
        for (std::size_t i = 0; i < 8; ++i) {
            if (cam[i].z() >= kNearPlane)
                clipped.push_back(cam[i]);
        }
        // Edges connect corners whose indices differ in exactly one bit.
        for (std::size_t i = 0; i < 8; ++i) {
            for (std::size_t bit = 1; bit < 8; bit <<= 1) {
                const std::size_t j = i | bit;
                if (j == i)
                    continue;
                const double zi = cam[i].z() - kNearPlane;
                const double zj = cam[j].z() - kNearPlane;
                if ((zi < 0.0) != (zj < 0.0)) {
                    const double t = zi / (zi - zj);
                    clipped.push_back(cam[i] + t * (cam[j] - cam[i]));
                }
            }
        }

        std::vector<Vec2> projected;
        projected.reserve(clipped.size());
        for (const auto& p : clipped) {
            projected.emplace_back(intrinsics.fx * p.x() / p.z() + intrinsics.cx,
                                   intrinsics.fy * p.y() / p.z() + intrinsics.cy);
        }
        const auto hull = convex_hull(std::move(projected));

        Mask mask(intrinsics.width, intrinsics.height);
        if (hull.size() < 3) {
            return mask;
        }
        double min_x = hull[0].x(), max_x = hull[0].x(), min_y = hull[0].y(), max_y = hull[0].y();
        for (const auto& p : hull) {
            min_x = std::min(min_x, p.x());
            max_x = std::max(max_x, p.x());
            min_y = std::min(min_y, p.y());
            max_y = std::max(max_y, p.y());
        }
        const int x0 = static_cast<int>(std::max(0.0, std::ceil(min_x)));
        const int x1 = static_cast<int>(std::min<double>(intrinsics.width - 1, std::floor(max_x)));
        const int y0 = static_cast<int>(std::max(0.0, std::ceil(min_y)));
        const int y1 = static_cast<int>(std::min<double>(intrinsics.height - 1, std::floor(max_y)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 p(x, y);
                bool inside = true;
                for (std::size_t e = 0; e < hull.size() && inside; ++e) {
                    const Vec2& a = hull[e];
                    const Vec2& b = hull[(e + 1) % hull.size()];
                    const double scale = (b - a).norm();
                    inside = cross2(a, b, p) >= -1e-9 * scale;
                }
                if (inside)
                    mask.set(x, y, true);
            }
        }
        return mask;
    }

    nlohmann::json intrinsics_to_json(const Intrinsics& k) {
        return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
    }

    Intrinsics intrinsics_from_json(const nlohmann::json& j) {
        Intrinsics k;
        k.fx = j.at("fx").get<double>();
        k.fy = j.at("fy").get<double>();
        k.cx = j.at("cx").get<double>();
        k.cy = j.at("cy").get<double>();
        k.width = j.at("width").get<int>();
        k.height = j.at("height").get<int>();
        return k;
    }

    nlohmann::json pose_to_json(const CameraPose& pose, const Intrinsics& intrinsics) {
        return {{"quat", {pose.rotation[0], pose.rotation[1], pose.rotation[2], pose.rotation[3]}},
                {"trans", {pose.translation[0], pose.translation[1], pose.translation[2]}},
                {"intrinsics", intrinsics_to_json(intrinsics)}};
    }

    CameraPose pose_from_json(const nlohmann::json& j) {
        const auto q = j.at("quat").get<std::vector<double>>();
        const auto t = j.at("trans").get<std::vector<double>>();
        if (q.size() != 4 || t.size() != 3) {
            fail(ErrorCode::Format, "pose requires quat[4] and trans[3]");
        }
        CameraPose pose;
        pose.rotation = Vec4(q[0], q[1], q[2], q[3]);
        pose.translation = Vec3(t[0], t[1], t[2]);
        if (!pose.rotation.allFinite() || std::abs(pose.rotation.norm() - 1.0) > 1e-6) {
            fail(ErrorCode::Validation, "pose quaternion must be unit norm");
        }
        return pose;
    }

} // namespace gsedit
