/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/image.hpp"
#include "gsedit/math.hpp"
#include "gsedit/scene.hpp"

#include <nlohmann/json_fwd.hpp>

#include <random>
#include <vector>

namespace gsedit {

    /// Pinhole intrinsics. Pixel (i, j) has its center at image coordinate (i, j).
    struct Intrinsics {
        double fx = 1.0;
        double fy = 1.0;
        double cx = 0.0;
        double cy = 0.0;
        int width = 1;
        int height = 1;

        void validate() const;
        /// Square pixels, principal point at the image center, vertical field of view in degrees.
        static Intrinsics from_fov(int width, int height, double fov_y_deg);

        bool operator==(const Intrinsics&) const = default;
    };

    /// World-to-camera rigid transform: X_cam = R X + t. The camera looks down +z,
    /// image x to the right and image y down.
    struct CameraPose {
        Vec4 rotation = identity_quat();
        Vec3 translation = Vec3::Zero();

        Mat3 rotation_matrix() const { return quat_to_matrix(rotation); }
        Vec3 to_camera(const Vec3& world) const { return rotation_matrix() * world + translation; }
        /// Camera center in world coordinates.
        Vec3 center() const { return -(rotation_matrix().transpose() * translation); }

        /// Camera at `eye` looking at `target` with world +y as up.
        static CameraPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitY());

        bool operator==(const CameraPose&) const = default;
    };

    constexpr double kNearPlane = 0.01;

    struct PoseSamplerConfig {
        Vec3 look_at = Vec3::Zero();
        double radius_min = 3.0;
        double radius_max = 4.0;
        double elevation_min_deg = -30.0;
        double elevation_max_deg = 60.0;
        double azimuth_min_deg = 0.0;
        /// A 360 degree azimuth span is treated as half-open for grids.
        double azimuth_max_deg = 360.0;
        double interval_deg = 30.0;

        void validate() const;
        /// Additionally checks that the interval divides both angular spans.
        void validate_grid() const;
    };

    /// Camera on a sphere around look_at at (radius, elevation, azimuth);
    /// elevation 0 / azimuth 0 puts the eye at look_at + (0, 0, radius).
    CameraPose orbit_pose(const Vec3& look_at, double radius, double elevation_deg, double azimuth_deg);

    CameraPose sample_random_pose(const PoseSamplerConfig& cfg, std::mt19937_64& rng);

    /// Elevation-major, then azimuth; radius is the midpoint of the radius range.
    std::vector<CameraPose> sample_refinement_grid(const PoseSamplerConfig& cfg);

    /// Filled convex hull of the box corners clipped at the near plane.
    /// Throws EmptyRegion when the whole box is behind the near plane.
    Mask project_box(const BoundingBox3D& box, const CameraPose& pose, const Intrinsics& intrinsics);

    nlohmann::json pose_to_json(const CameraPose& pose, const Intrinsics& intrinsics);
    CameraPose pose_from_json(const nlohmann::json& j);
    Intrinsics intrinsics_from_json(const nlohmann::json& j);
    nlohmann::json intrinsics_to_json(const Intrinsics& k);

} // namespace gsedit
