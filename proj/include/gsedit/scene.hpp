/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/math.hpp"
#include "gsedit/sh.hpp"

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace gsedit {

    /// One anisotropic Gaussian in the standard GS parameterization.
    struct Gaussian {
        Vec3 position = Vec3::Zero();
        /// Opacity before the logistic activation.
        double opacity_logit = 0.0;
        /// Per-axis log standard deviation.
        Vec3 scale_log = Vec3::Zero();
        /// (w, x, y, z); renormalized after every optimizer step.
        Vec4 rotation = identity_quat();
        /// (degree+1)^2 RGB coefficients, DC first.
        std::vector<Vec3> sh;

        double opacity() const { return logistic(opacity_logit); }
        Vec3 scale() const { return scale_log.array().exp(); }
        /// R diag(s)^2 R^T
        Mat3 covariance() const;

        bool operator==(const Gaussian&) const = default;
    };

    /// Ordered Gaussian set; indices are durable identifiers.
    struct GaussianScene {
        int sh_degree = 3;
        std::vector<Gaussian> gaussians;

        std::size_t size() const { return gaussians.size(); }
        bool empty() const { return gaussians.empty(); }

        /// Appends a Gaussian with the scene's SH degree (coefficients resized, zero-filled).
        std::size_t add(Gaussian g);

        /// Rounds every attribute to float32, the precision of the PLY payload.
        void round_to_storage_precision();

        /// Throws Validation on non-finite attributes or mismatched SH length.
        void validate() const;

        /// Radius of the bounding sphere of all centers around their centroid.
        double extent() const;

        bool operator==(const GaussianScene&) const = default;
    };

    /// Oriented user box.
    struct BoundingBox3D {
        Vec3 center = Vec3::Zero();
        Vec3 half_extents = Vec3::Ones();
        Vec4 orientation = identity_quat();

        void validate() const;
        /// Center-point test, boundary inclusive.
        bool contains(const Vec3& p) const;
        std::array<Vec3, 8> corners() const;
    };

    enum class TaskKind { Insert, Replace, Retexture, Stylize };

    std::string_view task_name(TaskKind task);
    std::optional<TaskKind> parse_task(std::string_view name);

    struct TrainableMask {
        bool position = true;
        bool opacity = true;
        bool scale = true;
        bool rotation = true;
        bool sh = true;

        bool any() const { return position || opacity || scale || rotation || sh; }
        static TrainableMask all() { return {}; }
        static TrainableMask sh_only() { return {false, false, false, false, true}; }

        bool operator==(const TrainableMask&) const = default;
    };

    /// The editable subset of a scene together with what may change on it.
    struct EditSet {
        std::vector<std::size_t> editable_indices;
        TrainableMask trainable;
        TaskKind task = TaskKind::Replace;

        /// Complement of editable_indices in [0, scene_size), ascending.
        std::vector<std::size_t> fixed_indices(std::size_t scene_size) const;
        /// Unique, ascending, in range; retexture implies sh-only.
        void validate(std::size_t scene_size) const;
    };

    struct EditSetOptions {
        /// Uniform jitter of inserted duplicates inside the box; off by default.
        bool jitter_inserted = false;
        /// Jitter amplitude as a fraction of the box half extents.
        double jitter_fraction = 0.05;
        std::uint64_t seed = 0;
    };

    std::vector<std::size_t> select_in_box(const GaussianScene& scene, const BoundingBox3D& box);

    struct EditSelection {
        GaussianScene scene;
        EditSet edit_set;
    };

    /// Per-task editable subset. For insert the in-box Gaussians are duplicated and
    /// appended; the copies are the editable set.
    EditSelection build_edit_set(const GaussianScene& scene, const BoundingBox3D& box, TaskKind task,
                                 const EditSetOptions& options = {});

} // namespace gsedit
