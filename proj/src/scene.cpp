/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/scene.hpp"
#include "gsedit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsedit {

    Mat3 Gaussian::covariance() const {
        const Mat3 r = quat_to_matrix(normalized_quat(rotation));
        const Vec3 s = scale();
        const Mat3 m = r * s.asDiagonal();
        return m * m.transpose();
    }

    std::size_t GaussianScene::add(Gaussian g) {
        g.sh.resize(static_cast<std::size_t>(sh_coeff_count(sh_degree)), Vec3::Zero());
        gaussians.push_back(std::move(g));
        return gaussians.size() - 1;
    }

    void GaussianScene::round_to_storage_precision() {
        // The volatile stops GCC 11 at -O3 from vectorizing the double->float->double
        // round trip into a no-op for some components.
        const auto r = [](double& v) {
            volatile float f = static_cast<float>(v);
            v = f;
        };
        for (auto& g : gaussians) {
            for (int k = 0; k < 3; ++k) {
                r(g.position[k]);
                r(g.scale_log[k]);
            }
            r(g.opacity_logit);
            for (int k = 0; k < 4; ++k)
                r(g.rotation[k]);
            for (auto& c : g.sh) {
                for (int k = 0; k < 3; ++k)
                    r(c[k]);
            }
        }
    }

    void GaussianScene::validate() const {
        if (sh_degree < 0 || sh_degree > kMaxShDegree) {
            fail(ErrorCode::Validation, "sh_degree must be in [0,3], got " + std::to_string(sh_degree));
        }
        const auto expected = static_cast<std::size_t>(sh_coeff_count(sh_degree));
        for (std::size_t i = 0; i < gaussians.size(); ++i) {
            const auto& g = gaussians[i];
            bool finite = g.position.allFinite() && std::isfinite(g.opacity_logit) && g.scale_log.allFinite() &&
                          g.rotation.allFinite();
            for (const auto& c : g.sh) {
                finite = finite && c.allFinite();
            }
            if (!finite) {
                fail(ErrorCode::Validation, "non-finite attribute at gaussian " + std::to_string(i));
            }
            if (g.sh.size() != expected) {
                fail(ErrorCode::Validation, "gaussian " + std::to_string(i) + " has " + std::to_string(g.sh.size()) +
                                                " SH coefficients, expected " + std::to_string(expected));
            }
            if (g.rotation.norm() == 0.0) {
                fail(ErrorCode::Validation, "zero quaternion at gaussian " + std::to_string(i));
            }
        }
    }

    double GaussianScene::extent() const {
        if (gaussians.empty()) {
            return 0.0;
        }
        Vec3 centroid = Vec3::Zero();
        for (const auto& g : gaussians) {
            centroid += g.position;
        }
        centroid /= static_cast<double>(gaussians.size());
        double radius = 0.0;
        for (const auto& g : gaussians) {
            radius = std::max(radius, (g.position - centroid).norm());
        }
        return radius;
    }

    void BoundingBox3D::validate() const {
        if (!center.allFinite() || !half_extents.allFinite() || !orientation.allFinite()) {
            fail(ErrorCode::Validation, "bounding box has non-finite values");
        }
        if ((half_extents.array() <= 0.0).any()) {
            fail(ErrorCode::Validation, "bounding box half_extents must be positive");
        }
        if (std::abs(orientation.norm() - 1.0) > 1e-6) {
            fail(ErrorCode::Validation, "bounding box orientation must be a unit quaternion");
        }
    }

    bool BoundingBox3D::contains(const Vec3& p) const {
        const Vec3 local = quat_to_matrix(orientation).transpose() * (p - center);
        return (local.array().abs() <= half_extents.array()).all();
    }

    std::array<Vec3, 8> BoundingBox3D::corners() const {
        const Mat3 r = quat_to_matrix(orientation);
        std::array<Vec3, 8> out;
        for (int i = 0; i < 8; ++i) {
            const Vec3 sign((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
            out[static_cast<std::size_t>(i)] = center + r * sign.cwiseProduct(half_extents);
        }
        return out;
    }

    std::string_view task_name(TaskKind task) {
        switch (task) {
        case TaskKind::Insert: return "insert";
        case TaskKind::Replace: return "replace";
        case TaskKind::Retexture: return "retexture";
        case TaskKind::Stylize: return "stylize";
        }
        return "unknown";
    }

    std::optional<TaskKind> parse_task(std::string_view name) {
        if (name == "insert")
            return TaskKind::Insert;
        if (name == "replace")
            return TaskKind::Replace;
        if (name == "retexture")
            return TaskKind::Retexture;
        if (name == "stylize")
            return TaskKind::Stylize;
        return std::nullopt;
    }

    std::vector<std::size_t> EditSet::fixed_indices(std::size_t scene_size) const {
        std::vector<std::uint8_t> editable(scene_size, 0);
        for (auto i : editable_indices) {
            if (i < scene_size)
                editable[i] = 1;
        }
        std::vector<std::size_t> out;
        out.reserve(scene_size - std::min(scene_size, editable_indices.size()));
        for (std::size_t i = 0; i < scene_size; ++i) {
            if (!editable[i])
                out.push_back(i);
        }
        return out;
    }

    void EditSet::validate(std::size_t scene_size) const {
        for (std::size_t k = 0; k < editable_indices.size(); ++k) {
            if (editable_indices[k] >= scene_size) {
                fail(ErrorCode::Validation, "editable index " + std::to_string(editable_indices[k]) + " out of range");
            }
            if (k > 0 && editable_indices[k] <= editable_indices[k - 1]) {
                fail(ErrorCode::Validation, "editable indices must be unique and ascending");
            }
        }
        if (task == TaskKind::Retexture && !(trainable == TrainableMask::sh_only())) {
            fail(ErrorCode::Validation, "retexture edits may only train SH coefficients");
        }
    }

    std::vector<std::size_t> select_in_box(const GaussianScene& scene, const BoundingBox3D& box) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < scene.size(); ++i) {
            if (box.contains(scene.gaussians[i].position)) {
                out.push_back(i);
            }
        }
        return out;
    }

    EditSelection build_edit_set(const GaussianScene& scene, const BoundingBox3D& box, TaskKind task,
                                 const EditSetOptions& options) {
        box.validate();
        EditSelection result{scene, {}};
        result.edit_set.task = task;

        if (task == TaskKind::Stylize) {
            result.edit_set.editable_indices.resize(scene.size());
            std::iota(result.edit_set.editable_indices.begin(), result.edit_set.editable_indices.end(), 0);
            result.edit_set.trainable = TrainableMask::all();
            return result;
        }

        const auto inside = select_in_box(scene, box);
        if (inside.empty()) {
            fail(ErrorCode::EmptyRegion, "no Gaussians inside the edit box");
        }

        switch (task) {
        case TaskKind::Insert: {
            std::mt19937_64 rng(options.seed);
            std::uniform_real_distribution<double> unit(-1.0, 1.0);
            const Mat3 box_rot = quat_to_matrix(box.orientation);
            for (auto i : inside) {
                Gaussian copy = scene.gaussians[i];
                if (options.jitter_inserted) {
                    const Vec3 offset(unit(rng), unit(rng), unit(rng));
                    const Vec3 moved = copy.position + box_rot * offset.cwiseProduct(box.half_extents) * options.jitter_fraction;
                    // Keep the jittered center inside the box.
                    const Vec3 local = (box_rot.transpose() * (moved - box.center)).cwiseMax(-box.half_extents).cwiseMin(box.half_extents);
                    copy.position = box.center + box_rot * local;
                }
                result.scene.gaussians.push_back(std::move(copy));
                result.edit_set.editable_indices.push_back(result.scene.size() - 1);
            }
            result.edit_set.trainable = TrainableMask::all();
            break;
        }
        case TaskKind::Replace:
            result.edit_set.editable_indices = inside;
            result.edit_set.trainable = TrainableMask::all();
            break;
        case TaskKind::Retexture:
            result.edit_set.editable_indices = inside;
            result.edit_set.trainable = TrainableMask::sh_only();
            break;
        case TaskKind::Stylize: break;
        }
        return result;
    }

} // namespace gsedit
