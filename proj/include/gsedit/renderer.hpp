/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/camera.hpp"
#include "gsedit/image.hpp"
#include "gsedit/scene.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gsedit {

    struct RenderSettings {
        /// Skip pixels outside the 3-sigma ellipse of the screen-space covariance.
        bool truncate = true;
        /// Added to the diagonal of the 2D covariance (px^2).
        double dilation = 0.3;
        /// Compositing stops once transmittance drops below this value.
        double transmittance_floor = 1e-4;
        /// Gaussians with camera-space depth at or below this are culled.
        double near = kNearPlane;
    };

    /// nullopt renders every Gaussian; otherwise only the listed indices.
    using Subset = std::optional<std::span<const std::size_t>>;

    struct RenderOutput {
        Image rgb;    ///< height x width x 3
        Image alpha;  ///< height x width x 1, accumulated opacity
        /// Scene indices of the projected Gaussians in compositing (front-to-back) order.
        std::vector<std::size_t> depth_order;
    };

    /// Per-Gaussian gradients aligned with scene indices.
    struct AttributeGradients {
        int sh_count = 1;
        std::vector<Vec3> position;
        std::vector<double> opacity_logit;
        std::vector<Vec3> scale_log;
        std::vector<Vec4> rotation;
        /// Row-major [gaussian][coefficient].
        std::vector<Vec3> sh;

        static AttributeGradients zeros(std::size_t count, int sh_count);

        std::size_t size() const { return position.size(); }
        Vec3& sh_at(std::size_t i, int k) { return sh[i * static_cast<std::size_t>(sh_count) + static_cast<std::size_t>(k)]; }
        const Vec3& sh_at(std::size_t i, int k) const {
            return sh[i * static_cast<std::size_t>(sh_count) + static_cast<std::size_t>(k)];
        }

        /// this += scale * other
        void add_scaled(const AttributeGradients& other, double scale);
        bool is_zero_at(std::size_t i) const;
        bool all_finite() const;
    };

    RenderOutput render(const GaussianScene& scene, Subset subset, const CameraPose& pose, const Intrinsics& intrinsics,
                        const Vec3& background, const RenderSettings& settings = {});

    /// Exact adjoint of render() for the upstream gradient `grad_rgb` (height x width x 3).
    AttributeGradients render_backward(const GaussianScene& scene, Subset subset, const CameraPose& pose,
                                       const Intrinsics& intrinsics, const Vec3& background, const Image& grad_rgb,
                                       const RenderSettings& settings = {});

    constexpr double kDefaultMaskThreshold = 0.5;

    /// alpha(subset-only render) > threshold
    Mask render_instance_mask(const GaussianScene& scene, Subset subset, const CameraPose& pose,
                              const Intrinsics& intrinsics, double threshold = kDefaultMaskThreshold,
                              const RenderSettings& settings = {});

} // namespace gsedit
