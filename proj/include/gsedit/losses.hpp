/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/image.hpp"
#include "gsedit/renderer.hpp"

namespace gsedit {

    /// Cross-attention map of the object keyword; single channel, values in [0,1].
    struct AttentionMap {
        Image values;

        int width() const { return values.width; }
        int height() const { return values.height; }
        /// Throws Validation when not single channel or when a value leaves [0,1].
        void validate() const;
    };

    struct LocalizationParams {
        double lambda = 0.1;
    };

    /// (1 - max_{s in S} A_s) + lambda * sum_{s not in S} A_s^2
    ///
    /// Only the strongest in-mask response is rewarded; filling the whole mask is
    /// not encouraged. The out-of-mask term is an unnormalized sum.
    double localization_loss(const AttentionMap& attention, const Mask& mask, const LocalizationParams& params = {});

    /// Resamples the attention map to the mask resolution (bilinear) before scoring.
    double localization_loss_resampled(const AttentionMap& attention, const Mask& mask,
                                       const LocalizationParams& params = {});

    /// gamma * global + (1 - gamma) * local
    Image combine_sds(const Image& grad_global, const Image& grad_local, double gamma);
    /// Same blend on parameter-space gradients.
    AttributeGradients combine_sds(const AttributeGradients& grad_global, const AttributeGradients& grad_local,
                                   double gamma);

    /// mask ? denoised : background, per pixel.
    Image compose_pseudo_gt(const Image& denoised, const Image& background, const Mask& mask);

    double mse(const Image& a, const Image& b);
    /// d mse(a, b) / d a
    Image mse_gradient(const Image& a, const Image& b);

} // namespace gsedit
