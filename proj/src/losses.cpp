/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/losses.hpp"
#include "gsedit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsedit {

    namespace {
        void check_gamma(double gamma) {
            if (!(gamma >= 0.0 && gamma <= 1.0)) {
                fail(ErrorCode::InvalidArgument, "gamma must be in [0,1]");
            }
        }
    } // namespace

    void AttentionMap::validate() const {
        if (values.channels != 1) {
            fail(ErrorCode::Validation, "attention map must have a single channel");
        }
        for (double v : values.data) {
            if (!(v >= 0.0 && v <= 1.0)) {
                fail(ErrorCode::Validation, "attention values must lie in [0,1]");
            }
        }
    }

    double localization_loss(const AttentionMap& attention, const Mask& mask, const LocalizationParams& params) {
        attention.validate();
        if (attention.width() != mask.width || attention.height() != mask.height) {
            fail(ErrorCode::InvalidArgument, "attention map and mask shapes differ");
        }
        if (!(params.lambda >= 0.0)) {
            fail(ErrorCode::InvalidArgument, "lambda must be non-negative");
        }
        double max_inside = -std::numeric_limits<double>::infinity();
        double outside = 0.0;
        for (std::size_t p = 0; p < mask.data.size(); ++p) {
            const double a = attention.values.data[p];
            if (mask.data[p]) {
                max_inside = std::max(max_inside, a);
            } else {
                outside += a * a;
            }
        }
        if (max_inside == -std::numeric_limits<double>::infinity()) {
            fail(ErrorCode::InvalidArgument, "localization mask is empty");
        }
        return (1.0 - max_inside) + params.lambda * outside;
    }

    double localization_loss_resampled(const AttentionMap& attention, const Mask& mask,
                                       const LocalizationParams& params) {
        AttentionMap resized{resample_bilinear(attention.values, mask.width, mask.height)};
        for (auto& v : resized.values.data) {
            v = std::clamp(v, 0.0, 1.0);
        }
        return localization_loss(resized, mask, params);
    }

    Image combine_sds(const Image& grad_global, const Image& grad_local, double gamma) {
        check_gamma(gamma);
        if (!grad_global.same_shape(grad_local)) {
            fail(ErrorCode::InvalidArgument, "combine_sds: gradient shapes differ");
        }
        // The endpoints are exact copies (0 * x would turn -0.0 into +0.0).
        if (gamma == 1.0)
            return grad_global;
        if (gamma == 0.0)
            return grad_local;
        Image out(grad_global.width, grad_global.height, grad_global.channels);
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            out.data[i] = gamma * grad_global.data[i] + (1.0 - gamma) * grad_local.data[i];
        }
        return out;
    }

    AttributeGradients combine_sds(const AttributeGradients& grad_global, const AttributeGradients& grad_local,
                                   double gamma) {
        check_gamma(gamma);
        if (grad_global.size() != grad_local.size() || grad_global.sh_count != grad_local.sh_count) {
            fail(ErrorCode::InvalidArgument, "combine_sds: gradient shapes differ");
        }
        if (gamma == 1.0)
            return grad_global;
        if (gamma == 0.0)
            return grad_local;
        auto out = AttributeGradients::zeros(grad_global.size(), grad_global.sh_count);
        out.add_scaled(grad_global, gamma);
        out.add_scaled(grad_local, 1.0 - gamma);
        return out;
    }

    Image compose_pseudo_gt(const Image& denoised, const Image& background, const Mask& mask) {
        if (!denoised.same_shape(background) || denoised.width != mask.width || denoised.height != mask.height) {
            fail(ErrorCode::InvalidArgument, "compose_pseudo_gt: shapes differ");
        }
        Image out(denoised.width, denoised.height, denoised.channels);
        const auto channels = static_cast<std::size_t>(denoised.channels);
        for (std::size_t p = 0; p < mask.data.size(); ++p) {
            const Image& src = mask.data[p] ? denoised : background;
            for (std::size_t c = 0; c < channels; ++c) {
                out.data[p * channels + c] = src.data[p * channels + c];
            }
        }
        return out;
    }

    double mse(const Image& a, const Image& b) {
        if (!a.same_shape(b)) {
            fail(ErrorCode::InvalidArgument, "mse: shapes differ");
        }
        if (a.data.empty()) {
            return 0.0;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            const double d = a.data[i] - b.data[i];
            sum += d * d;
        }
        return sum / static_cast<double>(a.data.size());
    }

    Image mse_gradient(const Image& a, const Image& b) {
        if (!a.same_shape(b)) {
            fail(ErrorCode::InvalidArgument, "mse: shapes differ");
        }
        Image out(a.width, a.height, a.channels);
        const double scale = a.data.empty() ? 0.0 : 2.0 / static_cast<double>(a.data.size());
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            out.data[i] = scale * (a.data[i] - b.data[i]);
        }
        return out;
    }

} // namespace gsedit
