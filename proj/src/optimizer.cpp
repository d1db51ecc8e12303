/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/optimizer.hpp"
#include "gsedit/error.hpp"

#include <cmath>

namespace gsedit {

    void OptimizerParams::validate() const {
        for (double lr : {position_lr, sh_lr, opacity_lr, scale_lr, rotation_lr}) {
            if (!(lr >= 0.0) || !std::isfinite(lr)) {
                fail(ErrorCode::Config, "learning rates must be finite and non-negative");
            }
        }
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
            fail(ErrorCode::Config, "Adam betas must lie in [0,1) and epsilon must be positive");
        }
    }

    EditOptimizer::EditOptimizer(const GaussianScene& scene, const EditSet& edit_set, const OptimizerParams& params,
                                 double position_scale)
        : edit_set_(edit_set),
          params_(params),
          position_lr_(params.position_lr * position_scale),
          sh_count_(sh_coeff_count(scene.sh_degree)) {
        params_.validate();
        edit_set_.validate(scene.size());
        const std::size_t n = edit_set_.editable_indices.size();
        const auto init = [](Moments& m, std::size_t size) {
            m.m.assign(size, 0.0);
            m.v.assign(size, 0.0);
        };
        init(position_, 3 * n);
        init(opacity_, n);
        init(scale_, 3 * n);
        init(rotation_, 4 * n);
        init(sh_, 3 * n * static_cast<std::size_t>(sh_count_));
    }

    void EditOptimizer::update(double& value, double grad, Moments& moments, std::size_t slot, double lr, double bias1,
                               double bias2) const {
        double& m = moments.m[slot];
        double& v = moments.v[slot];
        m = params_.beta1 * m + (1.0 - params_.beta1) * grad;
        v = params_.beta2 * v + (1.0 - params_.beta2) * grad * grad;
        const double m_hat = m / bias1;
        const double v_hat = v / bias2;
        value -= lr * m_hat / (std::sqrt(v_hat) + params_.epsilon);
    }

    void EditOptimizer::step(GaussianScene& scene, const AttributeGradients& grads) {
        if (grads.size() != scene.size() || grads.sh_count != sh_count_) {
            fail(ErrorCode::InvalidArgument, "gradient layout does not match the scene");
        }
        if (!grads.all_finite()) {
            fail(ErrorCode::Numerical, "non-finite gradient at optimizer step " + std::to_string(steps_ + 1));
        }
        ++steps_;
        const double bias1 = 1.0 - std::pow(params_.beta1, steps_);
        const double bias2 = 1.0 - std::pow(params_.beta2, steps_);
        const auto& t = edit_set_.trainable;
        const auto sh_count = static_cast<std::size_t>(sh_count_);

        for (std::size_t slot = 0; slot < edit_set_.editable_indices.size(); ++slot) {
            const std::size_t i = edit_set_.editable_indices[slot];
            Gaussian& g = scene.gaussians[i];
            if (t.position) {
                for (int c = 0; c < 3; ++c)
                    update(g.position[c], grads.position[i][c], position_, 3 * slot + c, position_lr_, bias1, bias2);
            }
            if (t.opacity) {
                update(g.opacity_logit, grads.opacity_logit[i], opacity_, slot, params_.opacity_lr, bias1, bias2);
            }
            if (t.scale) {
                for (int c = 0; c < 3; ++c)
                    update(g.scale_log[c], grads.scale_log[i][c], scale_, 3 * slot + c, params_.scale_lr, bias1, bias2);
            }
            if (t.rotation) {
                for (int c = 0; c < 4; ++c)
                    update(g.rotation[c], grads.rotation[i][c], rotation_, 4 * slot + c, params_.rotation_lr, bias1,
                           bias2);
                g.rotation = normalized_quat(g.rotation);
            }
            if (t.sh) {
                for (std::size_t k = 0; k < sh_count; ++k) {
                    for (int c = 0; c < 3; ++c) {
                        const std::size_t s = (slot * sh_count + k) * 3 + static_cast<std::size_t>(c);
                        update(g.sh[k][c], grads.sh_at(i, static_cast<int>(k))[c], sh_, s, params_.sh_lr, bias1,
                               bias2);
                    }
                }
            }
        }
    }

} // namespace gsedit
