/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/renderer.hpp"
#include "gsedit/scene.hpp"

#include <vector>

namespace gsedit {

    /// Standard GS learning rates; position is multiplied by the scene extent.
    struct OptimizerParams {
        double position_lr = 1.6e-4;
        double sh_lr = 2.5e-3;
        double opacity_lr = 5e-2;
        double scale_lr = 5e-3;
        double rotation_lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-15;

        void validate() const;
    };

    /// Adam over the trainable attributes of the editable Gaussians only.
    class EditOptimizer {
    public:
        EditOptimizer(const GaussianScene& scene, const EditSet& edit_set, const OptimizerParams& params,
                      double position_scale);

        /// Applies one step and renormalizes the rotation quaternions it touched.
        void step(GaussianScene& scene, const AttributeGradients& grads);

        int steps_taken() const { return steps_; }

    private:
        struct Moments {
            std::vector<double> m;
            std::vector<double> v;
        };
        void update(double& value, double grad, Moments& moments, std::size_t slot, double lr, double bias1,
                    double bias2) const;

        EditSet edit_set_;
        OptimizerParams params_;
        double position_lr_;
        int sh_count_;
        int steps_ = 0;
        Moments position_, opacity_, scale_, rotation_, sh_;
    };

} // namespace gsedit
