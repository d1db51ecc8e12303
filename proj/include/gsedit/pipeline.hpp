/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/config.hpp"
#include "gsedit/error.hpp"
#include "gsedit/guidance.hpp"
#include "gsedit/scene.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gsedit {

    struct LossEntry {
        std::string stage;  ///< "coarse" or "refine"
        int iter = 0;
        double loss = 0.0;
        /// Milliseconds since the start of the stage.
        double wall_ms = 0.0;
    };

    struct RunReport {
        std::vector<LossEntry> entries;
        std::string task;
        std::string provider;
        std::size_t gaussian_count = 0;
        std::size_t editable_count = 0;
        int coarse_pose_count = 0;
        int refine_pose_count = 0;
        double coarse_ms = 0.0;
        double refine_ms = 0.0;
        double total_ms = 0.0;
        /// Mean MSE of the full render against the cached pseudo-GTs.
        double refine_initial_mse = 0.0;
        double refine_final_mse = 0.0;
        std::vector<std::string> checkpoints;

        nlohmann::json to_json() const;
    };

    struct StageOptions {
        /// Directory for checkpoint PLYs (periodic and on abort); unset disables them.
        std::optional<std::filesystem::path> checkpoint_dir;
        /// Called after every optimizer step with the stage name and 0-based iteration.
        std::function<void(const std::string& stage, int iter, const GaussianScene& scene)> on_step;
    };

    /// Raised when a stage aborts because of a provider failure; the scene state
    /// before the failing iteration was written to checkpoint() when enabled.
    class StageAborted : public Error {
    public:
        StageAborted(ErrorCode code, const std::string& message, std::string checkpoint)
            : Error(code, message),
              checkpoint_(std::move(checkpoint)) {}

        const std::string& checkpoint() const noexcept { return checkpoint_; }

    private:
        std::string checkpoint_;
    };

    /// Refuses edit sets that leave nothing to optimize.
    void validate_edit(const GaussianScene& scene, const EditSet& edit_set, const EditConfig& cfg);

    /// Blended global/local SDS optimization of the editable Gaussians.
    void coarse_edit(GaussianScene& scene, const EditSet& edit_set, const EditConfig& cfg, GuidanceProvider& provider,
                     RunReport& report, const StageOptions& options = {});

    struct PseudoGtView {
        CameraPose pose;
        Image target;
        Mask mask;
    };

    /// Denoises renders at the refinement grid poses and composites them over the
    /// fixed-only render.
    std::vector<PseudoGtView> build_pseudo_gts(const GaussianScene& scene, const EditSet& edit_set,
                                               const EditConfig& cfg, GuidanceProvider& provider);

    /// Mean MSE of full renders against the cached views.
    double cached_view_mse(const GaussianScene& scene, const std::vector<PseudoGtView>& views, const EditConfig& cfg);

    /// Pixel-level refinement against frozen (or periodically rebuilt) pseudo-GTs.
    void refine(GaussianScene& scene, const EditSet& edit_set, const EditConfig& cfg, GuidanceProvider& provider,
                RunReport& report, const StageOptions& options = {});

    struct RunOutputs {
        GaussianScene scene;
        EditSet edit_set;
        RunReport report;
        std::filesystem::path scene_path;
        std::filesystem::path report_path;
    };

    struct RunOptions {
        bool write_turntable = true;
        StageOptions stage;
    };

    /// load -> edit set -> coarse -> refine -> save. Writes edited.ply, editset.json,
    /// report.json and (optionally) turntable/view_NNN.png under out_dir.
    RunOutputs run(const EditConfig& cfg, const std::filesystem::path& scene_path,
                   const std::filesystem::path& out_dir, GuidanceProvider& provider, RunOptions options = {});

    nlohmann::json edit_set_to_json(const EditSet& edit_set, std::size_t scene_size);

} // namespace gsedit
