/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/camera.hpp"
#include "gsedit/guidance.hpp"
#include "gsedit/optimizer.hpp"
#include "gsedit/renderer.hpp"
#include "gsedit/scene.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace gsedit {

    struct ProviderConfig {
        /// "mock:<fixture dir>" or "remote:<url>"; empty means unset.
        std::string spec;
        double mock_weight = 1.0;
        int timeout_ms = 60000;
        int max_attempts = 3;
    };

    struct EditConfig {
        TaskKind task = TaskKind::Insert;
        BoundingBox3D box;
        PromptSet prompts;

        double gamma = 0.5;
        int coarse_iters = 2000;
        int refine_iters = 3000;
        double t0 = 0.05;
        double mask_threshold = kDefaultMaskThreshold;
        double lambda_loc = 0.1;

        int image_width = 512;
        int image_height = 512;
        double fov_y_deg = 50.0;
        Vec3 background = Vec3::Zero();

        OptimizerParams optimizer;
        PoseSamplerConfig coarse_poses;
        PoseSamplerConfig refine_poses;
        RenderSettings render;

        std::uint64_t seed = 0;
        /// Checkpoint PLY every N iterations of each stage; 0 disables.
        int checkpoint_every = 0;
        bool jitter_inserted = false;
        /// Rebuild the refinement pseudo-GTs every N refinement iterations; 0 freezes them.
        int regenerate_pseudo_gt_every = 0;
        /// Issue the global and local guidance requests of one iteration concurrently.
        bool concurrent_guidance = false;

        ProviderConfig provider;

        void validate() const;
        Intrinsics intrinsics() const { return Intrinsics::from_fov(image_width, image_height, fov_y_deg); }
    };

    /// Missing keys keep their defaults; unknown keys are a Config error. Pose
    /// samplers look at the box center unless look_at is given.
    EditConfig config_from_json(const nlohmann::json& j);
    nlohmann::json config_to_json(const EditConfig& cfg);

    /// Parses TOML, or JSON when the extension is .json.
    nlohmann::json read_config_document(const std::filesystem::path& path);
    nlohmann::json parse_toml(std::string_view text);
    EditConfig load_config(const std::filesystem::path& path);

    /// Recursively merges `overrides` into `base` (objects merge, everything else replaces).
    void merge_json(nlohmann::json& base, const nlohmann::json& overrides);

} // namespace gsedit
