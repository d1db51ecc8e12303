/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/camera.hpp"
#include "gsedit/image.hpp"
#include "gsedit/losses.hpp"
#include "gsedit/renderer.hpp"
#include "gsedit/scene.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace gsedit {

    enum class PromptKind { Global, Local, Reference };
    enum class GuidanceKind { Sds, Denoise, Attention };

    std::string_view prompt_kind_name(PromptKind kind);
    std::optional<PromptKind> parse_prompt_kind(std::string_view name);
    std::string_view guidance_kind_name(GuidanceKind kind);
    std::optional<GuidanceKind> parse_guidance_kind(std::string_view name);

    /// Text prompts with the scene token (V1) and the reference-object token (V2).
    struct PromptSet {
        std::string scene_token = "<V1>";
        std::string object_token = "<V2>";
        std::string scene_prompt = "a <V1> toy";
        std::string global_prompt = "a <V1> toy wearing <V2> sunglasses";
        std::string local_prompt = "<V2> sunglasses";
        std::string reference_prompt = "<V2> sunglasses";
        std::string object_keyword = "sunglasses";

        /// Global prompt carries both tokens; local prompt carries V2 but not V1.
        void validate() const;
    };

    struct GuidanceRequest {
        std::uint64_t request_id = 0;
        Image image;  ///< height x width x 3, values in [0,1]
        CameraPose pose;
        Intrinsics intrinsics;
        PromptKind prompt_kind = PromptKind::Global;
        /// Unset lets the provider sample the SDS timestep.
        std::optional<double> noise_level;
        /// Object keyword for attention requests.
        std::string keyword;
    };

    struct GuidanceResponse {
        std::uint64_t request_id = 0;
        /// Pixel gradient (sds), denoised image (denoise) or 1-channel map (attention).
        Image payload;
        double t_used = 0.0;
        double elapsed_ms = 0.0;
    };

    /// Checks the request invariants for the given kind; throws Validation.
    void validate_request(GuidanceKind kind, const GuidanceRequest& request);
    /// Payload finite and shaped like the request image (1 channel for attention).
    void validate_response(GuidanceKind kind, const GuidanceRequest& request, const GuidanceResponse& response);

    /// Source of SDS gradients, SDEdit-style denoising and attention maps.
    /// Implementations must tolerate concurrent calls.
    class GuidanceProvider {
    public:
        virtual ~GuidanceProvider() = default;

        /// w(t)(eps_hat - eps) already mapped to pixel space.
        virtual GuidanceResponse sds_gradient(const GuidanceRequest& request) = 0;
        /// Denoised image at noise level request.noise_level.
        virtual GuidanceResponse denoise(const GuidanceRequest& request) = 0;
        virtual GuidanceResponse attention_map(const GuidanceRequest& request) = 0;

        virtual std::string name() const = 0;

        GuidanceResponse dispatch(GuidanceKind kind, const GuidanceRequest& request);
    };

    AttentionMap to_attention_map(const GuidanceResponse& response);

    /// Targets the mock pulls renders towards.
    struct MockTargets {
        GaussianScene scene;       ///< full target scene, used for global prompts and denoising
        GaussianScene foreground;  ///< target foreground, rendered on black for local prompts and attention
        Vec3 background = Vec3::Zero();
        RenderSettings settings;
    };

    struct MockOptions {
        /// Constant stand-in for w(t).
        double weight = 1.0;
        std::uint64_t seed = 0;
        double t_min = 0.02;
        double t_max = 0.98;
        /// Attention resolution; 0 keeps the request resolution.
        int attention_width = 0;
        int attention_height = 0;
    };

    /// Analytic provider: gradient = weight * (image - target),
    /// denoise = (1 - t0) image + t0 target, attention = target foreground alpha.
    class MockProvider final : public GuidanceProvider {
    public:
        MockProvider(MockTargets targets, MockOptions options = {});

        /// Loads target_full.ply and target_fg.ply from a fixture directory.
        static std::unique_ptr<MockProvider> from_fixture(const std::filesystem::path& dir, const Vec3& background,
                                                          MockOptions options = {});

        GuidanceResponse sds_gradient(const GuidanceRequest& request) override;
        GuidanceResponse denoise(const GuidanceRequest& request) override;
        GuidanceResponse attention_map(const GuidanceRequest& request) override;
        std::string name() const override { return "mock"; }

        Image target_image(const GuidanceRequest& request) const;
        const MockTargets& targets() const { return targets_; }

    private:
        double sample_t();

        MockTargets targets_;
        MockOptions options_;
        std::mutex rng_mutex_;
        std::mt19937_64 rng_;
    };

    struct RemoteOptions {
        /// scheme://host:port, optionally followed by a base path.
        std::string url;
        int connect_timeout_ms = 2000;
        /// Upper bound on waiting for one response.
        int timeout_ms = 60000;
        int max_attempts = 3;
        int backoff_ms = 100;
    };

    /// Client for POST /v1/guidance.
    class RemoteProvider final : public GuidanceProvider {
    public:
        explicit RemoteProvider(RemoteOptions options);

        GuidanceResponse sds_gradient(const GuidanceRequest& request) override;
        GuidanceResponse denoise(const GuidanceRequest& request) override;
        GuidanceResponse attention_map(const GuidanceRequest& request) override;
        std::string name() const override { return "remote:" + options_.url; }

    private:
        GuidanceResponse call(GuidanceKind kind, const GuidanceRequest& request);

        RemoteOptions options_;
        std::string host_;
        std::string base_path_;
        std::atomic<std::uint64_t> next_id_{1};
    };

} // namespace gsedit
