/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/guidance.hpp"
#include "gsedit/error.hpp"
#include "gsedit/ply.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>

namespace gsedit {

    std::string_view prompt_kind_name(PromptKind kind) {
        switch (kind) {
        case PromptKind::Global: return "global";
        case PromptKind::Local: return "local";
        case PromptKind::Reference: return "reference";
        }
        return "unknown";
    }

    std::optional<PromptKind> parse_prompt_kind(std::string_view name) {
        if (name == "global")
            return PromptKind::Global;
        if (name == "local")
            return PromptKind::Local;
        if (name == "reference")
            return PromptKind::Reference;
        return std::nullopt;
    }

    std::string_view guidance_kind_name(GuidanceKind kind) {
        switch (kind) {
        case GuidanceKind::Sds: return "sds";
        case GuidanceKind::Denoise: return "denoise";
        case GuidanceKind::Attention: return "attention";
        }
        return "unknown";
    }

    std::optional<GuidanceKind> parse_guidance_kind(std::string_view name) {
        if (name == "sds")
            return GuidanceKind::Sds;
        if (name == "denoise")
            return GuidanceKind::Denoise;
        if (name == "attention")
            return GuidanceKind::Attention;
        return std::nullopt;
    }

    void PromptSet::validate() const {
        if (scene_token.empty() || object_token.empty() || scene_token == object_token) {
            fail(ErrorCode::Config, "prompt tokens must be non-empty and distinct");
        }
        const auto has = [](const std::string& text, const std::string& token) {
            return text.find(token) != std::string::npos;
        };
        if (!has(global_prompt, scene_token) || !has(global_prompt, object_token)) {
            fail(ErrorCode::Config, "global prompt must contain both " + scene_token + " and " + object_token);
        }
        if (!has(local_prompt, object_token) || has(local_prompt, scene_token)) {
            fail(ErrorCode::Config, "local prompt must contain " + object_token + " and not " + scene_token);
        }
        if (object_keyword.empty()) {
            fail(ErrorCode::Config, "object keyword must be set");
        }
    }

    void validate_request(GuidanceKind kind, const GuidanceRequest& request) {
        request.intrinsics.validate();
        const Image& img = request.image;
        if (img.channels != 3 || img.width != request.intrinsics.width || img.height != request.intrinsics.height) {
            fail(ErrorCode::Validation, "guidance image must be height x width x 3 and match the intrinsics");
        }
        for (double v : img.data) {
            if (!(v >= 0.0 && v <= 1.0)) {
                fail(ErrorCode::Validation, "guidance image values must lie in [0,1]");
            }
        }
        if (std::abs(request.pose.rotation.norm() - 1.0) > 1e-6) {
            fail(ErrorCode::Validation, "guidance pose rotation must be unit norm");
        }
        if (request.noise_level && !(*request.noise_level > 0.0 && *request.noise_level < 1.0)) {
            fail(ErrorCode::Validation, "noise level must lie in (0,1)");
        }
        if (kind == GuidanceKind::Denoise && !request.noise_level) {
            fail(ErrorCode::Validation, "denoise requires a noise level");
        }
    }

    void validate_response(GuidanceKind kind, const GuidanceRequest& request, const GuidanceResponse& response) {
        const Image& p = response.payload;
        if (kind == GuidanceKind::Attention) {
            if (p.channels != 1 || p.width <= 0 || p.height <= 0) {
                fail(ErrorCode::Validation, "attention payload must be a non-empty single-channel map");
            }
        } else if (!p.same_shape(request.image)) {
            fail(ErrorCode::Validation, "guidance payload shape differs from the request image");
        }
        if (p.data.size() != p.size() ||
            !std::all_of(p.data.begin(), p.data.end(), [](double v) { return std::isfinite(v); })) {
            fail(ErrorCode::Validation, "guidance payload contains non-finite values");
        }
    }

    GuidanceResponse GuidanceProvider::dispatch(GuidanceKind kind, const GuidanceRequest& request) {
        switch (kind) {
        case GuidanceKind::Sds: return sds_gradient(request);
        case GuidanceKind::Denoise: return denoise(request);
        case GuidanceKind::Attention: return attention_map(request);
        }
        fail(ErrorCode::InvalidArgument, "unknown guidance kind");
    }

    AttentionMap to_attention_map(const GuidanceResponse& response) {
        AttentionMap map{response.payload};
        map.validate();
        return map;
    }

    namespace {
        using Clock = std::chrono::steady_clock;

        double ms_since(Clock::time_point start) {
            return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        }

        bool tokenizable(std::string_view keyword) {
            if (keyword.empty())
                return false;
            return std::all_of(keyword.begin(), keyword.end(), [](char c) {
                const auto u = static_cast<unsigned char>(c);
                return std::isalnum(u) || c == ' ' || c == '-' || c == '_' || c == '\'';
            });
        }
    } // namespace

    MockProvider::MockProvider(MockTargets targets, MockOptions options)
        : targets_(std::move(targets)),
          options_(options),
          rng_(options.seed) {
        targets_.scene.validate();
        targets_.foreground.validate();
        if (!(options_.t_min > 0.0 && options_.t_max < 1.0 && options_.t_min <= options_.t_max)) {
            fail(ErrorCode::Config, "mock timestep range must lie inside (0,1)");
        }
    }

    std::unique_ptr<MockProvider> MockProvider::from_fixture(const std::filesystem::path& dir,
                                                             const Vec3& background, MockOptions options) {
        MockTargets targets;
        targets.scene = load_ply(dir / "target_full.ply");
        targets.foreground = load_ply(dir / "target_fg.ply");
        targets.background = background;
        return std::make_unique<MockProvider>(std::move(targets), options);
    }

    double MockProvider::sample_t() {
        std::lock_guard lock(rng_mutex_);
        std::uniform_real_distribution<double> dist(options_.t_min, options_.t_max);
        return dist(rng_);
    }

    Image MockProvider::target_image(const GuidanceRequest& request) const {
        switch (request.prompt_kind) {
        case PromptKind::Global:
            return render(targets_.scene, std::nullopt, request.pose, request.intrinsics, targets_.background,
                          targets_.settings)
                .rgb;
        case PromptKind::Local:
        case PromptKind::Reference:
            return render(targets_.foreground, std::nullopt, request.pose, request.intrinsics, Vec3::Zero(),
                          targets_.settings)
                .rgb;
        }
        fail(ErrorCode::InvalidArgument, "unknown prompt kind");
    }

    GuidanceResponse MockProvider::sds_gradient(const GuidanceRequest& request) {
        const auto start = Clock::now();
        validate_request(GuidanceKind::Sds, request);
        if (request.prompt_kind == PromptKind::Reference) {
            throw ProviderError("bad_prompt_kind", "sds requires a global or local prompt");
        }
        const Image target = target_image(request);
        GuidanceResponse response;
        response.request_id = request.request_id;
        response.payload = Image(request.image.width, request.image.height, 3);
        for (std::size_t i = 0; i < target.data.size(); ++i) {
            response.payload.data[i] = options_.weight * (request.image.data[i] - target.data[i]);
        }
        response.t_used = request.noise_level ? *request.noise_level : sample_t();
        response.elapsed_ms = ms_since(start);
        return response;
    }

    GuidanceResponse MockProvider::denoise(const GuidanceRequest& request) {
        const auto start = Clock::now();
        validate_request(GuidanceKind::Denoise, request);
        const double t0 = *request.noise_level;
        const Image target = target_image(request);
        GuidanceResponse response;
        response.request_id = request.request_id;
        response.payload = Image(request.image.width, request.image.height, 3);
        for (std::size_t i = 0; i < target.data.size(); ++i) {
            response.payload.data[i] = (1.0 - t0) * request.image.data[i] + t0 * target.data[i];
        }
        response.t_used = t0;
        response.elapsed_ms = ms_since(start);
        return response;
    }

    GuidanceResponse MockProvider::attention_map(const GuidanceRequest& request) {
        const auto start = Clock::now();
        validate_request(GuidanceKind::Attention, request);
        if (!tokenizable(request.keyword)) {
            throw ProviderError("bad_keyword", "keyword '" + request.keyword + "' cannot be tokenized");
        }
        const auto out = render(targets_.foreground, std::nullopt, request.pose, request.intrinsics, Vec3::Zero(),
                                targets_.settings);
        Image map = out.alpha;
        if (options_.attention_width > 0 && options_.attention_height > 0) {
            map = resample_bilinear(map, options_.attention_width, options_.attention_height);
        }
        for (auto& v : map.data) {
            v = std::clamp(v, 0.0, 1.0);
        }
        GuidanceResponse response;
        response.request_id = request.request_id;
        response.payload = std::move(map);
        response.t_used = request.noise_level.value_or(0.0);
        response.elapsed_ms = ms_since(start);
        return response;
    }

} // namespace gsedit
