/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/guidance.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsedit::wire {

    /// Endpoint served by guidance services.
    inline constexpr const char* kGuidancePath = "/v1/guidance";

    std::string base64_encode(std::span<const std::uint8_t> bytes);
    /// Standard alphabet with padding; throws Format on malformed input.
    std::vector<std::uint8_t> base64_decode(std::string_view text);

    /// Little-endian float32 of every value, base64 encoded.
    std::string encode_image(const Image& image);
    Image decode_image(std::string_view base64, int width, int height, int channels);

    nlohmann::json request_to_json(GuidanceKind kind, const GuidanceRequest& request);
    /// Throws ProviderError("bad_request" | "bad_kind" | "bad_prompt_kind" | "bad_payload").
    GuidanceRequest request_from_json(const nlohmann::json& j, GuidanceKind& kind);

    nlohmann::json response_to_json(GuidanceKind kind, const GuidanceResponse& response);
    GuidanceResponse response_from_json(const nlohmann::json& j);

    nlohmann::json error_to_json(std::string_view code, std::string_view message);

} // namespace gsedit::wire
