/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/wire.hpp"
#include "gsedit/error.hpp"

#include <array>
#include <bit>
#include <cstring>

namespace gsedit::wire {

    namespace {
        constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

        constexpr std::array<int, 256> make_reverse() {
            std::array<int, 256> table{};
            for (auto& v : table)
                v = -1;
            for (int i = 0; i < 64; ++i)
                table[static_cast<unsigned char>(kAlphabet[i])] = i;
            return table;
        }
        constexpr auto kReverse = make_reverse();

        [[noreturn]] void bad(std::string_view code, const std::string& message) {
            throw ProviderError(std::string(code), message, 400);
        }
    } // namespace

    std::string base64_encode(std::span<const std::uint8_t> bytes) {
        std::string out;
        out.reserve((bytes.size() + 2) / 3 * 4);
        std::size_t i = 0;
        for (; i + 2 < bytes.size(); i += 3) {
            const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
            out.push_back(kAlphabet[(v >> 18) & 63]);
            out.push_back(kAlphabet[(v >> 12) & 63]);
            out.push_back(kAlphabet[(v >> 6) & 63]);
            out.push_back(kAlphabet[v & 63]);
        }
        const std::size_t rem = bytes.size() - i;
        if (rem == 1) {
            const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
            out.push_back(kAlphabet[(v >> 18) & 63]);
            out.push_back(kAlphabet[(v >> 12) & 63]);
            out.append("==");
        } else if (rem == 2) {
            const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
            out.push_back(kAlphabet[(v >> 18) & 63]);
            out.push_back(kAlphabet[(v >> 12) & 63]);
            out.push_back(kAlphabet[(v >> 6) & 63]);
            out.push_back('=');
        }
        return out;
    }

    std::vector<std::uint8_t> base64_decode(std::string_view text) {
        if (text.size() % 4 != 0) {
            fail(ErrorCode::Format, "base64 length must be a multiple of 4");
        }
        std::vector<std::uint8_t> out;
        out.reserve(text.size() / 4 * 3);
        for (std::size_t i = 0; i < text.size(); i += 4) {
            int vals[4];
            int pad = 0;
            for (int k = 0; k < 4; ++k) {
                const char c = text[i + static_cast<std::size_t>(k)];
                if (c == '=') {
                    if (i + 4 != text.size() || k < 2) {
                        fail(ErrorCode::Format, "misplaced base64 padding");
                    }
                    vals[k] = 0;
                    ++pad;
                } else {
                    if (pad > 0) {
                        fail(ErrorCode::Format, "misplaced base64 padding");
                    }
                    vals[k] = kReverse[static_cast<unsigned char>(c)];
                    if (vals[k] < 0) {
                        fail(ErrorCode::Format, "invalid base64 character");
                    }
                }
            }
            const std::uint32_t v = (static_cast<std::uint32_t>(vals[0]) << 18) |
                                    (static_cast<std::uint32_t>(vals[1]) << 12) |
                                    (static_cast<std::uint32_t>(vals[2]) << 6) | static_cast<std::uint32_t>(vals[3]);
            out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
            if (pad < 2)
                out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
            if (pad < 1)
                out.push_back(static_cast<std::uint8_t>(v & 0xFF));
        }
        return out;
    }

    std::string encode_image(const Image& image) {
        static_assert(std::endian::native == std::endian::little, "wire encoding assumes a little-endian host");
        std::vector<std::uint8_t> bytes(image.data.size() * sizeof(float));
        for (std::size_t i = 0; i < image.data.size(); ++i) {
            const float f = static_cast<float>(image.data[i]);
            std::memcpy(bytes.data() + i * sizeof(float), &f, sizeof(float));
        }
        return base64_encode(bytes);
    }

    Image decode_image(std::string_view base64, int width, int height, int channels) {
        if (width <= 0 || height <= 0 || channels <= 0) {
            fail(ErrorCode::Format, "image dimensions must be positive");
        }
        const auto bytes = base64_decode(base64);
        Image image(width, height, channels);
        if (bytes.size() != image.data.size() * sizeof(float)) {
            fail(ErrorCode::Format, "image payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                                        std::to_string(image.data.size() * sizeof(float)));
        }
        for (std::size_t i = 0; i < image.data.size(); ++i) {
            float f;
            std::memcpy(&f, bytes.data() + i * sizeof(float), sizeof(float));
            image.data[i] = f;
        }
        return image;
    }

    nlohmann::json request_to_json(GuidanceKind kind, const GuidanceRequest& request) {
        nlohmann::json j;
        j["request_id"] = request.request_id;
        j["kind"] = guidance_kind_name(kind);
        j["prompt_kind"] = prompt_kind_name(request.prompt_kind);
        j["pose"] = pose_to_json(request.pose, request.intrinsics);
        j["noise_level"] = request.noise_level ? nlohmann::json(*request.noise_level) : nlohmann::json(nullptr);
        j["image"] = encode_image(request.image);
        j["width"] = request.image.width;
        j["height"] = request.image.height;
        if (!request.keyword.empty()) {
            j["keyword"] = request.keyword;
        }
        return j;
    }

    GuidanceRequest request_from_json(const nlohmann::json& j, GuidanceKind& kind) {
        if (!j.is_object()) {
            bad("bad_request", "request body must be a JSON object");
        }
        const auto kind_it = j.find("kind");
        if (kind_it == j.end() || !kind_it->is_string()) {
            bad("bad_request", "missing 'kind'");
        }
        const auto parsed_kind = parse_guidance_kind(kind_it->get<std::string>());
        if (!parsed_kind) {
            bad("bad_kind", "unknown kind '" + kind_it->get<std::string>() + "'");
        }
        kind = *parsed_kind;

        GuidanceRequest request;
        try {
            request.request_id = j.at("request_id").get<std::uint64_t>();
            const auto pk = parse_prompt_kind(j.value("prompt_kind", std::string("global")));
            if (!pk) {
                bad("bad_prompt_kind", "unknown prompt_kind '" + j.value("prompt_kind", std::string()) + "'");
            }
            request.prompt_kind = *pk;
            const auto& pose = j.at("pose");
            request.pose = pose_from_json(pose);
            request.intrinsics = intrinsics_from_json(pose.at("intrinsics"));
            if (j.contains("noise_level") && !j.at("noise_level").is_null()) {
                request.noise_level = j.at("noise_level").get<double>();
            }
            request.keyword = j.value("keyword", std::string());
            request.image = decode_image(j.at("image").get<std::string>(), j.at("width").get<int>(),
                                         j.at("height").get<int>(), 3);
        } catch (const ProviderError&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            bad("bad_request", e.what());
        } catch (const Error& e) {
            bad("bad_payload", e.what());
        }
        return request;
    }

    nlohmann::json response_to_json(GuidanceKind kind, const GuidanceResponse& response) {
        return {{"request_id", response.request_id},
                {"kind", guidance_kind_name(kind)},
                {"payload", encode_image(response.payload)},
                {"width", response.payload.width},
                {"height", response.payload.height},
                {"channels", response.payload.channels},
                {"t_used", response.t_used},
                {"elapsed_ms", response.elapsed_ms}};
    }

    GuidanceResponse response_from_json(const nlohmann::json& j) {
        GuidanceResponse response;
        try {
            response.request_id = j.at("request_id").get<std::uint64_t>();
            response.payload = decode_image(j.at("payload").get<std::string>(), j.at("width").get<int>(),
                                            j.at("height").get<int>(), j.value("channels", 3));
            response.t_used = j.value("t_used", 0.0);
            response.elapsed_ms = j.value("elapsed_ms", 0.0);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError("bad_response", e.what());
        }
        return response;
    }

    nlohmann::json error_to_json(std::string_view code, std::string_view message) {
        return {{"code", code}, {"message", message}};
    }

} // namespace gsedit::wire
