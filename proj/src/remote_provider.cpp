/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/error.hpp"
#include "gsedit/guidance.hpp"
#include "gsedit/wire.hpp"

#include <httplib.h>

#include <chrono>
#include <thread>

namespace gsedit {

    RemoteProvider::RemoteProvider(RemoteOptions options)
        : options_(std::move(options)) {
        const auto scheme_end = options_.url.find("://");
        if (scheme_end == std::string::npos || options_.url.compare(0, scheme_end, "http") != 0) {
            fail(ErrorCode::Config, "provider URL must start with http:// (got '" + options_.url + "')");
        }
        const auto path_start = options_.url.find('/', scheme_end + 3);
        host_ = options_.url.substr(0, path_start);
        if (host_.size() <= scheme_end + 3) {
            fail(ErrorCode::Config, "provider URL has no host: '" + options_.url + "'");
        }
        if (path_start != std::string::npos) {
            base_path_ = options_.url.substr(path_start);
            while (!base_path_.empty() && base_path_.back() == '/')
                base_path_.pop_back();
        }
        if (options_.max_attempts < 1 || options_.timeout_ms <= 0 || options_.connect_timeout_ms <= 0) {
            fail(ErrorCode::Config, "remote provider timeouts and attempts must be positive");
        }
    }

    GuidanceResponse RemoteProvider::sds_gradient(const GuidanceRequest& request) {
        return call(GuidanceKind::Sds, request);
    }

    GuidanceResponse RemoteProvider::denoise(const GuidanceRequest& request) {
        return call(GuidanceKind::Denoise, request);
    }

    GuidanceResponse RemoteProvider::attention_map(const GuidanceRequest& request) {
        return call(GuidanceKind::Attention, request);
    }

    GuidanceResponse RemoteProvider::call(GuidanceKind kind, const GuidanceRequest& request) {
        validate_request(kind, request);
        GuidanceRequest outgoing = request;
        outgoing.request_id = next_id_.fetch_add(1);
        const std::string body = wire::request_to_json(kind, outgoing).dump();
        const std::string path = base_path_ + wire::kGuidancePath;

        std::string last_error;
        int last_status = 0;
        for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
            httplib::Client client(host_);
            client.set_connection_timeout(std::chrono::milliseconds(options_.connect_timeout_ms));
            client.set_read_timeout(std::chrono::milliseconds(options_.timeout_ms));
            client.set_write_timeout(std::chrono::milliseconds(options_.timeout_ms));

            const auto result = client.Post(path, body, "application/json");
            if (!result) {
                last_error = httplib::to_string(result.error());
                last_status = 0;
            } else if (result->status == 200) {
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(result->body);
                } catch (const nlohmann::json::exception& e) {
                    throw ProviderError("bad_response", e.what(), result->status);
                }
                auto response = wire::response_from_json(j);
                if (response.request_id != outgoing.request_id) {
                    throw ProviderError("bad_response", "response request_id " + std::to_string(response.request_id) +
                                                            " does not match " + std::to_string(outgoing.request_id));
                }
                validate_response(kind, outgoing, response);
                response.request_id = request.request_id;
                return response;
            } else {
                last_status = result->status;
                std::string code = "http_" + std::to_string(result->status);
                std::string message = result->body;
                try {
                    const auto j = nlohmann::json::parse(result->body);
                    code = j.value("code", code);
                    message = j.value("message", message);
                } catch (const nlohmann::json::exception&) {
                }
                // Only unavailability is worth retrying; anything else is a definite answer.
                if (result->status != 503) {
                    throw ProviderError(code, message, result->status);
                }
                last_error = code + ": " + message;
            }
            if (attempt < options_.max_attempts) {
                std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms * attempt));
            }
        }
        throw TransportError("guidance service at " + options_.url + " failed after " +
                                 std::to_string(options_.max_attempts) + " attempt(s): " + last_error,
                             options_.max_attempts, true, last_status);
    }

} // namespace gsedit
