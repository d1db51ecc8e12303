/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/guidance_server.hpp"
#include "gsedit/error.hpp"
#include "gsedit/wire.hpp"

#include <httplib.h>

#include <thread>

namespace gsedit {

    struct GuidanceServer::Impl {
        GuidanceProvider* provider = nullptr;
        httplib::Server server;
        std::thread thread;
        std::string host;
        int port = 0;

        void reply_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
            res.status = status;
            res.set_content(wire::error_to_json(code, message).dump(), "application/json");
        }

        void handle(const httplib::Request& req, httplib::Response& res) {
            if (!provider) {
                reply_error(res, 503, "not_ready", "no guidance model is loaded");
                return;
            }
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception& e) {
                reply_error(res, 400, "bad_request", e.what());
                return;
            }
            try {
                GuidanceKind kind{};
                const GuidanceRequest request = wire::request_from_json(body, kind);
                validate_request(kind, request);
                const GuidanceResponse response = provider->dispatch(kind, request);
                validate_response(kind, request, response);
                res.status = 200;
                res.set_content(wire::response_to_json(kind, response).dump(), "application/json");
            } catch (const ProviderError& e) {
                reply_error(res, e.http_status() ? e.http_status() : 400, e.provider_code(), e.what());
            } catch (const Error& e) {
                const bool client_fault = e.code() == ErrorCode::Validation || e.code() == ErrorCode::Format ||
                                          e.code() == ErrorCode::InvalidArgument;
                reply_error(res, client_fault ? 400 : 500, client_fault ? "bad_payload" : "internal", e.what());
            } catch (const std::exception& e) {
                reply_error(res, 500, "internal", e.what());
            }
        }
    };

    GuidanceServer::GuidanceServer(GuidanceProvider* provider)
        : impl_(std::make_unique<Impl>()) {
        impl_->provider = provider;
        impl_->server.Post(wire::kGuidancePath,
                           [this](const httplib::Request& req, httplib::Response& res) { impl_->handle(req, res); });
    }

    GuidanceServer::~GuidanceServer() { stop(); }

    int GuidanceServer::start(const std::string& host, int port) {
        impl_->host = host;
        if (port == 0) {
            impl_->port = impl_->server.bind_to_any_port(host);
        } else {
            impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
        }
        if (impl_->port <= 0) {
            fail(ErrorCode::Io, "cannot bind guidance server to " + host + ":" + std::to_string(port));
        }
        impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
        impl_->server.wait_until_ready();
        return impl_->port;
    }

    void GuidanceServer::listen(const std::string& host, int port) {
        impl_->host = host;
        impl_->port = port;
        if (!impl_->server.listen(host, port)) {
            fail(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
        }
    }

    void GuidanceServer::stop() {
        if (!impl_)
            return;
        impl_->server.stop();
        if (impl_->thread.joinable()) {
            impl_->thread.join();
        }
    }

    int GuidanceServer::port() const { return impl_->port; }

    std::string GuidanceServer::url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port); }

} // namespace gsedit
