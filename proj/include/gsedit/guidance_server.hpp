/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/guidance.hpp"

#include <memory>
#include <string>

namespace gsedit {

    /// Serves any GuidanceProvider over POST /v1/guidance. Used to expose the mock
    /// provider to other processes and as the reference for protocol conformance.
    class GuidanceServer {
    public:
        /// A null provider answers every request with 503 {code: "not_ready"}.
        explicit GuidanceServer(GuidanceProvider* provider);
        ~GuidanceServer();

        GuidanceServer(const GuidanceServer&) = delete;
        GuidanceServer& operator=(const GuidanceServer&) = delete;

        /// Binds and starts serving on a background thread. Port 0 picks a free port.
        /// Returns the bound port.
        int start(const std::string& host = "127.0.0.1", int port = 0);
        /// Blocks serving on the calling thread.
        void listen(const std::string& host, int port);
        void stop();

        int port() const;
        std::string url() const;

    private:
        struct Impl;
        std::unique_ptr<Impl> impl_;
    };

} // namespace gsedit
