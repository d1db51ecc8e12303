/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsedit {

    /// Error categories. Values mirror the C API status codes in gsedit.h.
    enum class ErrorCode : int {
        InvalidArgument = 1,
        Io = 2,
        Format = 3,
        Validation = 4,
        EmptyRegion = 5,
        Numerical = 6,
        Config = 7,
        Transport = 8,
        Provider = 9,
        Internal = 10,
    };

    const char* error_code_name(ErrorCode code) noexcept;

    class Error : public std::runtime_error {
    public:
        Error(ErrorCode code, const std::string& message)
            : std::runtime_error(message),
              code_(code) {}

        ErrorCode code() const noexcept { return code_; }

    private:
        ErrorCode code_;
    };

    /// Raised by the remote guidance client when the service cannot be reached
    /// or does not answer in time.
    class TransportError : public Error {
    public:
        TransportError(const std::string& message, int attempts, bool retryable, int http_status = 0)
            : Error(ErrorCode::Transport, message),
              attempts_(attempts),
              retryable_(retryable),
              http_status_(http_status) {}

        int attempts() const noexcept { return attempts_; }
        bool retryable() const noexcept { return retryable_; }
        /// 0 when no HTTP response was received.
        int http_status() const noexcept { return http_status_; }

    private:
        int attempts_;
        bool retryable_;
        int http_status_;
    };

    /// A structured error reported by a guidance provider ({code, message} on the wire).
    class ProviderError : public Error {
    public:
        ProviderError(std::string provider_code, const std::string& message, int http_status = 0)
            : Error(ErrorCode::Provider, provider_code + ": " + message),
              provider_code_(std::move(provider_code)),
              http_status_(http_status) {}

        const std::string& provider_code() const noexcept { return provider_code_; }
        int http_status() const noexcept { return http_status_; }

    private:
        std::string provider_code_;
        int http_status_;
    };

    [[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
        throw Error(code, message);
    }

} // namespace gsedit
