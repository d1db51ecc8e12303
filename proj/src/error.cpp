/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/error.hpp"

namespace gsedit {

    const char* error_code_name(ErrorCode code) noexcept {
        switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::Io: return "io";
        case ErrorCode::Format: return "format";
        case ErrorCode::Validation: return "validation";
        case ErrorCode::EmptyRegion: return "empty_region";
        case ErrorCode::Numerical: return "numerical";
        case ErrorCode::Config: return "config";
        case ErrorCode::Transport: return "transport";
        case ErrorCode::Provider: return "provider";
        case ErrorCode::Internal: return "internal";
        }
        return "unknown";
    }

} // namespace gsedit
