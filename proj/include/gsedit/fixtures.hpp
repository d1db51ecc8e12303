/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gsedit {

    /// A small scene plus the analytic targets the mock provider pulls towards.
    struct Fixture {
        std::string name;
        GaussianScene scene;
        /// Edited foreground only (rendered on black for local guidance).
        GaussianScene target_fg;
        /// scene followed by target_fg: the expected result of an insert edit.
        GaussianScene target_full;
        BoundingBox3D box;
        std::uint64_t seed = 0;
    };

    std::vector<std::string> fixture_names();

    /// "blob-10" or "box-scene-100"; throws InvalidArgument otherwise. Output is a
    /// pure function of (name, seed).
    Fixture make_fixture(std::string_view name, std::uint64_t seed = 0);

    /// Writes scene.ply, target_full.ply, target_fg.ply, config.toml and
    /// targets/view_NNN.png into dir.
    void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

} // namespace gsedit
