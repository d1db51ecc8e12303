/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/scene.hpp"

#include <filesystem>
#include <iosfwd>

namespace gsedit {

    /// Reads a standard GS PLY (binary little endian vertex element with x,y,z,
    /// f_dc_*, f_rest_*, opacity, scale_*, rot_*). Normals are ignored. The SH
    /// degree is inferred from the number of f_rest properties.
    GaussianScene load_ply(const std::filesystem::path& path);
    GaussianScene read_ply(std::istream& in);

    /// Writes float32 attributes in the standard layout; normals are written as zero.
    void save_ply(const GaussianScene& scene, const std::filesystem::path& path);
    void write_ply(const GaussianScene& scene, std::ostream& out);

} // namespace gsedit
