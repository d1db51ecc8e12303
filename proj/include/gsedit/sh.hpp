/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include "gsedit/math.hpp"

#include <span>

namespace gsedit {

    constexpr int kMaxShDegree = 3;
    constexpr int kMaxShCoeffs = 16;

    /// Number of SH coefficients for a given degree: (degree+1)^2.
    constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

    /// Real SH basis in the ordering and sign convention of standard GS files.
    /// `dir` must be unit length; `out` receives sh_coeff_count(degree) values.
    void sh_basis(int degree, const Vec3& dir, std::span<double> out);

    /// d(basis_k)/d(dir) for every basis function, treating dir components as free.
    void sh_basis_gradient(int degree, const Vec3& dir, std::span<Vec3> out);

    /// Raw (unclamped) color: sum_k basis_k(dir) * coeff_k + 0.5.
    Vec3 sh_color(int degree, std::span<const Vec3> coeffs, const Vec3& dir);

    /// Converts between an RGB value and the DC coefficient producing it.
    inline double rgb_to_sh_dc(double rgb) { return (rgb - 0.5) / 0.28209479177387814; }
    inline double sh_dc_to_rgb(double dc) { return dc * 0.28209479177387814 + 0.5; }

} // namespace gsedit
