/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/sh.hpp"

#include <cassert>

namespace gsedit {

    namespace {
        constexpr double C0 = 0.28209479177387814;
        constexpr double C1 = 0.4886025119029199;
        constexpr double C2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                                 -1.0925484305920792, 0.5462742152960396};
        constexpr double C3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658, 0.3731763325901154,
                                 -0.4570457994644658, 1.445305721320277, -0.5900435899266435};
    } // namespace

    void sh_basis(int degree, const Vec3& dir, std::span<double> out) {
        assert(static_cast<int>(out.size()) >= sh_coeff_count(degree));
        const double x = dir.x(), y = dir.y(), z = dir.z();
        out[0] = C0;
        if (degree < 1)
            return;
        out[1] = -C1 * y;
        out[2] = C1 * z;
        out[3] = -C1 * x;
        if (degree < 2)
            return;
        const double xx = x * x, yy = y * y, zz = z * z;
        out[4] = C2[0] * x * y;
        out[5] = C2[1] * y * z;
        out[6] = C2[2] * (2.0 * zz - xx - yy);
        out[7] = C2[3] * x * z;
        out[8] = C2[4] * (xx - yy);
        if (degree < 3)
            return;
        out[9] = C3[0] * y * (3.0 * xx - yy);
        out[10] = C3[1] * x * y * z;
        out[11] = C3[2] * y * (4.0 * zz - xx - yy);
        out[12] = C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
        out[13] = C3[4] * x * (4.0 * zz - xx - yy);
        out[14] = C3[5] * z * (xx - yy);
        out[15] = C3[6] * x * (xx - 3.0 * yy);
    }

    void sh_basis_gradient(int degree, const Vec3& dir, std::span<Vec3> out) {
        assert(static_cast<int>(out.size()) >= sh_coeff_count(degree));
        const double x = dir.x(), y = dir.y(), z = dir.z();
        out[0] = Vec3::Zero();
        if (degree < 1)
            return;
        out[1] = {0.0, -C1, 0.0};
        out[2] = {0.0, 0.0, C1};
        out[3] = {-C1, 0.0, 0.0};
        if (degree < 2)
            return;
        const double xx = x * x, yy = y * y, zz = z * z;
        out[4] = {C2[0] * y, C2[0] * x, 0.0};
        out[5] = {0.0, C2[1] * z, C2[1] * y};
        out[6] = {-2.0 * C2[2] * x, -2.0 * C2[2] * y, 4.0 * C2[2] * z};
        out[7] = {C2[3] * z, 0.0, C2[3] * x};
        out[8] = {2.0 * C2[4] * x, -2.0 * C2[4] * y, 0.0};
        if (degree < 3)
            return;
        out[9] = {6.0 * C3[0] * x * y, C3[0] * (3.0 * xx - 3.0 * yy), 0.0};
        out[10] = {C3[1] * y * z, C3[1] * x * z, C3[1] * x * y};
        out[11] = {-2.0 * C3[2] * x * y, C3[2] * (4.0 * zz - xx - 3.0 * yy), 8.0 * C3[2] * y * z};
        out[12] = {-6.0 * C3[3] * x * z, -6.0 * C3[3] * y * z, C3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy)};
        out[13] = {C3[4] * (4.0 * zz - 3.0 * xx - yy), -2.0 * C3[4] * x * y, 8.0 * C3[4] * x * z};
        out[14] = {2.0 * C3[5] * x * z, -2.0 * C3[5] * y * z, C3[5] * (xx - yy)};
        out[15] = {C3[6] * (3.0 * xx - 3.0 * yy), -6.0 * C3[6] * x * y, 0.0};
    }

    Vec3 sh_color(int degree, std::span<const Vec3> coeffs, const Vec3& dir) {
        double basis[kMaxShCoeffs];
        sh_basis(degree, dir, basis);
        Vec3 color = Vec3::Constant(0.5);
        const int n = sh_coeff_count(degree);
        for (int k = 0; k < n; ++k) {
            color += basis[k] * coeffs[k];
        }
        return color;
    }

} // namespace gsedit
