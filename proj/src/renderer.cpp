/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/renderer.hpp"
#include "gsedit/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsedit {

    AttributeGradients AttributeGradients::zeros(std::size_t count, int sh_count) {
        AttributeGradients g;
        g.sh_count = sh_count;
        g.position.assign(count, Vec3::Zero());
        g.opacity_logit.assign(count, 0.0);
        g.scale_log.assign(count, Vec3::Zero());
        g.rotation.assign(count, Vec4::Zero());
        g.sh.assign(count * static_cast<std::size_t>(sh_count), Vec3::Zero());
        return g;
    }

    void AttributeGradients::add_scaled(const AttributeGradients& other, double scale) {
        if (other.size() != size() || other.sh_count != sh_count) {
            fail(ErrorCode::InvalidArgument, "gradient shapes differ");
        }
        for (std::size_t i = 0; i < size(); ++i) {
            position[i] += scale * other.position[i];
            opacity_logit[i] += scale * other.opacity_logit[i];
            scale_log[i] += scale * other.scale_log[i];
            rotation[i] += scale * other.rotation[i];
        }
        for (std::size_t i = 0; i < sh.size(); ++i) {
            sh[i] += scale * other.sh[i];
        }
    }

    bool AttributeGradients::is_zero_at(std::size_t i) const {
        bool zero = position[i].isZero(0.0) && opacity_logit[i] == 0.0 && scale_log[i].isZero(0.0) &&
                    rotation[i].isZero(0.0);
        for (int k = 0; k < sh_count; ++k) {
            zero = zero && sh_at(i, k).isZero(0.0);
        }
        return zero;
    }

    bool AttributeGradients::all_finite() const {
        const auto finite = [](const auto& v) { return v.allFinite(); };
        return std::all_of(position.begin(), position.end(), finite) &&
               std::all_of(opacity_logit.begin(), opacity_logit.end(), [](double v) { return std::isfinite(v); }) &&
               std::all_of(scale_log.begin(), scale_log.end(), finite) &&
               std::all_of(rotation.begin(), rotation.end(), finite) && std::all_of(sh.begin(), sh.end(), finite);
    }

    namespace {

        /// Screen-space state of one Gaussian, plus what the adjoint needs.
        struct Splat {
            std::size_t index = 0;
            double depth = 0.0;
            Vec2 mean;
            Mat2 cov2d;
            Mat2 conic;  // inverse of cov2d
            double opacity = 0.0;
            Vec3 raw_color;
            Vec3 color;
            // Pixel bounds (inclusive) of the 3-sigma support.
            int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
            // Intermediates for backward.
            Vec3 p_cam;
            Eigen::Matrix<double, 2, 3> jac;
            Mat3 cov_cam;
            Mat3 rot;    // Gaussian rotation (normalized quaternion)
            Vec3 scale;
            Vec3 view_dir;
            double view_dist = 0.0;
        };

        struct Frame {
            Mat3 w2c;
            Vec3 t;
            Vec3 cam_center;
        };

        Frame make_frame(const CameraPose& pose) {
            Frame f;
            f.w2c = pose.rotation_matrix();
            f.t = pose.translation;
            f.cam_center = -(f.w2c.transpose() * f.t);
            return f;
        }

        std::vector<std::size_t> resolve_subset(const GaussianScene& scene, Subset subset) {
            std::vector<std::size_t> indices;
            if (!subset) {
                indices.resize(scene.size());
                std::iota(indices.begin(), indices.end(), 0);
                return indices;
            }
            indices.assign(subset->begin(), subset->end());
            for (auto i : indices) {
                if (i >= scene.size()) {
                    fail(ErrorCode::InvalidArgument, "subset index " + std::to_string(i) + " out of range");
                }
            }
            return indices;
        }

        std::optional<Splat> project(const GaussianScene& scene, std::size_t index, const Frame& frame,
                                     const Intrinsics& k, const RenderSettings& settings) {
            const Gaussian& g = scene.gaussians[index];
            Splat s;
            s.index = index;
            s.p_cam = frame.w2c * g.position + frame.t;
            const double x = s.p_cam.x(), y = s.p_cam.y(), z = s.p_cam.z();
            if (!(z > settings.near)) {
                return std::nullopt;
            }
            s.depth = z;
            s.mean = Vec2(k.fx * x / z + k.cx, k.fy * y / z + k.cy);

            s.rot = quat_to_matrix(normalized_quat(g.rotation));
            s.scale = g.scale();
            const Mat3 m = s.rot * s.scale.asDiagonal();
            const Mat3 cov_world = m * m.transpose();
            s.cov_cam = frame.w2c * cov_world * frame.w2c.transpose();
            s.jac << k.fx / z, 0.0, -k.fx * x / (z * z), 0.0, k.fy / z, -k.fy * y / (z * z);
            s.cov2d = s.jac * s.cov_cam * s.jac.transpose();
            s.cov2d(0, 0) += settings.dilation;
            s.cov2d(1, 1) += settings.dilation;
            // Exact symmetry keeps the adjoint consistent.
            s.cov2d(1, 0) = s.cov2d(0, 1);

            const double det = s.cov2d.determinant();
            const double trace = s.cov2d.trace();
            if (!std::isfinite(det) || !(det > 1e-12 * trace * trace)) {
                fail(ErrorCode::Numerical, "ill-conditioned screen-space covariance at gaussian " + std::to_string(index));
            }
            s.conic << s.cov2d(1, 1) / det, -s.cov2d(0, 1) / det, -s.cov2d(0, 1) / det, s.cov2d(0, 0) / det;
            s.opacity = g.opacity();

            const Vec3 v = g.position - frame.cam_center;
            s.view_dist = v.norm();
            s.view_dir = s.view_dist > 0.0 ? Vec3(v / s.view_dist) : Vec3(Vec3::UnitZ());
            s.raw_color = sh_color(scene.sh_degree, g.sh, s.view_dir);
            s.color = s.raw_color.cwiseMax(0.0).cwiseMin(1.0);

            if (settings.truncate) {
                const double rx = 3.0 * std::sqrt(s.cov2d(0, 0));
                const double ry = 3.0 * std::sqrt(s.cov2d(1, 1));
                s.x0 = static_cast<int>(std::max(0.0, std::ceil(s.mean.x() - rx)));
                s.x1 = static_cast<int>(std::min<double>(k.width - 1, std::floor(s.mean.x() + rx)));
                s.y0 = static_cast<int>(std::max(0.0, std::ceil(s.mean.y() - ry)));
                s.y1 = static_cast<int>(std::min<double>(k.height - 1, std::floor(s.mean.y() + ry)));
            } else {
                s.x0 = 0;
                s.x1 = k.width - 1;
                s.y0 = 0;
                s.y1 = k.height - 1;
            }
            return s;
        }

        std::vector<Splat> project_all(const GaussianScene& scene, Subset subset, const CameraPose& pose,
                                       const Intrinsics& k, const RenderSettings& settings) {
            k.validate();
            const auto indices = resolve_subset(scene, subset);
            const Frame frame = make_frame(pose);
            std::vector<Splat> splats;
            splats.reserve(indices.size());
            for (auto i : indices) {
                if (auto s = project(scene, i, frame, k, settings)) {
                    splats.push_back(std::move(*s));
                }
            }
            std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
                return a.depth < b.depth || (a.depth == b.depth && a.index < b.index);
            });
            return splats;
        }

        /// Gaussian falloff at pixel (px, py); returns false when truncated away.
        inline bool falloff(const Splat& s, double px, double py, bool truncate, Vec2& d, double& power) {
            d = Vec2(px - s.mean.x(), py - s.mean.y());
            const double q = s.conic(0, 0) * d.x() * d.x() + 2.0 * s.conic(0, 1) * d.x() * d.y() +
                             s.conic(1, 1) * d.y() * d.y();
            if (truncate && q > 9.0) {
                return false;
            }
            power = 0.5 * q;
            return true;
        }

        inline bool covers(const Splat& s, int x, int y) { return x >= s.x0 && x <= s.x1 && y >= s.y0 && y <= s.y1; }

    } // namespace

    RenderOutput render(const GaussianScene& scene, Subset subset, const CameraPose& pose, const Intrinsics& intrinsics,
                        const Vec3& background, const RenderSettings& settings) {
        const auto splats = project_all(scene, subset, pose, intrinsics, settings);
        RenderOutput out;
        out.rgb = Image(intrinsics.width, intrinsics.height, 3);
        out.alpha = Image(intrinsics.width, intrinsics.height, 1);
        out.depth_order.reserve(splats.size());
        for (const auto& s : splats) {
            out.depth_order.push_back(s.index);
        }

        for (int y = 0; y < intrinsics.height; ++y) {
            for (int x = 0; x < intrinsics.width; ++x) {
                double transmittance = 1.0;
                Vec3 color = Vec3::Zero();
                for (const auto& s : splats) {
                    if (!covers(s, x, y))
                        continue;
                    Vec2 d;
                    double power = 0.0;
                    if (!falloff(s, x, y, settings.truncate, d, power))
                        continue;
                    const double sigma = s.opacity * std::exp(-power);
                    color += s.color * (sigma * transmittance);
                    transmittance *= 1.0 - sigma;
                    if (transmittance < settings.transmittance_floor)
                        break;
                }
                color += transmittance * background;
                for (int c = 0; c < 3; ++c) {
                    out.rgb.at(x, y, c) = color[c];
                }
                out.alpha.at(x, y) = 1.0 - transmittance;
            }
        }
        return out;
    }

    AttributeGradients render_backward(const GaussianScene& scene, Subset subset, const CameraPose& pose,
                                       const Intrinsics& intrinsics, const Vec3& background, const Image& grad_rgb,
                                       const RenderSettings& settings) {
        if (grad_rgb.width != intrinsics.width || grad_rgb.height != intrinsics.height || grad_rgb.channels != 3) {
            fail(ErrorCode::InvalidArgument, "grad_rgb shape does not match the render target");
        }
        const auto splats = project_all(scene, subset, pose, intrinsics, settings);
        const int sh_count = sh_coeff_count(scene.sh_degree);
        auto grads = AttributeGradients::zeros(scene.size(), sh_count);

        // Screen-space gradients per splat.
        std::vector<Vec2> g_mean(splats.size(), Vec2::Zero());
        std::vector<Mat2> g_conic(splats.size(), Mat2::Zero());
        std::vector<double> g_opacity(splats.size(), 0.0);
        std::vector<Vec3> g_color(splats.size(), Vec3::Zero());

        struct Hit {
            std::size_t splat;
            double sigma;
            double falloff;
            double transmittance;  // before this splat
            Vec2 d;
        };
        std::vector<Hit> hits;

        for (int y = 0; y < intrinsics.height; ++y) {
            for (int x = 0; x < intrinsics.width; ++x) {
                const Vec3 g(grad_rgb.at(x, y, 0), grad_rgb.at(x, y, 1), grad_rgb.at(x, y, 2));
                if (g.isZero(0.0))
                    continue;

                hits.clear();
                double transmittance = 1.0;
                for (std::size_t k = 0; k < splats.size(); ++k) {
                    const auto& s = splats[k];
                    if (!covers(s, x, y))
                        continue;
                    Vec2 d;
                    double power = 0.0;
                    if (!falloff(s, x, y, settings.truncate, d, power))
                        continue;
                    const double fo = std::exp(-power);
                    const double sigma = s.opacity * fo;
                    hits.push_back({k, sigma, fo, transmittance, d});
                    transmittance *= 1.0 - sigma;
                    if (transmittance < settings.transmittance_floor)
                        break;
                }

                // Color seen behind the current splat, normalized by its transmittance.
                Vec3 behind = background;
                for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
                    const auto& s = splats[it->splat];
                    g_color[it->splat] += g * (it->sigma * it->transmittance);
                    const double g_sigma = it->transmittance * g.dot(s.color - behind);
                    behind = it->sigma * s.color + (1.0 - it->sigma) * behind;

                    g_opacity[it->splat] += g_sigma * it->falloff;
                    const double g_power = -g_sigma * it->sigma;
                    g_mean[it->splat] += g_power * -(s.conic * it->d);
                    g_conic[it->splat] += (0.5 * g_power) * (it->d * it->d.transpose());
                }
            }
        }

        const Frame frame = make_frame(pose);
        double basis[kMaxShCoeffs];
        Vec3 basis_grad[kMaxShCoeffs];
        for (std::size_t k = 0; k < splats.size(); ++k) {
            const Splat& s = splats[k];
            const std::size_t i = s.index;
            const Gaussian& gs = scene.gaussians[i];

            // Color: clamp, then SH coefficients and view direction.
            Vec3 g_raw = g_color[k];
            for (int c = 0; c < 3; ++c) {
                if (s.raw_color[c] < 0.0 || s.raw_color[c] > 1.0)
                    g_raw[c] = 0.0;
            }
            sh_basis(scene.sh_degree, s.view_dir, basis);
            sh_basis_gradient(scene.sh_degree, s.view_dir, basis_grad);
            Vec3 g_dir = Vec3::Zero();
            for (int c = 0; c < sh_count; ++c) {
                grads.sh_at(i, c) += basis[c] * g_raw;
                g_dir += basis_grad[c] * gs.sh[static_cast<std::size_t>(c)].dot(g_raw);
            }
            Vec3 g_position = Vec3::Zero();
            if (s.view_dist > 0.0) {
                g_position += (g_dir - s.view_dir * s.view_dir.dot(g_dir)) / s.view_dist;
            }

            // Opacity through the logistic.
            grads.opacity_logit[i] += g_opacity[k] * s.opacity * (1.0 - s.opacity);

            // conic = cov2d^-1
            const Mat2 g_cov2d = -(s.conic * g_conic[k] * s.conic);
            // cov2d = J cov_cam J^T + dilation I
            const Mat3 g_cov_cam = s.jac.transpose() * g_cov2d * s.jac;
            const Eigen::Matrix<double, 2, 3> g_jac = 2.0 * g_cov2d * s.jac * s.cov_cam;

            const double px = s.p_cam.x(), py = s.p_cam.y(), pz = s.p_cam.z();
            const double fx = intrinsics.fx, fy = intrinsics.fy;
            Vec3 g_pcam;
            g_pcam.x() = g_mean[k].x() * fx / pz + g_jac(0, 2) * (-fx / (pz * pz));
            g_pcam.y() = g_mean[k].y() * fy / pz + g_jac(1, 2) * (-fy / (pz * pz));
            g_pcam.z() = g_mean[k].x() * (-fx * px / (pz * pz)) + g_mean[k].y() * (-fy * py / (pz * pz)) +
                         g_jac(0, 0) * (-fx / (pz * pz)) + g_jac(0, 2) * (2.0 * fx * px / (pz * pz * pz)) +
                         g_jac(1, 1) * (-fy / (pz * pz)) + g_jac(1, 2) * (2.0 * fy * py / (pz * pz * pz));
            g_position += frame.w2c.transpose() * g_pcam;
            grads.position[i] += g_position;

            // cov_cam = W cov W^T, cov = M M^T, M = R diag(s)
            const Mat3 g_cov = frame.w2c.transpose() * g_cov_cam * frame.w2c;
            const Mat3 m = s.rot * s.scale.asDiagonal();
            const Mat3 g_m = (g_cov + g_cov.transpose()) * m;
            Vec3 g_scale_log;
            for (int c = 0; c < 3; ++c) {
                g_scale_log[c] = g_m.col(c).dot(s.rot.col(c)) * s.scale[c];
            }
            grads.scale_log[i] += g_scale_log;
            const Mat3 g_rot = g_m * s.scale.asDiagonal();
            const Vec4 q_unit = normalized_quat(gs.rotation);
            grads.rotation[i] += normalize_vjp(gs.rotation, quat_matrix_vjp(q_unit, g_rot));
        }
        return grads;
    }

    Mask render_instance_mask(const GaussianScene& scene, Subset subset, const CameraPose& pose,
                              const Intrinsics& intrinsics, double threshold, const RenderSettings& settings) {
        const auto out = render(scene, subset, pose, intrinsics, Vec3::Zero(), settings);
        Mask mask(intrinsics.width, intrinsics.height);
        for (std::size_t p = 0; p < mask.data.size(); ++p) {
            mask.data[p] = out.alpha.data[p] > threshold ? 1 : 0;
        }
        return mask;
    }

} // namespace gsedit
