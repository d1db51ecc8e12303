/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

// Test-only oracles and generators. Nothing here calls into the renderer: the
// brute-force compositor re-derives projection, covariance, color and ordering
// from the raw parameters.

#pragma once

#include "gsedit/camera.hpp"
#include "gsedit/image.hpp"
#include "gsedit/renderer.hpp"
#include "gsedit/scene.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace gsedit::test {

    class Rng {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}
        double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
        int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
        std::mt19937_64& engine() { return engine_; }

    private:
        std::mt19937_64 engine_;
    };

    struct SceneSpec {
        int count = 8;
        int sh_degree = 3;
        double spread = 0.8;
        double scale_min = 0.05, scale_max = 0.3;
        double opacity_min = 0.1, opacity_max = 0.9;
        /// Magnitude of the higher-order SH coefficients.
        double view_dependence = 0.1;
        /// DC color range; keeps sh_color away from the clamp for gradient tests.
        double color_min = 0.15, color_max = 0.85;
    };

    inline GaussianScene random_scene(Rng& rng, const SceneSpec& spec) {
        GaussianScene scene;
        scene.sh_degree = spec.sh_degree;
        const int k = (spec.sh_degree + 1) * (spec.sh_degree + 1);
        for (int i = 0; i < spec.count; ++i) {
            Gaussian g;
            g.position = Vec3(rng.uniform(-spec.spread, spec.spread), rng.uniform(-spec.spread, spec.spread),
                              rng.uniform(-spec.spread, spec.spread));
            const double o = rng.uniform(spec.opacity_min, spec.opacity_max);
            g.opacity_logit = std::log(o / (1.0 - o));
            g.scale_log = Vec3(std::log(rng.uniform(spec.scale_min, spec.scale_max)),
                               std::log(rng.uniform(spec.scale_min, spec.scale_max)),
                               std::log(rng.uniform(spec.scale_min, spec.scale_max)));
            g.rotation = Vec4(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            if (g.rotation.norm() < 0.1)
                g.rotation = identity_quat();
            g.rotation.normalize();
            g.sh.resize(static_cast<std::size_t>(k));
            g.sh[0] = (Vec3(rng.uniform(spec.color_min, spec.color_max), rng.uniform(spec.color_min, spec.color_max),
                            rng.uniform(spec.color_min, spec.color_max)) -
                       Vec3::Constant(0.5)) /
                      0.28209479177387814;
            for (int c = 1; c < k; ++c) {
                g.sh[static_cast<std::size_t>(c)] =
                    Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) * spec.view_dependence;
            }
            scene.gaussians.push_back(std::move(g));
        }
        return scene;
    }

    inline CameraPose random_pose(Rng& rng, double radius = 3.5) {
        return orbit_pose(Vec3::Zero(), radius, rng.uniform(-30, 60), rng.uniform(0, 360));
    }

    /// Real SH basis up to degree 3 in the usual GS sign convention.
    inline std::vector<double> oracle_sh_basis(const Vec3& d) {
        const double x = d.x(), y = d.y(), z = d.z();
        const double c1 = std::sqrt(3.0 / (4.0 * kPi));
        return {0.5 * std::sqrt(1.0 / kPi),
                -c1 * y,
                c1 * z,
                -c1 * x,
                0.5 * std::sqrt(15.0 / kPi) * x * y,
                -0.5 * std::sqrt(15.0 / kPi) * y * z,
                0.25 * std::sqrt(5.0 / kPi) * (3.0 * z * z - 1.0),
                -0.5 * std::sqrt(15.0 / kPi) * x * z,
                0.25 * std::sqrt(15.0 / kPi) * (x * x - y * y),
                -0.25 * std::sqrt(35.0 / (2.0 * kPi)) * y * (3.0 * x * x - y * y),
                0.5 * std::sqrt(105.0 / kPi) * x * y * z,
                -0.25 * std::sqrt(21.0 / (2.0 * kPi)) * y * (5.0 * z * z - 1.0),
                0.25 * std::sqrt(7.0 / kPi) * z * (5.0 * z * z - 3.0),
                -0.25 * std::sqrt(21.0 / (2.0 * kPi)) * x * (5.0 * z * z - 1.0),
                0.25 * std::sqrt(105.0 / kPi) * z * (x * x - y * y),
                -0.25 * std::sqrt(35.0 / (2.0 * kPi)) * x * (x * x - 3.0 * y * y)};
    }

    struct OracleSplat {
        std::size_t index;
        double depth;
        Vec2 mean;
        Mat2 inv;
        double opacity;
        Vec3 color;
    };

    /// Screen-space projection of every Gaussian in front of the near plane.
    inline std::vector<OracleSplat> oracle_project(const GaussianScene& scene, const CameraPose& pose,
                                                   const Intrinsics& k, const RenderSettings& settings = {}) {
        const Eigen::Quaterniond cam_q(pose.rotation[0], pose.rotation[1], pose.rotation[2], pose.rotation[3]);
        const Mat3 w = cam_q.normalized().toRotationMatrix();
        const Vec3 cam_center = -w.transpose() * pose.translation;

        std::vector<OracleSplat> projected;
        for (std::size_t i = 0; i < scene.gaussians.size(); ++i) {
            const Gaussian& g = scene.gaussians[i];
            const Vec3 pc = w * g.position + pose.translation;
            if (pc.z() <= settings.near)
                continue;
            const Eigen::Quaterniond q(g.rotation[0], g.rotation[1], g.rotation[2], g.rotation[3]);
            const Mat3 r = q.normalized().toRotationMatrix();
            const Vec3 s = g.scale_log.array().exp();
            const Mat3 sigma = r * s.array().square().matrix().asDiagonal() * r.transpose();
            Eigen::Matrix<double, 2, 3> j;
            j << k.fx / pc.z(), 0.0, -k.fx * pc.x() / (pc.z() * pc.z()), 0.0, k.fy / pc.z(),
                -k.fy * pc.y() / (pc.z() * pc.z());
            Mat2 cov = j * w * sigma * w.transpose() * j.transpose();
            cov += settings.dilation * Mat2::Identity();

            const Vec3 dir = (g.position - cam_center).normalized();
            const auto basis = oracle_sh_basis(dir);
            Vec3 color = Vec3::Constant(0.5);
            for (std::size_t c = 0; c < g.sh.size(); ++c)
                color += basis[c] * g.sh[c];
            color = color.cwiseMax(0.0).cwiseMin(1.0);

            projected.push_back({i, pc.z(), Vec2(k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy),
                                 cov.inverse(), 1.0 / (1.0 + std::exp(-g.opacity_logit)), color});
        }
        return projected;
    }

    /// Per-pixel reference compositor: every Gaussian is evaluated at every pixel,
    /// hits are sorted by (depth, index) and composited front to back.
    inline RenderOutput brute_force_render(const GaussianScene& scene, const CameraPose& pose, const Intrinsics& k,
                                           const Vec3& background, const RenderSettings& settings = {}) {
        const auto projected = oracle_project(scene, pose, k, settings);
        RenderOutput out;
        out.rgb = Image(k.width, k.height, 3);
        out.alpha = Image(k.width, k.height, 1);
        for (int y = 0; y < k.height; ++y) {
            for (int x = 0; x < k.width; ++x) {
                struct Hit {
                    double depth;
                    std::size_t index;
                    double a;
                    Vec3 color;
                };
                std::vector<Hit> hits;
                for (const auto& p : projected) {
                    const Vec2 d = Vec2(x, y) - p.mean;
                    const double q = d.dot(p.inv * d);
                    if (settings.truncate && q > 9.0)
                        continue;
                    hits.push_back({p.depth, p.index, p.opacity * std::exp(-0.5 * q), p.color});
                }
                std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
                    return a.depth != b.depth ? a.depth < b.depth : a.index < b.index;
                });
                double t = 1.0;
                Vec3 c = Vec3::Zero();
                for (const auto& h : hits) {
                    c += t * h.a * h.color;
                    t *= 1.0 - h.a;
                    if (t < settings.transmittance_floor)
                        break;
                }
                c += t * background;
                for (int ch = 0; ch < 3; ++ch)
                    out.rgb.at(x, y, ch) = c[ch];
                out.alpha.at(x, y) = 1.0 - t;
            }
        }
        return out;
    }

    inline double max_abs_diff(const Image& a, const Image& b) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.data.size(); ++i)
            m = std::max(m, std::abs(a.data[i] - b.data[i]));
        return m;
    }

    inline Image random_image(Rng& rng, int w, int h, int c, double lo = 0.0, double hi = 1.0) {
        Image img(w, h, c);
        for (auto& v : img.data)
            v = rng.uniform(lo, hi);
        return img;
    }

    inline Mask random_mask(Rng& rng, int w, int h, double p = 0.5) {
        Mask m(w, h);
        for (auto& v : m.data)
            v = rng.uniform(0, 1) < p ? 1 : 0;
        return m;
    }

    /// Scalar probe sum(weights * render) used for gradient checks.
    inline double weighted_render(const GaussianScene& scene, const CameraPose& pose, const Intrinsics& k,
                                  const Vec3& bg, const Image& weights, const RenderSettings& settings) {
        const auto img = render(scene, std::nullopt, pose, k, bg, settings).rgb;
        double sum = 0.0;
        for (std::size_t i = 0; i < img.data.size(); ++i)
            sum += weights.data[i] * img.data[i];
        return sum;
    }

    /// Pointer to the p-th scalar parameter of Gaussian i for attribute `kind`
    /// (0 position, 1 opacity, 2 scale, 3 rotation, 4 sh); null when out of range.
    inline double* parameter(Gaussian& g, int kind, int p) {
        switch (kind) {
        case 0: return p < 3 ? &g.position[p] : nullptr;
        case 1: return p < 1 ? &g.opacity_logit : nullptr;
        case 2: return p < 3 ? &g.scale_log[p] : nullptr;
        case 3: return p < 4 ? &g.rotation[p] : nullptr;
        case 4: return p < static_cast<int>(g.sh.size()) * 3 ? &g.sh[static_cast<std::size_t>(p / 3)][p % 3] : nullptr;
        default: return nullptr;
        }
    }

    inline double analytic(const AttributeGradients& grads, std::size_t i, int kind, int p) {
        switch (kind) {
        case 0: return grads.position[i][p];
        case 1: return grads.opacity_logit[i];
        case 2: return grads.scale_log[i][p];
        case 3: return grads.rotation[i][p];
        default: return grads.sh_at(i, p / 3)[p % 3];
        }
    }

    struct GradCheck {
        int checked = 0;
        int failed = 0;
        double worst_rel = 0.0;  // over entries above the absolute floor
        double worst_abs = 0.0;
        std::string first_failure;
    };

    /// Central differences with step h against render_backward for every scalar
    /// parameter of every Gaussian. Pass: rel < rel_tol or abs < abs_tol.
    inline void check_gradients(const GaussianScene& scene, const CameraPose& pose, const Intrinsics& k,
                                const Vec3& bg, const Image& weights, const RenderSettings& settings, GradCheck& out,
                                double h = 1e-4, double rel_tol = 1e-3, double abs_tol = 1e-5) {
        const auto grads = render_backward(scene, std::nullopt, pose, k, bg, weights, settings);
        GaussianScene probe = scene;
        const char* names[] = {"position", "opacity", "scale", "rotation", "sh"};
        for (std::size_t i = 0; i < scene.gaussians.size(); ++i) {
            for (int kind = 0; kind < 5; ++kind) {
                for (int p = 0;; ++p) {
                    double* v = parameter(probe.gaussians[i], kind, p);
                    if (!v)
                        break;
                    const double saved = *v;
                    *v = saved + h;
                    const double plus = weighted_render(probe, pose, k, bg, weights, settings);
                    *v = saved - h;
                    const double minus = weighted_render(probe, pose, k, bg, weights, settings);
                    *v = saved;
                    const double fd = (plus - minus) / (2.0 * h);
                    const double an = analytic(grads, i, kind, p);
                    const double abs_err = std::abs(fd - an);
                    const double rel = abs_err / std::max(std::abs(fd), std::abs(an));
                    ++out.checked;
                    out.worst_abs = std::max(out.worst_abs, abs_err);
                    if (abs_err >= abs_tol) {
                        out.worst_rel = std::max(out.worst_rel, rel);
                        if (!(rel < rel_tol)) {
                            if (out.failed++ == 0) {
                                out.first_failure = std::string(names[kind]) + "[" + std::to_string(p) +
                                                    "] of gaussian " + std::to_string(i) + ": fd " + std::to_string(fd) +
                                                    " analytic " + std::to_string(an);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Zeroes the weights of pixels whose Mahalanobis distance to any Gaussian is
    /// within `band` of the truncation radius, so the probe is smooth there.
    inline Image mask_truncation_band(const GaussianScene& scene, const CameraPose& pose, const Intrinsics& k,
                                      Image weights, double band) {
        const auto projected = oracle_project(scene, pose, k);
        for (int y = 0; y < k.height; ++y) {
            for (int x = 0; x < k.width; ++x) {
                for (const auto& p : projected) {
                    const Vec2 d = Vec2(x, y) - p.mean;
                    if (std::abs(d.dot(p.inv * d) - 9.0) < band) {
                        for (int c = 0; c < 3; ++c)
                            weights.at(x, y, c) = 0.0;
                        break;
                    }
                }
            }
        }
        return weights;
    }

    inline std::filesystem::path temp_dir(const std::string& name) {
        auto dir = std::filesystem::temp_directory_path() / ("gsedit_test_" + name);
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        return dir;
    }

} // namespace gsedit::test
