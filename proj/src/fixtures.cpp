/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/fixtures.hpp"
#include "gsedit/camera.hpp"
#include "gsedit/error.hpp"
#include "gsedit/ply.hpp"
#include "gsedit/renderer.hpp"
#include "gsedit/sh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace gsedit {

    namespace {

        // std distributions are implementation-defined; map raw engine output ourselves
        // so fixtures are identical across standard libraries.
        class Rng {
        public:
            explicit Rng(std::uint64_t seed) : engine_(seed) {}

            double uniform(double lo, double hi) {
                const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
                return lo + (hi - lo) * u;
            }

            Vec4 rotation() {
                return normalized_quat(Vec4(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)) +
                                       Vec4(1.5, 0, 0, 0));
            }

        private:
            std::mt19937_64 engine_;
        };

        Gaussian make_gaussian(int sh_degree, const Vec3& position, double opacity, const Vec3& scale,
                               const Vec4& rotation, const Vec3& rgb, Rng& rng, double view_dependence) {
            Gaussian g;
            g.position = position;
            g.opacity_logit = std::log(opacity / (1.0 - opacity));
            g.scale_log = scale.array().log();
            g.rotation = rotation;
            g.sh.assign(static_cast<std::size_t>(sh_coeff_count(sh_degree)), Vec3::Zero());
            g.sh[0] = Vec3(rgb_to_sh_dc(rgb.x()), rgb_to_sh_dc(rgb.y()), rgb_to_sh_dc(rgb.z()));
            for (std::size_t k = 1; k < g.sh.size(); ++k) {
                g.sh[k] = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) * view_dependence;
            }
            return g;
        }

        /// Shifted, recolored and slightly grown copies of the in-box Gaussians.
        GaussianScene make_target_fg(const GaussianScene& scene, const BoundingBox3D& box, Rng& rng) {
            GaussianScene fg;
            fg.sh_degree = scene.sh_degree;
            const Vec3 shift = box.half_extents.cwiseProduct(Vec3(0.16, 0.1, -0.08));
            for (std::size_t i : select_in_box(scene, box)) {
                Gaussian g = scene.gaussians[i];
                g.position += shift;
                g.scale_log += Vec3::Constant(0.15);
                g.opacity_logit += 0.5;
                const Vec3 rgb(rng.uniform(0.6, 0.9), rng.uniform(0.1, 0.3), rng.uniform(0.3, 0.6));
                g.sh[0] = Vec3(rgb_to_sh_dc(rgb.x()), rgb_to_sh_dc(rgb.y()), rgb_to_sh_dc(rgb.z()));
                fg.add(std::move(g));
            }
            return fg;
        }

        Fixture finish(Fixture f, Rng& rng) {
            f.scene.round_to_storage_precision();
            f.target_fg = make_target_fg(f.scene, f.box, rng);
            f.target_fg.round_to_storage_precision();
            f.target_full = f.scene;
            for (const auto& g : f.target_fg.gaussians) {
                f.target_full.add(g);
            }
            f.scene.validate();
            return f;
        }

        Fixture blob_10(std::uint64_t seed) {
            Rng rng(seed ^ 0xb10b10ULL);
            Fixture f;
            f.name = "blob-10";
            f.seed = seed;
            f.box.half_extents = Vec3::Constant(0.5);
            f.scene.sh_degree = 1;

            // Four small Gaussians inside the box form the object to edit.
            for (int i = 0; i < 4; ++i) {
                const Vec3 p(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
                const Vec3 s(rng.uniform(0.08, 0.16), rng.uniform(0.08, 0.16), rng.uniform(0.08, 0.16));
                const Vec3 rgb(rng.uniform(0.2, 0.4), rng.uniform(0.5, 0.8), rng.uniform(0.2, 0.5));
                f.scene.add(make_gaussian(1, p, rng.uniform(0.6, 0.8), s, rng.rotation(), rgb, rng, 0.05));
            }
            // Six larger background blobs on a ring around the box.
            for (int i = 0; i < 6; ++i) {
                const double a = 2.0 * kPi * i / 6.0 + rng.uniform(-0.2, 0.2);
                const Vec3 p(1.3 * std::cos(a), rng.uniform(-0.6, 0.0), 1.3 * std::sin(a));
                const Vec3 s(rng.uniform(0.2, 0.35), rng.uniform(0.1, 0.2), rng.uniform(0.2, 0.35));
                const Vec3 rgb(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7));
                f.scene.add(make_gaussian(1, p, rng.uniform(0.5, 0.9), s, rng.rotation(), rgb, rng, 0.1));
            }
            return finish(std::move(f), rng);
        }

        Fixture box_scene_100(std::uint64_t seed) {
            Rng rng(seed ^ 0xb0c5ce100ULL);
            Fixture f;
            f.name = "box-scene-100";
            f.seed = seed;
            f.box.half_extents = Vec3::Constant(0.35);
            f.scene.sh_degree = 3;
            for (int i = 0; i < 100; ++i) {
                // Every fifth Gaussian sits inside the box.
                const double r = i % 5 == 0 ? 0.25 : 1.2;
                const Vec3 p(rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r));
                const Vec3 s(rng.uniform(0.04, 0.15), rng.uniform(0.04, 0.15), rng.uniform(0.04, 0.15));
                const Vec3 rgb(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
                f.scene.add(make_gaussian(3, p, rng.uniform(0.3, 0.95), s, rng.rotation(), rgb, rng, 0.08));
            }
            return finish(std::move(f), rng);
        }

        constexpr const char* kConfigTemplate = R"(# Generated by gsedit fixture %s (seed %llu).
task = "insert"
seed = %llu
gamma = 0.5
coarse_iters = 2000
refine_iters = 3000
t0 = 0.05

[image]
width = 64
height = 64
fov_deg = 50.0

[box]
center = [%.9g, %.9g, %.9g]
half_extents = [%.9g, %.9g, %.9g]

[provider]
spec = "mock:."
)";

    } // namespace

    std::vector<std::string> fixture_names() { return {"blob-10", "box-scene-100"}; }

    Fixture make_fixture(std::string_view name, std::uint64_t seed) {
        if (name == "blob-10")
            return blob_10(seed);
        if (name == "box-scene-100")
            return box_scene_100(seed);
        fail(ErrorCode::InvalidArgument, "unknown fixture '" + std::string(name) + "' (expected blob-10 or box-scene-100)");
    }

    void write_fixture(const Fixture& fixture, const std::filesystem::path& dir) {
        std::filesystem::create_directories(dir / "targets");
        save_ply(fixture.scene, dir / "scene.ply");
        save_ply(fixture.target_full, dir / "target_full.ply");
        save_ply(fixture.target_fg, dir / "target_fg.ply");

        const auto seed = static_cast<unsigned long long>(fixture.seed);
        const Vec3& c = fixture.box.center;
        const Vec3& h = fixture.box.half_extents;
        char text[1024];
        std::snprintf(text, sizeof text, kConfigTemplate, fixture.name.c_str(), seed, seed, c.x(), c.y(), c.z(),
                      h.x(), h.y(), h.z());
        std::ofstream config(dir / "config.toml", std::ios::binary);
        config << text;
        if (!config) {
            fail(ErrorCode::Io, "cannot write " + (dir / "config.toml").string());
        }

        const Intrinsics k = Intrinsics::from_fov(64, 64, 50.0);
        for (int i = 0; i < 4; ++i) {
            const CameraPose pose = orbit_pose(fixture.box.center, 3.5, 15.0, 90.0 * i);
            char name[32];
            std::snprintf(name, sizeof name, "view_%03d.png", i);
            write_png(render(fixture.target_full, std::nullopt, pose, k, Vec3::Zero()).rgb, dir / "targets" / name);
        }
    }

} // namespace gsedit
