/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "support.hpp"

#include "gsedit/error.hpp"

#include <doctest.h>

using namespace gsedit;
using gsedit::test::Rng;

namespace {

    const Intrinsics kSmall = Intrinsics::from_fov(64, 64, 50.0);

    RenderSettings smooth_settings() {
        RenderSettings s;
        s.truncate = false;
        s.transmittance_floor = 0.0;
        return s;
    }

} // namespace

TEST_CASE("render matches the brute-force compositor") {
    Rng rng(101);
    for (int trial = 0; trial < 12; ++trial) {
        const auto scene = test::random_scene(rng, {.count = rng.integer(1, 32), .sh_degree = trial % 4,
                                                    .spread = 1.0, .view_dependence = 0.4, .color_min = -0.2,
                                                    .color_max = 1.2});
        const auto pose = test::random_pose(rng, rng.uniform(2.5, 4.0));
        const Vec3 bg(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
        for (bool truncate : {true, false}) {
            RenderSettings settings;
            settings.truncate = truncate;
            const auto fast = render(scene, std::nullopt, pose, kSmall, bg, settings);
            const auto ref = test::brute_force_render(scene, pose, kSmall, bg, settings);
            CHECK(test::max_abs_diff(fast.rgb, ref.rgb) < 1e-5);
            CHECK(test::max_abs_diff(fast.alpha, ref.alpha) < 1e-5);
        }
    }
}

TEST_CASE("render_backward matches central differences without truncation") {
    Rng rng(202);
    test::GradCheck check;
    for (int trial = 0; trial < 4; ++trial) {
        const auto scene = test::random_scene(rng, {.count = 5, .sh_degree = trial % 4, .spread = 0.6});
        const auto pose = test::random_pose(rng);
        const Vec3 bg(0.2, 0.3, 0.4);
        const auto weights = test::random_image(rng, 64, 64, 3, -1.0, 1.0);
        test::check_gradients(scene, pose, kSmall, bg, weights, smooth_settings(), check);
    }
    INFO(check.first_failure);
    CHECK(check.checked > 0);
    CHECK(check.failed == 0);
}

TEST_CASE("render_backward matches central differences with truncation away from the cut") {
    Rng rng(303);
    test::GradCheck check;
    for (int trial = 0; trial < 4; ++trial) {
        const auto scene = test::random_scene(rng, {.count = 5, .sh_degree = 1, .spread = 0.6, .opacity_max = 0.8});
        const auto pose = test::random_pose(rng);
        const auto weights = test::mask_truncation_band(scene, pose, kSmall,
                                                        test::random_image(rng, 64, 64, 3, -1.0, 1.0), 0.5);
        test::check_gradients(scene, pose, kSmall, Vec3::Zero(), weights, RenderSettings{}, check);
    }
    INFO(check.first_failure);
    CHECK(check.failed == 0);
}

TEST_CASE("clamped colors carry no gradient") {
    Rng rng(5);
    auto scene = test::random_scene(rng, {.count = 1, .sh_degree = 0, .spread = 0.0});
    scene.gaussians[0].sh[0] = Vec3(5.0, -5.0, 0.0);  // red above 1, green below 0
    const auto pose = orbit_pose(Vec3::Zero(), 3.0, 0.0, 0.0);
    const auto grads = render_backward(scene, std::nullopt, pose, kSmall, Vec3::Zero(), Image(64, 64, 3, 1.0));
    CHECK(grads.sh_at(0, 0).x() == 0.0);
    CHECK(grads.sh_at(0, 0).y() == 0.0);
    CHECK(grads.sh_at(0, 0).z() != 0.0);
}

TEST_CASE("empty scene and empty subset render the background") {
    const auto pose = orbit_pose(Vec3::Zero(), 3.0, 10.0, 20.0);
    const Vec3 bg(0.1, 0.2, 0.3);
    GaussianScene empty;
    const auto out = render(empty, std::nullopt, pose, kSmall, bg);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            CHECK(out.rgb.at(x, y, 0) == 0.1);
            CHECK(out.alpha.at(x, y) == 0.0);
        }
    Rng rng(1);
    const auto scene = test::random_scene(rng, {.count = 5});
    const std::vector<std::size_t> none;
    CHECK(render(scene, std::span<const std::size_t>(none), pose, kSmall, bg).rgb == out.rgb);
}

TEST_CASE("subset render equals the render of the extracted Gaussians") {
    Rng rng(77);
    const auto scene = test::random_scene(rng, {.count = 20});
    const std::vector<std::size_t> subset = {1, 4, 5, 11, 19};
    GaussianScene extracted;
    extracted.sh_degree = scene.sh_degree;
    for (auto i : subset)
        extracted.gaussians.push_back(scene.gaussians[i]);
    const auto pose = test::random_pose(rng);
    const auto a = render(scene, std::span<const std::size_t>(subset), pose, kSmall, Vec3::Zero());
    const auto b = render(extracted, std::nullopt, pose, kSmall, Vec3::Zero());
    CHECK(a.rgb == b.rgb);
    CHECK(a.alpha == b.alpha);
}

TEST_CASE("depth order is front to back with index tie-break") {
    Rng rng(8);
    auto scene = test::random_scene(rng, {.count = 6});
    scene.gaussians[4].position = scene.gaussians[1].position;  // equal depth
    const auto pose = test::random_pose(rng);
    const auto out = render(scene, std::nullopt, pose, kSmall, Vec3::Zero());
    REQUIRE(out.depth_order.size() == 6);
    const Mat3 w = pose.rotation_matrix();
    for (std::size_t j = 1; j < out.depth_order.size(); ++j) {
        const double za = (w * scene.gaussians[out.depth_order[j - 1]].position).z();
        const double zb = (w * scene.gaussians[out.depth_order[j]].position).z();
        CHECK(za <= zb);
        if (za == zb)
            CHECK(out.depth_order[j - 1] < out.depth_order[j]);
    }
}

TEST_CASE("Gaussians behind the near plane are culled") {
    Rng rng(9);
    auto scene = test::random_scene(rng, {.count = 1, .spread = 0.0});
    const auto pose = orbit_pose(Vec3::Zero(), 3.0, 0.0, 0.0);
    scene.gaussians[0].position = pose.center() - (Vec3::Zero() - pose.center()).normalized();
    const auto out = render(scene, std::nullopt, pose, kSmall, Vec3::Zero());
    CHECK(out.depth_order.empty());
    CHECK(out.alpha.data == std::vector<double>(64 * 64, 0.0));
}

TEST_CASE("render input errors") {
    Rng rng(10);
    auto scene = test::random_scene(rng, {.count = 3});
    const auto pose = test::random_pose(rng);
    const std::vector<std::size_t> bad = {0, 3};
    CHECK_THROWS_AS(render(scene, std::span<const std::size_t>(bad), pose, kSmall, Vec3::Zero()), Error);

    // Without dilation a needle seen side-on has a rank-one footprint.
    RenderSettings no_dilation;
    no_dilation.dilation = 0.0;
    scene.gaussians[1].scale_log = Vec3(0.0, -60.0, -60.0);
    scene.gaussians[1].rotation = identity_quat();
    scene.gaussians[1].position = Vec3::Zero();
    const auto front = orbit_pose(Vec3::Zero(), 3.0, 0.0, 0.0);
    try {
        render(scene, std::nullopt, front, kSmall, Vec3::Zero(), no_dilation);
        FAIL("expected a numerical error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Numerical);
        CHECK(std::string(e.what()).find("gaussian 1") != std::string::npos);
    }
}

TEST_CASE("instance mask thresholds the subset alpha") {
    Rng rng(12);
    const auto scene = test::random_scene(rng, {.count = 8});
    const auto pose = test::random_pose(rng);
    const std::vector<std::size_t> subset = {0, 2, 3};
    const std::span<const std::size_t> sel(subset);
    const auto alpha = render(scene, sel, pose, kSmall, Vec3::Zero()).alpha;
    for (double tau : {0.1, 0.5, 0.9}) {
        const auto mask = render_instance_mask(scene, sel, pose, kSmall, tau);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                CHECK(mask.at(x, y) == (alpha.at(x, y) > tau));
    }
}

TEST_CASE("duplicated Gaussians render like their sources in isolation") {
    Rng rng(13);
    const auto scene = test::random_scene(rng, {.count = 30, .spread = 1.2});
    BoundingBox3D box;
    box.half_extents = Vec3::Constant(0.6);
    const auto sel = build_edit_set(scene, box, TaskKind::Insert);
    const auto inside = select_in_box(scene, box);
    REQUIRE(!inside.empty());
    const auto pose = test::random_pose(rng);
    const auto a = render(scene, std::span<const std::size_t>(inside), pose, kSmall, Vec3::Zero());
    const auto b = render(sel.scene, std::span<const std::size_t>(sel.edit_set.editable_indices), pose, kSmall,
                          Vec3::Zero());
    CHECK(a.rgb == b.rgb);
}

TEST_CASE("render is deterministic") {
    Rng rng(14);
    const auto scene = test::random_scene(rng, {.count = 25});
    const auto pose = test::random_pose(rng);
    CHECK(render(scene, std::nullopt, pose, kSmall, Vec3::Ones()).rgb ==
          render(scene, std::nullopt, pose, kSmall, Vec3::Ones()).rgb);
}

TEST_CASE("backward is linear in the upstream gradient and zero outside the subset") {
    Rng rng(15);
    const auto scene = test::random_scene(rng, {.count = 6});
    const auto pose = test::random_pose(rng);
    const auto g1 = test::random_image(rng, 64, 64, 3, -1, 1);
    const auto g2 = test::random_image(rng, 64, 64, 3, -1, 1);
    Image sum = g1;
    for (std::size_t i = 0; i < sum.data.size(); ++i)
        sum.data[i] += 2.0 * g2.data[i];
    const std::vector<std::size_t> subset = {1, 3};
    const std::span<const std::size_t> sel(subset);
    auto a = render_backward(scene, sel, pose, kSmall, Vec3::Zero(), g1);
    a.add_scaled(render_backward(scene, sel, pose, kSmall, Vec3::Zero(), g2), 2.0);
    const auto b = render_backward(scene, sel, pose, kSmall, Vec3::Zero(), sum);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK((a.position[i] - b.position[i]).norm() <= 1e-9 * (1.0 + b.position[i].norm()));
        const bool in_subset = i == 1 || i == 3;
        CHECK(b.is_zero_at(i) == !in_subset);
    }
}
