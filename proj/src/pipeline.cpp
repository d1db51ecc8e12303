/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/pipeline.hpp"
#include "gsedit/error.hpp"
#include "gsedit/losses.hpp"
#include "gsedit/optimizer.hpp"
#include "gsedit/ply.hpp"
#include "gsedit/renderer.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <random>

namespace gsedit {

    namespace {

        using Clock = std::chrono::steady_clock;

        double ms_since(Clock::time_point start) {
            return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        }

        double mean_square(const Image& g) {
            double sum = 0.0;
            for (double v : g.data) {
                sum += v * v;
            }
            return g.data.empty() ? 0.0 : sum / static_cast<double>(g.data.size());
        }

        std::string checkpoint_name(const std::string& stage, int iter) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%s_%06d.ply", stage.c_str(), iter);
            return buf;
        }

        std::string write_checkpoint(const GaussianScene& scene, const StageOptions& options, const std::string& name,
                                     RunReport& report) {
            if (!options.checkpoint_dir) {
                return {};
            }
            std::filesystem::create_directories(*options.checkpoint_dir);
            const auto path = *options.checkpoint_dir / name;
            save_ply(scene, path);
            report.checkpoints.push_back(path.string());
            return path.string();
        }

        bool is_provider_failure(const Error& e) {
            return e.code() == ErrorCode::Provider || e.code() == ErrorCode::Transport;
        }

        /// Runs `body`; a provider failure checkpoints the current scene and aborts.
        template <typename Body>
        void guarded(const std::string& stage, int iter, const GaussianScene& scene, const StageOptions& options,
                     RunReport& report, Body&& body) {
            try {
                body();
            } catch (const Error& e) {
                if (!is_provider_failure(e)) {
                    throw;
                }
                const auto ckpt = write_checkpoint(scene, options, checkpoint_name(stage + "_abort", iter), report);
                throw StageAborted(e.code(),
                                   stage + " aborted at iteration " + std::to_string(iter) + ": " + e.what(), ckpt);
            }
        }

        struct SdsTerm {
            AttributeGradients grads;
            double loss = 0.0;
        };

        SdsTerm sds_term(const GaussianScene& scene, Subset subset, const CameraPose& pose, const Intrinsics& k,
                         const Vec3& background, PromptKind prompt, std::uint64_t request_id, const EditConfig& cfg,
                         GuidanceProvider& provider) {
            GuidanceRequest req;
            req.request_id = request_id;
            req.image = render(scene, subset, pose, k, background, cfg.render).rgb;
            req.pose = pose;
            req.intrinsics = k;
            req.prompt_kind = prompt;
            const auto resp = provider.sds_gradient(req);
            validate_response(GuidanceKind::Sds, req, resp);
            return {render_backward(scene, subset, pose, k, background, resp.payload, cfg.render),
                    mean_square(resp.payload)};
        }

    } // namespace

    nlohmann::json RunReport::to_json() const {
        nlohmann::json curve = nlohmann::json::array();
        for (const auto& e : entries) {
            curve.push_back({{"stage", e.stage}, {"iter", e.iter}, {"loss", e.loss}, {"wall_ms", e.wall_ms}});
        }
        return {{"task", task},
                {"provider", provider},
                {"gaussian_count", gaussian_count},
                {"editable_count", editable_count},
                {"poses", {{"coarse", coarse_pose_count}, {"refine", refine_pose_count}}},
                {"timings_ms", {{"coarse", coarse_ms}, {"refine", refine_ms}, {"total", total_ms}}},
                {"refine_mse", {{"initial", refine_initial_mse}, {"final", refine_final_mse}}},
                {"checkpoints", checkpoints},
                {"losses", curve}};
    }

    void validate_edit(const GaussianScene& scene, const EditSet& edit_set, const EditConfig& cfg) {
        edit_set.validate(scene.gaussians.size());
        if (edit_set.editable_indices.empty()) {
            fail(ErrorCode::Validation, "edit set is empty");
        }
        if (!edit_set.trainable.any()) {
            fail(ErrorCode::Validation, "edit set has no trainable attributes");
        }
        if (edit_set.task != cfg.task) {
            fail(ErrorCode::Validation, "edit set task does not match the config task");
        }
    }

    void coarse_edit(GaussianScene& scene, const EditSet& edit_set, const EditConfig& cfg, GuidanceProvider& provider,
                     RunReport& report, const StageOptions& options) {
        cfg.validate();
        validate_edit(scene, edit_set, cfg);

        const auto start = Clock::now();
        const Intrinsics k = cfg.intrinsics();
        const Vec3 black = Vec3::Zero();
        const std::span<const std::size_t> editable(edit_set.editable_indices);
        EditOptimizer optimizer(scene, edit_set, cfg.optimizer, scene.extent());
        std::mt19937_64 rng(cfg.seed);

        // Stylize has no foreground/background split, so only the global term is used.
        const double gamma = cfg.task == TaskKind::Stylize ? 1.0 : cfg.gamma;
        const bool use_global = gamma > 0.0;
        const bool use_local = gamma < 1.0;
        std::uint64_t request_id = 1;

        for (int it = 0; it < cfg.coarse_iters; ++it) {
            const CameraPose pose = sample_random_pose(cfg.coarse_poses, rng);
            const std::uint64_t id_global = request_id++;
            const std::uint64_t id_local = request_id++;
            SdsTerm global, local;

            guarded("coarse", it, scene, options, report, [&] {
                const auto run_global = [&] {
                    return sds_term(scene, std::nullopt, pose, k, cfg.background, PromptKind::Global, id_global, cfg,
                                    provider);
                };
                const auto run_local = [&] {
                    return sds_term(scene, editable, pose, k, black, PromptKind::Local, id_local, cfg, provider);
                };
                if (use_global && use_local && cfg.concurrent_guidance) {
                    auto pending = std::async(std::launch::async, run_local);
                    global = run_global();
                    local = pending.get();
                } else {
                    if (use_global)
                        global = run_global();
                    if (use_local)
                        local = run_local();
                }
            });

            AttributeGradients grads;
            if (use_global && use_local) {
                grads = combine_sds(global.grads, local.grads, gamma);
            } else {
                grads = use_global ? std::move(global.grads) : std::move(local.grads);
            }
            optimizer.step(scene, grads);

            const double loss = gamma * global.loss + (1.0 - gamma) * local.loss;
            report.entries.push_back({"coarse", it, loss, ms_since(start)});
            if (options.on_step)
                options.on_step("coarse", it, scene);
            if (cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0) {
                write_checkpoint(scene, options, checkpoint_name("coarse", it + 1), report);
            }
        }
        report.coarse_pose_count = cfg.coarse_iters;
        report.coarse_ms = ms_since(start);
    }

    std::vector<PseudoGtView> build_pseudo_gts(const GaussianScene& scene, const EditSet& edit_set,
                                               const EditConfig& cfg, GuidanceProvider& provider) {
        const Intrinsics k = cfg.intrinsics();
        const auto fixed = edit_set.fixed_indices(scene.gaussians.size());
        const std::span<const std::size_t> fixed_span(fixed);
        const std::span<const std::size_t> editable(edit_set.editable_indices);

        std::vector<PseudoGtView> views;
        std::uint64_t request_id = 1;
        for (const auto& pose : sample_refinement_grid(cfg.refine_poses)) {
            GuidanceRequest req;
            req.request_id = request_id++;
            req.image = render(scene, std::nullopt, pose, k, cfg.background, cfg.render).rgb;
            req.pose = pose;
            req.intrinsics = k;
            req.prompt_kind = PromptKind::Global;
            req.noise_level = cfg.t0;
            const auto denoised = provider.denoise(req);
            validate_response(GuidanceKind::Denoise, req, denoised);

            const Image background = render(scene, fixed_span, pose, k, cfg.background, cfg.render).rgb;
            Mask mask = render_instance_mask(scene, editable, pose, k, cfg.mask_threshold, cfg.render);
            Image target = compose_pseudo_gt(denoised.payload, background, mask);
            views.push_back({pose, std::move(target), std::move(mask)});
        }
        return views;
    }

    double cached_view_mse(const GaussianScene& scene, const std::vector<PseudoGtView>& views, const EditConfig& cfg) {
        if (views.empty()) {
            return 0.0;
        }
        const Intrinsics k = cfg.intrinsics();
        double sum = 0.0;
        for (const auto& view : views) {
            sum += mse(render(scene, std::nullopt, view.pose, k, cfg.background, cfg.render).rgb, view.target);
        }
        return sum / static_cast<double>(views.size());
    }

    void refine(GaussianScene& scene, const EditSet& edit_set, const EditConfig& cfg, GuidanceProvider& provider,
                RunReport& report, const StageOptions& options) {
        cfg.validate();
        validate_edit(scene, edit_set, cfg);

        const auto start = Clock::now();
        const Intrinsics k = cfg.intrinsics();
        EditOptimizer optimizer(scene, edit_set, cfg.optimizer, scene.extent());

        std::vector<PseudoGtView> views;
        guarded("refine", 0, scene, options, report, [&] { views = build_pseudo_gts(scene, edit_set, cfg, provider); });
        report.refine_pose_count = static_cast<int>(views.size());
        report.refine_initial_mse = cached_view_mse(scene, views, cfg);

        for (int it = 0; it < cfg.refine_iters; ++it) {
            if (cfg.regenerate_pseudo_gt_every > 0 && it > 0 && it % cfg.regenerate_pseudo_gt_every == 0) {
                guarded("refine", it, scene, options, report,
                        [&] { views = build_pseudo_gts(scene, edit_set, cfg, provider); });
            }
            const auto& view = views[static_cast<std::size_t>(it) % views.size()];
            const Image current = render(scene, std::nullopt, view.pose, k, cfg.background, cfg.render).rgb;
            const double loss = mse(current, view.target);
            const Image grad = mse_gradient(current, view.target);
            optimizer.step(scene, render_backward(scene, std::nullopt, view.pose, k, cfg.background, grad, cfg.render));

            report.entries.push_back({"refine", it, loss, ms_since(start)});
            if (options.on_step)
                options.on_step("refine", it, scene);
            if (cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0) {
                write_checkpoint(scene, options, checkpoint_name("refine", it + 1), report);
            }
        }
        report.refine_final_mse = cached_view_mse(scene, views, cfg);
        report.refine_ms = ms_since(start);
    }

    nlohmann::json edit_set_to_json(const EditSet& edit_set, std::size_t scene_size) {
        const auto& t = edit_set.trainable;
        return {{"task", task_name(edit_set.task)},
                {"scene_size", scene_size},
                {"editable_indices", edit_set.editable_indices},
                {"trainable",
                 {{"position", t.position}, {"opacity", t.opacity}, {"scale", t.scale}, {"rotation", t.rotation},
                  {"sh", t.sh}}}};
    }

    RunOutputs run(const EditConfig& cfg, const std::filesystem::path& scene_path,
                   const std::filesystem::path& out_dir, GuidanceProvider& provider, RunOptions options) {
        cfg.validate();
        const auto start = Clock::now();
        if (!std::filesystem::exists(scene_path)) {
            fail(ErrorCode::Io, "scene not found: " + scene_path.string());
        }
        const GaussianScene original = load_ply(scene_path);

        EditSetOptions edit_options;
        edit_options.jitter_inserted = cfg.jitter_inserted;
        edit_options.seed = cfg.seed;
        EditSelection selection = build_edit_set(original, cfg.box, cfg.task, edit_options);

        RunOutputs out;
        out.scene = std::move(selection.scene);
        out.edit_set = std::move(selection.edit_set);
        out.report.task = std::string(task_name(cfg.task));
        out.report.provider = provider.name();
        out.report.gaussian_count = out.scene.gaussians.size();
        out.report.editable_count = out.edit_set.editable_indices.size();

        std::filesystem::create_directories(out_dir);
        if (!options.stage.checkpoint_dir) {
            options.stage.checkpoint_dir = out_dir / "checkpoints";
        }

        coarse_edit(out.scene, out.edit_set, cfg, provider, out.report, options.stage);
        refine(out.scene, out.edit_set, cfg, provider, out.report, options.stage);

        // Persisted values are float32; round now so in-memory renders match reloads.
        out.scene.round_to_storage_precision();
        out.scene_path = out_dir / "edited.ply";
        save_ply(out.scene, out.scene_path);
        {
            std::ofstream f(out_dir / "editset.json");
            f << edit_set_to_json(out.edit_set, out.scene.gaussians.size()).dump(2) << '\n';
        }
        if (options.write_turntable) {
            const auto dir = out_dir / "turntable";
            std::filesystem::create_directories(dir);
            const Intrinsics k = cfg.intrinsics();
            int index = 0;
            for (const auto& pose : sample_refinement_grid(cfg.refine_poses)) {
                char name[32];
                std::snprintf(name, sizeof name, "view_%03d.png", index++);
                write_png(render(out.scene, std::nullopt, pose, k, cfg.background, cfg.render).rgb, dir / name);
            }
        }

        out.report.total_ms = ms_since(start);
        out.report_path = out_dir / "report.json";
        std::ofstream f(out.report_path);
        f << out.report.to_json().dump(2) << '\n';
        if (!f) {
            fail(ErrorCode::Io, "cannot write " + out.report_path.string());
        }
        return out;
    }

} // namespace gsedit
