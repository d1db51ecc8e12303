/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/config.hpp"
#include "gsedit/error.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace gsedit {

    void EditConfig::validate() const {
        box.validate();
        prompts.validate();
        if (!(gamma >= 0.0 && gamma <= 1.0)) {
            fail(ErrorCode::Config, "gamma must lie in [0,1]");
        }
        if (coarse_iters <= 0 || refine_iters <= 0) {
            fail(ErrorCode::Config, "iteration counts must be positive");
        }
        if (!(t0 > 0.0 && t0 < 1.0)) {
            fail(ErrorCode::Config, "t0 must lie in (0,1)");
        }
        if (!(mask_threshold >= 0.0 && mask_threshold < 1.0)) {
            fail(ErrorCode::Config, "mask_threshold must lie in [0,1)");
        }
        if (!(lambda_loc >= 0.0)) {
            fail(ErrorCode::Config, "lambda_loc must be non-negative");
        }
        if (image_width <= 0 || image_height <= 0) {
            fail(ErrorCode::Config, "image size must be positive");
        }
        if (!background.allFinite() || (background.array() < 0.0).any() || (background.array() > 1.0).any()) {
            fail(ErrorCode::Config, "background color must lie in [0,1]");
        }
        if (checkpoint_every < 0 || regenerate_pseudo_gt_every < 0) {
            fail(ErrorCode::Config, "checkpoint_every and regenerate_pseudo_gt_every must be non-negative");
        }
        if (!(render.dilation >= 0.0) || !(render.transmittance_floor >= 0.0 && render.transmittance_floor < 1.0)) {
            fail(ErrorCode::Config, "invalid render settings");
        }
        optimizer.validate();
        coarse_poses.validate();
        refine_poses.validate_grid();
        (void)intrinsics();
    }

    namespace {

        using nlohmann::json;

        void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
            if (!j.is_object()) {
                fail(ErrorCode::Config, "section '" + section + "' must be a table");
            }
            const std::set<std::string> keys(allowed.begin(), allowed.end());
            for (const auto& [key, value] : j.items()) {
                if (!keys.count(key)) {
                    fail(ErrorCode::Config, "unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
                }
            }
        }

        template <typename T>
        void read(const json& j, const char* key, T& out) {
            if (j.contains(key)) {
                out = j.at(key).get<T>();
            }
        }

        Vec3 vec3_of(const json& j, const char* what) {
            const auto v = j.get<std::vector<double>>();
            if (v.size() != 3)
                fail(ErrorCode::Config, std::string(what) + " must have 3 components");
            return {v[0], v[1], v[2]};
        }

        Vec4 vec4_of(const json& j, const char* what) {
            const auto v = j.get<std::vector<double>>();
            if (v.size() != 4)
                fail(ErrorCode::Config, std::string(what) + " must have 4 components (w, x, y, z)");
            return {v[0], v[1], v[2], v[3]};
        }

        std::pair<double, double> range_of(const json& j, const char* what) {
            const auto v = j.get<std::vector<double>>();
            if (v.size() != 2)
                fail(ErrorCode::Config, std::string(what) + " must be [min, max]");
            return {v[0], v[1]};
        }

        void read_poses(const json& j, const std::string& section, PoseSamplerConfig& cfg, const Vec3& box_center) {
            cfg.look_at = box_center;
            if (j.is_null())
                return;
            check_keys(j, section, {"look_at", "radius", "elevation", "azimuth", "interval"});
            if (j.contains("look_at"))
                cfg.look_at = vec3_of(j.at("look_at"), "look_at");
            if (j.contains("radius"))
                std::tie(cfg.radius_min, cfg.radius_max) = range_of(j.at("radius"), "radius");
            if (j.contains("elevation"))
                std::tie(cfg.elevation_min_deg, cfg.elevation_max_deg) = range_of(j.at("elevation"), "elevation");
            if (j.contains("azimuth"))
                std::tie(cfg.azimuth_min_deg, cfg.azimuth_max_deg) = range_of(j.at("azimuth"), "azimuth");
            read(j, "interval", cfg.interval_deg);
        }

        json poses_to_json(const PoseSamplerConfig& cfg) {
            return {{"look_at", {cfg.look_at.x(), cfg.look_at.y(), cfg.look_at.z()}},
                    {"radius", {cfg.radius_min, cfg.radius_max}},
                    {"elevation", {cfg.elevation_min_deg, cfg.elevation_max_deg}},
                    {"azimuth", {cfg.azimuth_min_deg, cfg.azimuth_max_deg}},
                    {"interval", cfg.interval_deg}};
        }

        json toml_to_json(const toml::node& node) {
            if (const auto* table = node.as_table()) {
                json out = json::object();
                for (const auto& [key, value] : *table) {
                    out[std::string(key.str())] = toml_to_json(value);
                }
                return out;
            }
            if (const auto* array = node.as_array()) {
                json out = json::array();
                for (const auto& value : *array) {
                    out.push_back(toml_to_json(value));
                }
                return out;
            }
            if (const auto* v = node.as_string())
                return v->get();
            if (const auto* v = node.as_integer())
                return v->get();
            if (const auto* v = node.as_floating_point())
                return v->get();
            if (const auto* v = node.as_boolean())
                return v->get();
            fail(ErrorCode::Config, "unsupported TOML value type (dates and times are not accepted)");
        }

    } // namespace

    EditConfig config_from_json(const json& j) {
        EditConfig cfg;
        try {
            check_keys(j, "",
                       {"task", "seed", "gamma", "coarse_iters", "refine_iters", "t0", "mask_threshold", "lambda_loc",
                        "background", "checkpoint_every", "jitter_inserted", "regenerate_pseudo_gt_every",
                        "concurrent_guidance", "image", "box", "prompts", "optimizer", "coarse_poses", "refine_poses",
                        "render", "provider"});
            if (j.contains("task")) {
                const auto name = j.at("task").get<std::string>();
                const auto task = parse_task(name);
                if (!task)
                    fail(ErrorCode::Config, "unknown task '" + name + "'");
                cfg.task = *task;
            }
            read(j, "seed", cfg.seed);
            read(j, "gamma", cfg.gamma);
            read(j, "coarse_iters", cfg.coarse_iters);
            read(j, "refine_iters", cfg.refine_iters);
            read(j, "t0", cfg.t0);
            read(j, "mask_threshold", cfg.mask_threshold);
            read(j, "lambda_loc", cfg.lambda_loc);
            read(j, "checkpoint_every", cfg.checkpoint_every);
            read(j, "jitter_inserted", cfg.jitter_inserted);
            read(j, "regenerate_pseudo_gt_every", cfg.regenerate_pseudo_gt_every);
            read(j, "concurrent_guidance", cfg.concurrent_guidance);
            if (j.contains("background"))
                cfg.background = vec3_of(j.at("background"), "background");

            if (j.contains("image")) {
                const auto& s = j.at("image");
                check_keys(s, "image", {"width", "height", "fov_deg"});
                read(s, "width", cfg.image_width);
                read(s, "height", cfg.image_height);
                read(s, "fov_deg", cfg.fov_y_deg);
            }
            if (j.contains("box")) {
                const auto& s = j.at("box");
                check_keys(s, "box", {"center", "half_extents", "orientation"});
                if (s.contains("center"))
                    cfg.box.center = vec3_of(s.at("center"), "box.center");
                if (s.contains("half_extents"))
                    cfg.box.half_extents = vec3_of(s.at("half_extents"), "box.half_extents");
                if (s.contains("orientation"))
                    cfg.box.orientation = vec4_of(s.at("orientation"), "box.orientation");
            }
            if (j.contains("prompts")) {
                const auto& s = j.at("prompts");
                check_keys(s, "prompts",
                           {"scene_token", "object_token", "scene", "global", "local", "reference", "object_keyword"});
                read(s, "scene_token", cfg.prompts.scene_token);
                read(s, "object_token", cfg.prompts.object_token);
                read(s, "scene", cfg.prompts.scene_prompt);
                read(s, "global", cfg.prompts.global_prompt);
                read(s, "local", cfg.prompts.local_prompt);
                read(s, "reference", cfg.prompts.reference_prompt);
                read(s, "object_keyword", cfg.prompts.object_keyword);
            }
            if (j.contains("optimizer")) {
                const auto& s = j.at("optimizer");
                check_keys(s, "optimizer",
                           {"position_lr", "sh_lr", "opacity_lr", "scale_lr", "rotation_lr", "beta1", "beta2", "epsilon"});
                read(s, "position_lr", cfg.optimizer.position_lr);
                read(s, "sh_lr", cfg.optimizer.sh_lr);
                read(s, "opacity_lr", cfg.optimizer.opacity_lr);
                read(s, "scale_lr", cfg.optimizer.scale_lr);
                read(s, "rotation_lr", cfg.optimizer.rotation_lr);
                read(s, "beta1", cfg.optimizer.beta1);
                read(s, "beta2", cfg.optimizer.beta2);
                read(s, "epsilon", cfg.optimizer.epsilon);
            }
            read_poses(j.value("coarse_poses", json()), "coarse_poses", cfg.coarse_poses, cfg.box.center);
            read_poses(j.value("refine_poses", json()), "refine_poses", cfg.refine_poses, cfg.box.center);
            if (j.contains("render")) {
                const auto& s = j.at("render");
                check_keys(s, "render", {"truncate", "dilation", "transmittance_floor"});
                read(s, "truncate", cfg.render.truncate);
                read(s, "dilation", cfg.render.dilation);
                read(s, "transmittance_floor", cfg.render.transmittance_floor);
            }
            if (j.contains("provider")) {
                const auto& s = j.at("provider");
                check_keys(s, "provider", {"spec", "weight", "timeout_ms", "max_attempts"});
                read(s, "spec", cfg.provider.spec);
                read(s, "weight", cfg.provider.mock_weight);
                read(s, "timeout_ms", cfg.provider.timeout_ms);
                read(s, "max_attempts", cfg.provider.max_attempts);
            }
        } catch (const json::exception& e) {
            fail(ErrorCode::Config, std::string("config type error: ") + e.what());
        }
        return cfg;
    }

    json config_to_json(const EditConfig& cfg) {
        const auto v3 = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
        json j;
        j["task"] = task_name(cfg.task);
        j["seed"] = cfg.seed;
        j["gamma"] = cfg.gamma;
        j["coarse_iters"] = cfg.coarse_iters;
        j["refine_iters"] = cfg.refine_iters;
        j["t0"] = cfg.t0;
        j["mask_threshold"] = cfg.mask_threshold;
        j["lambda_loc"] = cfg.lambda_loc;
        j["background"] = v3(cfg.background);
        j["checkpoint_every"] = cfg.checkpoint_every;
        j["jitter_inserted"] = cfg.jitter_inserted;
        j["regenerate_pseudo_gt_every"] = cfg.regenerate_pseudo_gt_every;
        j["concurrent_guidance"] = cfg.concurrent_guidance;
        j["image"] = {{"width", cfg.image_width}, {"height", cfg.image_height}, {"fov_deg", cfg.fov_y_deg}};
        j["box"] = {{"center", v3(cfg.box.center)},
                    {"half_extents", v3(cfg.box.half_extents)},
                    {"orientation",
                     {cfg.box.orientation[0], cfg.box.orientation[1], cfg.box.orientation[2], cfg.box.orientation[3]}}};
        j["prompts"] = {{"scene_token", cfg.prompts.scene_token},   {"object_token", cfg.prompts.object_token},
                        {"scene", cfg.prompts.scene_prompt},        {"global", cfg.prompts.global_prompt},
                        {"local", cfg.prompts.local_prompt},        {"reference", cfg.prompts.reference_prompt},
                        {"object_keyword", cfg.prompts.object_keyword}};
        j["optimizer"] = {{"position_lr", cfg.optimizer.position_lr}, {"sh_lr", cfg.optimizer.sh_lr},
                          {"opacity_lr", cfg.optimizer.opacity_lr},   {"scale_lr", cfg.optimizer.scale_lr},
                          {"rotation_lr", cfg.optimizer.rotation_lr}, {"beta1", cfg.optimizer.beta1},
                          {"beta2", cfg.optimizer.beta2},             {"epsilon", cfg.optimizer.epsilon}};
        j["coarse_poses"] = poses_to_json(cfg.coarse_poses);
        j["refine_poses"] = poses_to_json(cfg.refine_poses);
        j["render"] = {{"truncate", cfg.render.truncate},
                       {"dilation", cfg.render.dilation},
                       {"transmittance_floor", cfg.render.transmittance_floor}};
        j["provider"] = {{"spec", cfg.provider.spec},
                         {"weight", cfg.provider.mock_weight},
                         {"timeout_ms", cfg.provider.timeout_ms},
                         {"max_attempts", cfg.provider.max_attempts}};
        return j;
    }

    json parse_toml(std::string_view text) {
        try {
            const toml::table table = toml::parse(text);
            return toml_to_json(table);
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
            fail(ErrorCode::Config, msg.str());
        }
    }

    json read_config_document(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) {
            fail(ErrorCode::Io, "config not found: " + path.string());
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        const std::string text = buffer.str();
        if (path.extension() == ".json") {
            try {
                return json::parse(text);
            } catch (const json::exception& e) {
                fail(ErrorCode::Config, std::string("JSON parse error: ") + e.what());
            }
        }
        return parse_toml(text);
    }

    EditConfig load_config(const std::filesystem::path& path) { return config_from_json(read_config_document(path)); }

    void merge_json(json& base, const json& overrides) {
        if (!base.is_object() || !overrides.is_object()) {
            base = overrides;
            return;
        }
        for (const auto& [key, value] : overrides.items()) {
            if (value.is_object() && base.contains(key) && base[key].is_object()) {
                merge_json(base[key], value);
            } else {
                base[key] = value;
            }
        }
    }

} // namespace gsedit
