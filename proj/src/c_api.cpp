/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/gsedit.h"

#include "gsedit/config.hpp"
#include "gsedit/error.hpp"
#include "gsedit/fixtures.hpp"
#include "gsedit/guidance.hpp"
#include "gsedit/guidance_server.hpp"
#include "gsedit/losses.hpp"
#include "gsedit/pipeline.hpp"
#include "gsedit/ply.hpp"
#include "gsedit/renderer.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

struct gsedit_scene {
    gsedit::GaussianScene scene;
};

struct gsedit_config {
    /// Raw document kept so overrides merge against what the user wrote.
    nlohmann::json document;
    gsedit::EditConfig config;
    std::filesystem::path base_dir;
};

struct gsedit_provider {
    std::unique_ptr<gsedit::GuidanceProvider> provider;
};

struct gsedit_server {
    std::unique_ptr<gsedit::GuidanceServer> server;
};

namespace {

    thread_local std::string last_error;

    gsedit_status set_error(gsedit_status status, const std::string& message) {
        last_error = message;
        return status;
    }

    /// Runs `body`, translating exceptions to status codes.
    template <typename Body>
    gsedit_status guard(Body&& body) noexcept {
        try {
            last_error.clear();
            body();
            return GSEDIT_OK;
        } catch (const gsedit::Error& e) {
            return set_error(static_cast<gsedit_status>(e.code()), e.what());
        } catch (const nlohmann::json::exception& e) {
            return set_error(GSEDIT_ERR_FORMAT, e.what());
        } catch (const std::filesystem::filesystem_error& e) {
            return set_error(GSEDIT_ERR_IO, e.what());
        } catch (const std::bad_alloc&) {
            return set_error(GSEDIT_ERR_INTERNAL, "out of memory");
        } catch (const std::exception& e) {
            return set_error(GSEDIT_ERR_INTERNAL, e.what());
        } catch (...) {
            return set_error(GSEDIT_ERR_INTERNAL, "unknown error");
        }
    }

    void require(bool ok, const char* what) {
        if (!ok) {
            gsedit::fail(gsedit::ErrorCode::InvalidArgument, what);
        }
    }

    char* copy_string(const std::string& s) {
        char* out = static_cast<char*>(std::malloc(s.size() + 1));
        if (!out) {
            throw std::bad_alloc();
        }
        std::memcpy(out, s.c_str(), s.size() + 1);
        return out;
    }

    gsedit::Intrinsics to_intrinsics(const gsedit_intrinsics& k) {
        gsedit::Intrinsics out;
        out.fx = k.fx;
        out.fy = k.fy;
        out.cx = k.cx;
        out.cy = k.cy;
        out.width = k.width;
        out.height = k.height;
        out.validate();
        return out;
    }

    gsedit::CameraPose to_pose(const gsedit_pose& p) {
        gsedit::CameraPose out;
        out.rotation = gsedit::Vec4(p.quat[0], p.quat[1], p.quat[2], p.quat[3]);
        out.translation = gsedit::Vec3(p.trans[0], p.trans[1], p.trans[2]);
        if (!out.rotation.allFinite() || !out.translation.allFinite() || out.rotation.norm() == 0.0) {
            gsedit::fail(gsedit::ErrorCode::InvalidArgument, "pose must be finite with a nonzero quaternion");
        }
        out.rotation = gsedit::normalized_quat(out.rotation);
        return out;
    }

    std::vector<std::size_t> read_editable(const std::filesystem::path& path, std::size_t scene_size) {
        std::ifstream in(path);
        if (!in) {
            gsedit::fail(gsedit::ErrorCode::Io, "edit set not found: " + path.string());
        }
        const auto j = nlohmann::json::parse(in);
        gsedit::EditSet set;
        set.editable_indices = j.at("editable_indices").get<std::vector<std::size_t>>();
        set.trainable = gsedit::TrainableMask::all();
        set.validate(scene_size);
        return set.editable_indices;
    }

    std::vector<std::pair<gsedit::CameraPose, gsedit::Intrinsics>> read_poses(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) {
            gsedit::fail(gsedit::ErrorCode::Io, "pose file not found: " + path.string());
        }
        const auto j = nlohmann::json::parse(in);
        if (!j.is_array()) {
            gsedit::fail(gsedit::ErrorCode::Format, "pose file must hold a JSON array");
        }
        std::vector<std::pair<gsedit::CameraPose, gsedit::Intrinsics>> out;
        for (const auto& entry : j) {
            auto k = gsedit::intrinsics_from_json(entry.at("intrinsics"));
            k.validate();
            out.emplace_back(gsedit::pose_from_json(entry), k);
        }
        return out;
    }

    std::unique_ptr<gsedit::GuidanceProvider> provider_from_spec(const std::string& spec,
                                                                 const gsedit::EditConfig& cfg,
                                                                 const std::filesystem::path& base_dir) {
        if (spec.rfind("mock:", 0) == 0) {
            std::filesystem::path dir = spec.substr(5);
            if (dir.is_relative() && !base_dir.empty()) {
                dir = base_dir / dir;
            }
            gsedit::MockOptions options;
            options.weight = cfg.provider.mock_weight;
            options.seed = cfg.seed;
            return gsedit::MockProvider::from_fixture(dir, cfg.background, options);
        }
        if (spec.rfind("remote:", 0) == 0) {
            gsedit::RemoteOptions options;
            options.url = spec.substr(7);
            options.timeout_ms = cfg.provider.timeout_ms;
            options.max_attempts = cfg.provider.max_attempts;
            return std::make_unique<gsedit::RemoteProvider>(options);
        }
        gsedit::fail(gsedit::ErrorCode::Config,
                     "provider must be 'mock:<fixture dir>' or 'remote:<url>', got '" + spec + "'");
    }

} // namespace

extern "C" {

const char* gsedit_version(void) { return "0.1.0"; }

const char* gsedit_last_error(void) { return last_error.c_str(); }

const char* gsedit_status_name(gsedit_status status) {
    if (status == GSEDIT_OK) {
        return "ok";
    }
    return gsedit::error_code_name(static_cast<gsedit::ErrorCode>(status));
}

void gsedit_string_free(char* str) { std::free(str); }

gsedit_status gsedit_scene_load(const char* path, gsedit_scene** out) {
    return guard([&] {
        require(path && out, "path and out must be non-null");
        *out = nullptr;
        auto handle = std::make_unique<gsedit_scene>();
        handle->scene = gsedit::load_ply(path);
        *out = handle.release();
    });
}

gsedit_status gsedit_scene_save(const gsedit_scene* scene, const char* path) {
    return guard([&] {
        require(scene && path, "scene and path must be non-null");
        gsedit::save_ply(scene->scene, path);
    });
}

size_t gsedit_scene_size(const gsedit_scene* scene) { return scene ? scene->scene.size() : 0; }

int gsedit_scene_sh_degree(const gsedit_scene* scene) { return scene ? scene->scene.sh_degree : -1; }

void gsedit_scene_free(gsedit_scene* scene) { delete scene; }

gsedit_status gsedit_render(const gsedit_scene* scene, const size_t* subset, size_t subset_count,
                            const gsedit_pose* pose, const gsedit_intrinsics* intrinsics, const double background[3],
                            double* rgb_out, double* alpha_out) {
    return guard([&] {
        require(scene && pose && intrinsics && background && rgb_out, "scene, pose, intrinsics, background and "
                                                                      "rgb_out must be non-null");
        require(subset || subset_count == 0, "subset is null but subset_count is nonzero");
        const auto k = to_intrinsics(*intrinsics);
        gsedit::Subset sel;
        std::vector<std::size_t> indices;
        if (subset) {
            indices.assign(subset, subset + subset_count);
            sel = std::span<const std::size_t>(indices);
        }
        const auto out = gsedit::render(scene->scene, sel, to_pose(*pose), k,
                                        gsedit::Vec3(background[0], background[1], background[2]));
        std::copy(out.rgb.data.begin(), out.rgb.data.end(), rgb_out);
        if (alpha_out) {
            std::copy(out.alpha.data.begin(), out.alpha.data.end(), alpha_out);
        }
    });
}

gsedit_status gsedit_config_default(gsedit_config** out) {
    return guard([&] {
        require(out, "out must be non-null");
        *out = nullptr;
        auto handle = std::make_unique<gsedit_config>();
        handle->document = nlohmann::json::object();
        handle->config = gsedit::config_from_json(handle->document);
        *out = handle.release();
    });
}

gsedit_status gsedit_config_load(const char* path, gsedit_config** out) {
    return guard([&] {
        require(path && out, "path and out must be non-null");
        *out = nullptr;
        auto handle = std::make_unique<gsedit_config>();
        handle->document = gsedit::read_config_document(path);
        handle->config = gsedit::config_from_json(handle->document);
        handle->config.validate();
        handle->base_dir = std::filesystem::absolute(path).parent_path();
        *out = handle.release();
    });
}

gsedit_status gsedit_config_apply_json(gsedit_config* config, const char* json_overrides) {
    return guard([&] {
        require(config && json_overrides, "config and json_overrides must be non-null");
        nlohmann::json overrides;
        try {
            overrides = nlohmann::json::parse(json_overrides);
        } catch (const nlohmann::json::exception& e) {
            gsedit::fail(gsedit::ErrorCode::Config, std::string("override is not valid JSON: ") + e.what());
        }
        if (!overrides.is_object()) {
            gsedit::fail(gsedit::ErrorCode::Config, "overrides must be a JSON object");
        }
        nlohmann::json merged = config->document;
        gsedit::merge_json(merged, overrides);
        gsedit::EditConfig parsed = gsedit::config_from_json(merged);
        parsed.validate();
        config->document = std::move(merged);
        config->config = std::move(parsed);
    });
}

gsedit_status gsedit_config_validate(const gsedit_config* config) {
    return guard([&] {
        require(config, "config must be non-null");
        config->config.validate();
    });
}

gsedit_status gsedit_config_to_json(const gsedit_config* config, char** out) {
    return guard([&] {
        require(config && out, "config and out must be non-null");
        *out = copy_string(gsedit::config_to_json(config->config).dump(2));
    });
}

gsedit_status gsedit_config_intrinsics(const gsedit_config* config, gsedit_intrinsics* out) {
    return guard([&] {
        require(config && out, "config and out must be non-null");
        const auto k = config->config.intrinsics();
        *out = {k.fx, k.fy, k.cx, k.cy, k.width, k.height};
    });
}

void gsedit_config_free(gsedit_config* config) { delete config; }

gsedit_status gsedit_pose_grid_json(const gsedit_config* config, char** out) {
    return guard([&] {
        require(config && out, "config and out must be non-null");
        const auto k = config->config.intrinsics();
        nlohmann::json grid = nlohmann::json::array();
        for (const auto& pose : gsedit::sample_refinement_grid(config->config.refine_poses)) {
            grid.push_back(gsedit::pose_to_json(pose, k));
        }
        *out = copy_string(grid.dump(2));
    });
}

gsedit_status gsedit_provider_mock(const char* fixture_dir, const double background[3], double weight, uint64_t seed,
                                   gsedit_provider** out) {
    return guard([&] {
        require(fixture_dir && background && out, "fixture_dir, background and out must be non-null");
        *out = nullptr;
        gsedit::MockOptions options;
        options.weight = weight;
        options.seed = seed;
        auto handle = std::make_unique<gsedit_provider>();
        handle->provider = gsedit::MockProvider::from_fixture(
            fixture_dir, gsedit::Vec3(background[0], background[1], background[2]), options);
        *out = handle.release();
    });
}

gsedit_status gsedit_provider_remote(const char* url, int timeout_ms, int max_attempts, gsedit_provider** out) {
    return guard([&] {
        require(url && out, "url and out must be non-null");
        *out = nullptr;
        gsedit::RemoteOptions options;
        options.url = url;
        options.timeout_ms = timeout_ms;
        options.max_attempts = max_attempts;
        auto handle = std::make_unique<gsedit_provider>();
        handle->provider = std::make_unique<gsedit::RemoteProvider>(options);
        *out = handle.release();
    });
}

gsedit_status gsedit_provider_from_spec(const char* spec, const gsedit_config* config, gsedit_provider** out) {
    return guard([&] {
        require(config && out, "config and out must be non-null");
        *out = nullptr;
        const std::string s = spec ? spec : config->config.provider.spec;
        // Relative fixture paths in a config file are relative to that file.
        const auto base = spec ? std::filesystem::path() : config->base_dir;
        auto handle = std::make_unique<gsedit_provider>();
        handle->provider = provider_from_spec(s, config->config, base);
        *out = handle.release();
    });
}

void gsedit_provider_free(gsedit_provider* provider) { delete provider; }

gsedit_status gsedit_run(const gsedit_config* config, const char* scene_path, const char* out_dir,
                         gsedit_provider* provider, char** report_json) {
    return guard([&] {
        require(config && scene_path && out_dir && provider, "config, scene_path, out_dir and provider must be "
                                                             "non-null");
        const auto outputs = gsedit::run(config->config, scene_path, out_dir, *provider->provider);
        if (report_json) {
            *report_json = copy_string(outputs.report.to_json().dump());
        }
    });
}

gsedit_status gsedit_render_pngs(const gsedit_scene* scene, const gsedit_config* config, gsedit_subset subset,
                                 const char* editset_path, const char* poses_path, const char* out_dir,
                                 int* written) {
    return guard([&] {
        require(scene && config && out_dir, "scene, config and out_dir must be non-null");
        const auto& s = scene->scene;
        const auto& cfg = config->config;
        const auto editable = editset_path ? read_editable(editset_path, s.size()) : gsedit::select_in_box(s, cfg.box);
        gsedit::EditSet set;
        set.editable_indices = editable;
        const auto fixed = set.fixed_indices(s.size());

        gsedit::Subset sel;
        switch (subset) {
        case GSEDIT_SUBSET_ALL: break;
        case GSEDIT_SUBSET_EDITABLE: sel = std::span<const std::size_t>(editable); break;
        case GSEDIT_SUBSET_FIXED: sel = std::span<const std::size_t>(fixed); break;
        default: gsedit::fail(gsedit::ErrorCode::InvalidArgument, "unknown subset");
        }

        std::vector<std::pair<gsedit::CameraPose, gsedit::Intrinsics>> views;
        if (poses_path) {
            for (const auto& [pose, k] : read_poses(poses_path)) {
                views.emplace_back(pose, k);
            }
        } else {
            for (const auto& pose : gsedit::sample_refinement_grid(cfg.refine_poses)) {
                views.emplace_back(pose, cfg.intrinsics());
            }
        }

        std::filesystem::create_directories(out_dir);
        int count = 0;
        for (const auto& [pose, k] : views) {
            char name[32];
            std::snprintf(name, sizeof name, "view_%03d.png", count++);
            gsedit::write_png(gsedit::render(s, sel, pose, k, cfg.background, cfg.render).rgb,
                              std::filesystem::path(out_dir) / name);
        }
        if (written) {
            *written = count;
        }
    });
}

gsedit_status gsedit_fixture_write(const char* name, uint64_t seed, const char* out_dir) {
    return guard([&] {
        require(name && out_dir, "name and out_dir must be non-null");
        gsedit::write_fixture(gsedit::make_fixture(name, seed), out_dir);
    });
}

gsedit_status gsedit_localization_loss(const double* attention, int attention_width, int attention_height,
                                       const uint8_t* mask, int mask_width, int mask_height, double lambda,
                                       double* out) {
    return guard([&] {
        require(attention && mask && out, "attention, mask and out must be non-null");
        require(attention_width > 0 && attention_height > 0 && mask_width > 0 && mask_height > 0,
                "sizes must be positive");
        gsedit::AttentionMap map;
        map.values = gsedit::Image(attention_width, attention_height, 1);
        std::copy(attention, attention + map.values.data.size(), map.values.data.begin());
        gsedit::Mask m(mask_width, mask_height);
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            m.data[i] = mask[i] ? 1 : 0;
        }
        const bool same_size = attention_width == mask_width && attention_height == mask_height;
        *out = same_size ? gsedit::localization_loss(map, m, {lambda})
                         : gsedit::localization_loss_resampled(map, m, {lambda});
    });
}

gsedit_status gsedit_server_start(gsedit_provider* provider, const char* host, int port, gsedit_server** out,
                                  int* bound_port) {
    return guard([&] {
        require(out, "out must be non-null");
        *out = nullptr;
        auto handle = std::make_unique<gsedit_server>();
        handle->server = std::make_unique<gsedit::GuidanceServer>(provider ? provider->provider.get() : nullptr);
        const int bound = handle->server->start(host ? host : "127.0.0.1", port);
        if (bound_port) {
            *bound_port = bound;
        }
        *out = handle.release();
    });
}

void gsedit_server_stop(gsedit_server* server) {
    if (server) {
        server->server->stop();
        delete server;
    }
}

} // extern "C"
