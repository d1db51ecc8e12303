/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

// Command-line front end. Talks to the core only through the C API.

#include "gsedit/gsedit.h"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace {

    constexpr int kExitOk = 0;
    constexpr int kExitUsage = 2;
    constexpr int kExitRuntime = 3;

    std::atomic<bool> stop_requested{false};

    extern "C" void on_signal(int) { stop_requested = true; }

    /// Structured one-line error on stderr; returns the exit code for `status`.
    int report(gsedit_status status, const std::string& context) {
        std::cerr << "error: " << context << " [" << gsedit_status_name(status) << "]: " << gsedit_last_error()
                  << '\n';
        switch (status) {
        case GSEDIT_ERR_CONFIG:
        case GSEDIT_ERR_INVALID_ARGUMENT: return kExitUsage;
        default: return kExitRuntime;
        }
    }

    int usage_error(const std::string& message) {
        std::cerr << "error: " << message << '\n';
        return kExitUsage;
    }

    template <typename T, void (*Free)(T*)>
    struct Handle {
        T* ptr = nullptr;
        ~Handle() { Free(ptr); }
    };

    using Scene = Handle<gsedit_scene, gsedit_scene_free>;
    using Config = Handle<gsedit_config, gsedit_config_free>;
    using Provider = Handle<gsedit_provider, gsedit_provider_free>;

    /// Loads --config (or the defaults) and applies flag overrides.
    int load_config(const std::string& path, const std::string& overrides, Config& cfg) {
        if (!path.empty()) {
            if (!std::filesystem::exists(path)) {
                return usage_error("config not found: " + path);
            }
            if (auto st = gsedit_config_load(path.c_str(), &cfg.ptr); st != GSEDIT_OK) {
                return report(st == GSEDIT_ERR_IO ? GSEDIT_ERR_CONFIG : st, "loading config");
            }
        } else if (auto st = gsedit_config_default(&cfg.ptr); st != GSEDIT_OK) {
            return report(st, "default config");
        }
        if (overrides != "{}") {
            if (auto st = gsedit_config_apply_json(cfg.ptr, overrides.c_str()); st != GSEDIT_OK) {
                return report(st == GSEDIT_ERR_VALIDATION ? GSEDIT_ERR_CONFIG : st, "config validation");
            }
        }
        return kExitOk;
    }

    std::string json_number(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    struct EditArgs {
        std::string config, scene, out, provider;
        std::optional<unsigned long long> seed;
        std::optional<double> gamma;
        std::optional<int> checkpoint_every;
    };

    int cmd_edit(const EditArgs& a) {
        if (!std::filesystem::exists(a.scene)) {
            return usage_error("scene not found: " + a.scene);
        }
        std::string overrides = "{";
        const auto add = [&](const std::string& kv) { overrides += (overrides.size() > 1 ? "," : "") + kv; };
        if (a.seed)
            add("\"seed\":" + std::to_string(*a.seed));
        if (a.gamma)
            add("\"gamma\":" + json_number(*a.gamma));
        if (a.checkpoint_every)
            add("\"checkpoint_every\":" + std::to_string(*a.checkpoint_every));
        overrides += "}";

        Config cfg;
        if (int rc = load_config(a.config, overrides, cfg); rc != kExitOk) {
            return rc;
        }

        // GSEDIT_PROVIDER_URL beats both the flag and the config file.
        std::optional<std::string> spec;
        if (!a.provider.empty())
            spec = a.provider;
        if (const char* env = std::getenv("GSEDIT_PROVIDER_URL"); env && *env) {
            const std::string url = env;
            spec = url.rfind("mock:", 0) == 0 || url.rfind("remote:", 0) == 0 ? url : "remote:" + url;
        }
        Provider provider;
        if (auto st = gsedit_provider_from_spec(spec ? spec->c_str() : nullptr, cfg.ptr, &provider.ptr);
            st != GSEDIT_OK) {
            return report(st == GSEDIT_ERR_IO ? GSEDIT_ERR_CONFIG : st, "provider");
        }

        char* report_json = nullptr;
        if (auto st = gsedit_run(cfg.ptr, a.scene.c_str(), a.out.c_str(), provider.ptr, &report_json);
            st != GSEDIT_OK) {
            return report(st, "edit");
        }
        gsedit_string_free(report_json);
        std::cout << "wrote " << (std::filesystem::path(a.out) / "edited.ply").string() << '\n';
        return kExitOk;
    }

    struct RenderArgs {
        std::string config, scene, out, subset = "all", editset, poses;
    };

    int cmd_render(const RenderArgs& a) {
        if (!std::filesystem::exists(a.scene)) {
            return usage_error("scene not found: " + a.scene);
        }
        gsedit_subset subset = GSEDIT_SUBSET_ALL;
        if (a.subset == "editable")
            subset = GSEDIT_SUBSET_EDITABLE;
        else if (a.subset == "fixed")
            subset = GSEDIT_SUBSET_FIXED;
        else if (a.subset != "all")
            return usage_error("--subset must be all, editable or fixed");

        Config cfg;
        if (int rc = load_config(a.config, "{}", cfg); rc != kExitOk) {
            return rc;
        }
        Scene scene;
        if (auto st = gsedit_scene_load(a.scene.c_str(), &scene.ptr); st != GSEDIT_OK) {
            return report(st, "loading scene");
        }
        int written = 0;
        if (auto st = gsedit_render_pngs(scene.ptr, cfg.ptr, subset, a.editset.empty() ? nullptr : a.editset.c_str(),
                                         a.poses.empty() ? nullptr : a.poses.c_str(), a.out.c_str(), &written);
            st != GSEDIT_OK) {
            return report(st, "render");
        }
        std::cout << "wrote " << written << " views to " << a.out << '\n';
        return kExitOk;
    }

    int cmd_fixture(const std::string& name, unsigned long long seed, const std::string& out) {
        if (auto st = gsedit_fixture_write(name.c_str(), seed, out.c_str()); st != GSEDIT_OK) {
            return report(st, "fixture");
        }
        std::cout << "wrote fixture " << name << " to " << out << '\n';
        return kExitOk;
    }

    int cmd_poses(const std::string& config, const std::string& out) {
        Config cfg;
        if (int rc = load_config(config, "{}", cfg); rc != kExitOk) {
            return rc;
        }
        char* json = nullptr;
        if (auto st = gsedit_pose_grid_json(cfg.ptr, &json); st != GSEDIT_OK) {
            return report(st, "poses");
        }
        const std::string text = std::string(json) + "\n";
        gsedit_string_free(json);
        if (out.empty() || out == "-") {
            std::cout << text;
            return kExitOk;
        }
        std::ofstream f(out);
        f << text;
        if (!f) {
            return usage_error("cannot write " + out);
        }
        return kExitOk;
    }

    int cmd_serve_mock(const std::string& fixture, const std::string& host, int port, unsigned long long seed) {
        const double black[3] = {0.0, 0.0, 0.0};
        Provider provider;
        if (auto st = gsedit_provider_mock(fixture.c_str(), black, 1.0, seed, &provider.ptr); st != GSEDIT_OK) {
            return report(st, "mock provider");
        }
        gsedit_server* server = nullptr;
        int bound = 0;
        if (auto st = gsedit_server_start(provider.ptr, host.c_str(), port, &server, &bound); st != GSEDIT_OK) {
            return report(st, "server");
        }
        std::cout << "serving mock guidance on http://" << host << ":" << bound << "/v1/guidance" << std::endl;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        while (!stop_requested) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        gsedit_server_stop(server);
        return kExitOk;
    }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localized Gaussian-splat scene editing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(gsedit_version()));

    EditArgs edit;
    auto* edit_cmd = app.add_subcommand("edit", "Run coarse editing and refinement on a scene");
    edit_cmd->add_option("--config", edit.config, "TOML or JSON config")->required();
    edit_cmd->add_option("--scene", edit.scene, "Input scene PLY")->required();
    edit_cmd->add_option("--out", edit.out, "Output directory")->required();
    edit_cmd->add_option("--provider", edit.provider, "mock:<fixture dir> or remote:<url>");
    edit_cmd->add_option("--seed", edit.seed, "Random seed");
    edit_cmd->add_option("--gamma", edit.gamma, "Global/local SDS blend weight");
    edit_cmd->add_option("--checkpoint-every", edit.checkpoint_every, "Checkpoint PLY interval (0 disables)");

    RenderArgs render;
    auto* render_cmd = app.add_subcommand("render", "Render a scene at the refinement grid or given poses");
    render_cmd->add_option("--scene", render.scene, "Scene PLY")->required();
    render_cmd->add_option("--out", render.out, "Output directory")->required();
    render_cmd->add_option("--config", render.config, "Config providing box, image size and grid");
    render_cmd->add_option("--subset", render.subset, "all, editable or fixed");
    render_cmd->add_option("--editset", render.editset, "editset.json written by edit");
    render_cmd->add_option("--poses", render.poses, "Pose-grid JSON (defaults to the refinement grid)");

    std::string fixture_name, fixture_out;
    unsigned long long fixture_seed = 0;
    auto* fixture_cmd = app.add_subcommand("fixture", "Write a built-in fixture (blob-10, box-scene-100)");
    fixture_cmd->add_option("name", fixture_name, "Fixture name")->required();
    fixture_cmd->add_option("--out", fixture_out, "Output directory")->required();
    fixture_cmd->add_option("--seed", fixture_seed, "Random seed");

    std::string poses_config, poses_out;
    auto* poses_cmd = app.add_subcommand("poses", "Export the refinement pose grid as JSON");
    poses_cmd->add_option("--config", poses_config, "Config file");
    poses_cmd->add_option("--out", poses_out, "Output file (stdout when omitted)");

    std::string serve_fixture, serve_host = "127.0.0.1";
    int serve_port = 8080;
    unsigned long long serve_seed = 0;
    auto* serve_cmd = app.add_subcommand("serve-mock", "Serve the mock provider over HTTP");
    serve_cmd->add_option("--fixture", serve_fixture, "Fixture directory")->required();
    serve_cmd->add_option("--host", serve_host, "Bind address");
    serve_cmd->add_option("--port", serve_port, "Port (0 picks a free one)");
    serve_cmd->add_option("--seed", serve_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (*edit_cmd)
        return cmd_edit(edit);
    if (*render_cmd)
        return cmd_render(render);
    if (*fixture_cmd)
        return cmd_fixture(fixture_name, fixture_seed, fixture_out);
    if (*poses_cmd)
        return cmd_poses(poses_config, poses_out);
    if (*serve_cmd)
        return cmd_serve_mock(serve_fixture, serve_host, serve_port, serve_seed);
    return kExitUsage;
}
