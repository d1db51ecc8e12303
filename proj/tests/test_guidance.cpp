/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "support.hpp"

#include "gsedit/error.hpp"
#include "gsedit/guidance.hpp"
#include "gsedit/guidance_server.hpp"
#include "gsedit/renderer.hpp"
#include "gsedit/wire.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <functional>
#include <future>
#include <thread>

using namespace gsedit;
using gsedit::test::Rng;

namespace {

    constexpr double kShC0 = 0.28209479177387814;

    Vec3 sh_dc_from_color(const Vec3& c) { return Vec3(rgb_to_sh_dc(c.x()), rgb_to_sh_dc(c.y()), rgb_to_sh_dc(c.z())); }

    constexpr int kW = 24;
    constexpr int kH = 20;

    Intrinsics small_intrinsics() { return Intrinsics::from_fov(kW, kH, 50.0); }

    MockTargets random_targets(std::uint64_t seed) {
        Rng rng(seed);
        test::SceneSpec spec;
        spec.count = 6;
        spec.sh_degree = 1;
        MockTargets t;
        t.scene = test::random_scene(rng, spec);
        spec.count = 3;
        t.foreground = test::random_scene(rng, spec);
        t.background = Vec3(0.2, 0.4, 0.6);
        return t;
    }

    GuidanceRequest make_request(Rng& rng, PromptKind kind = PromptKind::Global) {
        GuidanceRequest r;
        r.intrinsics = small_intrinsics();
        r.pose = test::random_pose(rng);
        r.image = test::random_image(rng, kW, kH, 3);
        r.prompt_kind = kind;
        r.keyword = "sunglasses";
        return r;
    }

    ErrorCode code_of(const std::function<void()>& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Internal;
    }

    std::string provider_code_of(const std::function<void()>& f) {
        try {
            f();
        } catch (const ProviderError& e) {
            return e.provider_code();
        } catch (const Error& e) {
            return std::string("error:") + std::string(error_code_name(e.code()));
        }
        return "none";
    }

    /// Hand-rolled service with scripted misbehavior, answering through a real provider otherwise.
    struct ScriptedServer {
        GuidanceProvider& provider;
        httplib::Server server;
        std::thread thread;
        int port = 0;
        std::atomic<int> hits{0};
        int unavailable_first = 0;
        int delay_ms = 0;
        bool wrong_id = false;
        bool corrupt_payload = false;

        explicit ScriptedServer(GuidanceProvider& p)
            : provider(p) {
            server.Post(wire::kGuidancePath, [this](const httplib::Request& req, httplib::Response& res) {
                const int n = ++hits;
                if (delay_ms > 0)
                    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                if (n <= unavailable_first) {
                    res.status = 503;
                    res.set_content(wire::error_to_json("not_ready", "warming up").dump(), "application/json");
                    return;
                }
                GuidanceKind kind{};
                const auto request = wire::request_from_json(nlohmann::json::parse(req.body), kind);
                auto response = provider.dispatch(kind, request);
                if (wrong_id)
                    response.request_id += 1000;
                auto j = wire::response_to_json(kind, response);
                if (corrupt_payload)
                    j["width"] = kW + 1;
                res.set_content(j.dump(), "application/json");
            });
        }

        void start() {
            port = server.bind_to_any_port("127.0.0.1");
            thread = std::thread([this] { server.listen_after_bind(); });
            server.wait_until_ready();
        }

        std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }

        ~ScriptedServer() {
            server.stop();
            if (thread.joinable())
                thread.join();
        }
    };

    RemoteOptions fast_options(const std::string& url) {
        RemoteOptions o;
        o.url = url;
        o.timeout_ms = 5000;
        o.backoff_ms = 10;
        return o;
    }

} // namespace

TEST_CASE("prompt set validation") {
    PromptSet p;
    CHECK_NOTHROW(p.validate());
    auto missing_v1 = p;
    missing_v1.global_prompt = "a toy wearing <V2> sunglasses";
    CHECK(code_of([&] { missing_v1.validate(); }) == ErrorCode::Config);
    auto leaky_local = p;
    leaky_local.local_prompt = "<V1> <V2> sunglasses";
    CHECK(code_of([&] { leaky_local.validate(); }) == ErrorCode::Config);
    auto same_tokens = p;
    same_tokens.object_token = same_tokens.scene_token;
    CHECK(code_of([&] { same_tokens.validate(); }) == ErrorCode::Config);
}

TEST_CASE("mock sds: fixed point, definition and determinism") {
    MockProvider mock(random_targets(1), {.weight = 1.0, .seed = 9});
    Rng rng(2);
    auto req = make_request(rng);
    req.image = mock.target_image(req);
    const auto zero = mock.sds_gradient(req);
    for (double v : zero.payload.data)
        CHECK(v == 0.0);

    // One pixel off by 0.5.
    const std::size_t idx = 3 * (5 * kW + 7) + 1;
    const double base = req.image.data[idx];
    req.image.data[idx] = base < 0.5 ? base + 0.5 : base - 0.5;
    const auto one = mock.sds_gradient(req);
    CHECK(one.payload.data[idx] == doctest::Approx(base < 0.5 ? 0.5 : -0.5).epsilon(1e-12));
    for (std::size_t i = 0; i < one.payload.data.size(); ++i)
        if (i != idx)
            CHECK(one.payload.data[i] == 0.0);

    // Local prompts pull towards the foreground on black.
    auto local = make_request(rng, PromptKind::Local);
    const auto fg = render(mock.targets().foreground, std::nullopt, local.pose, local.intrinsics, Vec3::Zero());
    const auto g = mock.sds_gradient(local);
    for (std::size_t i = 0; i < g.payload.data.size(); ++i)
        CHECK(g.payload.data[i] == local.image.data[i] - fg.rgb.data[i]);

    CHECK(provider_code_of([&] { mock.sds_gradient(make_request(rng, PromptKind::Reference)); }) == "bad_prompt_kind");

    // Same seed and inputs give bit-identical responses, including the sampled timestep.
    MockProvider a(random_targets(1), {.seed = 5}), b(random_targets(1), {.seed = 5});
    for (int i = 0; i < 5; ++i) {
        const auto r = make_request(rng);
        const auto ra = a.sds_gradient(r);
        const auto rb = b.sds_gradient(r);
        CHECK(ra.payload == rb.payload);
        CHECK(ra.t_used == rb.t_used);
        CHECK(ra.t_used >= 0.02);
        CHECK(ra.t_used <= 0.98);
    }
}

TEST_CASE("mock denoise matches the closed-form blend") {
    MockProvider mock(random_targets(3));
    Rng rng(4);
    for (double t0 : {1e-9, 0.05, 0.5, 0.9}) {
        auto req = make_request(rng);
        req.noise_level = t0;
        const auto target = mock.target_image(req);
        const auto out = mock.denoise(req);
        CHECK(out.t_used == t0);
        for (std::size_t i = 0; i < out.payload.data.size(); ++i) {
            CHECK(std::abs(out.payload.data[i] - ((1 - t0) * req.image.data[i] + t0 * target.data[i])) < 1e-6);
            if (t0 < 1e-6)
                CHECK(std::abs(out.payload.data[i] - req.image.data[i]) < 1e-8);
        }
    }
    auto no_level = make_request(rng);
    CHECK(code_of([&] { mock.denoise(no_level); }) == ErrorCode::Validation);
    no_level.noise_level = 1.0;
    CHECK(code_of([&] { mock.denoise(no_level); }) == ErrorCode::Validation);
}

TEST_CASE("mock attention is the foreground alpha") {
    auto targets = random_targets(5);
    MockProvider mock(targets);
    Rng rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        const auto req = make_request(rng);
        const auto map = to_attention_map(mock.attention_map(req));
        const auto alpha = render(targets.foreground, std::nullopt, req.pose, req.intrinsics, Vec3::Zero()).alpha;
        CHECK(map.values == alpha);
        const auto argmax = [](const Image& im) {
            return std::max_element(im.data.begin(), im.data.end()) - im.data.begin();
        };
        CHECK(argmax(map.values) == argmax(alpha));
    }

    targets.foreground.gaussians.clear();
    MockProvider empty(targets);
    const auto map = empty.attention_map(make_request(rng));
    for (double v : map.payload.data)
        CHECK(v == 0.0);

    auto bad = make_request(rng);
    bad.keyword = "";
    CHECK(provider_code_of([&] { mock.attention_map(bad); }) == "bad_keyword");
    bad.keyword = "{}";
    CHECK(provider_code_of([&] { mock.attention_map(bad); }) == "bad_keyword");

    MockProvider coarse(random_targets(5), {.attention_width = 8, .attention_height = 6});
    const auto small = coarse.attention_map(make_request(rng));
    CHECK(small.payload.width == 8);
    CHECK(small.payload.height == 6);
}

TEST_CASE("request validation") {
    MockProvider mock(random_targets(7));
    Rng rng(8);
    auto r = make_request(rng);
    r.image.data[4] = 1.5;
    CHECK(code_of([&] { mock.sds_gradient(r); }) == ErrorCode::Validation);
    r = make_request(rng);
    r.image = Image(kW + 1, kH, 3);
    CHECK(code_of([&] { mock.sds_gradient(r); }) == ErrorCode::Validation);
    r = make_request(rng);
    r.noise_level = 0.0;
    CHECK(code_of([&] { mock.sds_gradient(r); }) == ErrorCode::Validation);

    GuidanceResponse bad;
    bad.payload = Image(kW, kH, 3);
    bad.payload.data[0] = std::nan("");
    CHECK(code_of([&] { validate_response(GuidanceKind::Sds, make_request(rng), bad); }) == ErrorCode::Validation);
}

TEST_CASE("descent with the mock gradient recovers a single Gaussian's color") {
    Gaussian g;
    g.position = Vec3::Zero();
    g.scale_log = Vec3::Constant(std::log(0.3));
    g.opacity_logit = 3.0;
    g.sh = {sh_dc_from_color(Vec3(0.2, 0.7, 0.4))};
    GaussianScene scene;
    scene.sh_degree = 0;
    scene.gaussians = {g};

    MockTargets targets;
    targets.scene = scene;
    targets.scene.gaussians[0].sh[0] = sh_dc_from_color(Vec3(0.6, 0.3, 0.8));
    targets.foreground = targets.scene;
    MockProvider mock(targets, {.weight = 1.0});

    const auto k = Intrinsics::from_fov(32, 32, 50.0);
    const auto pose = orbit_pose(Vec3::Zero(), 3.0, 10.0, 20.0);
    GuidanceRequest req;
    req.intrinsics = k;
    req.pose = pose;
    const Image target = mock.target_image(req);

    // Step size from the curvature of the quadratic in the DC coefficient.
    const auto first = render(scene, std::nullopt, pose, k, Vec3::Zero());
    double curvature = 0.0;
    for (double a : first.alpha.data)
        curvature += a * a;
    curvature *= kShC0 * kShC0;
    const double lr = 0.5 / curvature;

    double final_mse = 1.0;
    for (int step = 0; step < 200; ++step) {
        const auto out = render(scene, std::nullopt, pose, k, Vec3::Zero());
        final_mse = mse(out.rgb, target);
        if (final_mse < 1e-4)
            break;
        req.image = out.rgb;
        const auto grad = mock.sds_gradient(req);
        const auto attr = render_backward(scene, std::nullopt, pose, k, Vec3::Zero(), grad.payload);
        scene.gaussians[0].sh[0] -= lr * attr.sh_at(0, 0);
    }
    CHECK(final_mse < 1e-4);
}

TEST_CASE("wire: base64 and float32 image encoding") {
    const std::vector<std::uint8_t> hello = {'h', 'e', 'l', 'l', 'o'};
    CHECK(wire::base64_encode(hello) == "aGVsbG8=");
    CHECK(wire::base64_decode("aGVsbG8=") == hello);
    CHECK(wire::base64_encode({}) == "");
    Rng rng(10);
    for (int n = 0; n < 40; ++n) {
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
        for (auto& b : bytes)
            b = static_cast<std::uint8_t>(rng.integer(0, 255));
        CHECK(wire::base64_decode(wire::base64_encode(bytes)) == bytes);
    }
    CHECK(code_of([] { wire::base64_decode("abc"); }) == ErrorCode::Format);
    CHECK(code_of([] { wire::base64_decode("a=bc"); }) == ErrorCode::Format);
    CHECK(code_of([] { wire::base64_decode("ab!c"); }) == ErrorCode::Format);

    // Values are little-endian float32.
    Image one(1, 1, 1, 1.0);
    CHECK(wire::encode_image(one) == "AACAPw==");

    const auto img = test::random_image(rng, 7, 5, 3, -3, 3);
    const auto back = wire::decode_image(wire::encode_image(img), 7, 5, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(back.data[i] == static_cast<double>(static_cast<float>(img.data[i])));
    CHECK(code_of([&] { wire::decode_image(wire::encode_image(img), 7, 4, 3); }) == ErrorCode::Format);
}

TEST_CASE("wire: request and response envelopes") {
    Rng rng(11);
    auto req = make_request(rng, PromptKind::Local);
    req.request_id = 77;
    req.noise_level = 0.25;
    const auto j = wire::request_to_json(GuidanceKind::Denoise, req);
    CHECK(j.at("kind") == "denoise");
    CHECK(j.at("prompt_kind") == "local");
    CHECK(j.at("width") == kW);
    CHECK(j.at("height") == kH);
    CHECK(j.at("pose").at("quat").size() == 4);
    CHECK(j.at("pose").at("trans").size() == 3);
    CHECK(j.at("pose").at("intrinsics").at("fx") == req.intrinsics.fx);

    GuidanceKind kind{};
    const auto parsed = wire::request_from_json(nlohmann::json::parse(j.dump()), kind);
    CHECK(kind == GuidanceKind::Denoise);
    CHECK(parsed.request_id == 77);
    CHECK(parsed.prompt_kind == PromptKind::Local);
    CHECK(parsed.noise_level == 0.25);
    CHECK(parsed.keyword == "sunglasses");
    CHECK(parsed.pose == req.pose);
    CHECK(test::max_abs_diff(parsed.image, req.image) < 1e-7);

    auto unset = req;
    unset.noise_level.reset();
    CHECK(wire::request_to_json(GuidanceKind::Sds, unset).at("noise_level").is_null());

    auto broken = j;
    broken["kind"] = "paint";
    CHECK(provider_code_of([&] { wire::request_from_json(broken, kind); }) == "bad_kind");
    broken = j;
    broken["prompt_kind"] = "style";
    CHECK(provider_code_of([&] { wire::request_from_json(broken, kind); }) == "bad_prompt_kind");
    broken = j;
    broken.erase("pose");
    CHECK(provider_code_of([&] { wire::request_from_json(broken, kind); }) == "bad_request");
    broken = j;
    broken["width"] = kW * 2;
    CHECK(provider_code_of([&] { wire::request_from_json(broken, kind); }) == "bad_payload");
    CHECK(provider_code_of([&] { wire::request_from_json(nlohmann::json::array(), kind); }) == "bad_request");

    GuidanceResponse resp;
    resp.request_id = 77;
    resp.payload = test::random_image(rng, 6, 4, 1);
    resp.t_used = 0.3;
    resp.elapsed_ms = 12.5;
    const auto rj = wire::response_to_json(GuidanceKind::Attention, resp);
    const auto rback = wire::response_from_json(nlohmann::json::parse(rj.dump()));
    CHECK(rback.request_id == 77);
    CHECK(rback.payload.channels == 1);
    CHECK(rback.t_used == 0.3);
    CHECK(rback.elapsed_ms == 12.5);
    CHECK(test::max_abs_diff(rback.payload, resp.payload) < 1e-7);
    CHECK(provider_code_of([] { wire::response_from_json(nlohmann::json::object()); }) == "bad_response");

    const auto err = wire::error_to_json("not_ready", "loading");
    CHECK(err == nlohmann::json{{"code", "not_ready"}, {"message", "loading"}});
}

TEST_CASE("remote provider round trip through the guidance server") {
    MockProvider mock(random_targets(12), {.seed = 3});
    GuidanceServer server(&mock);
    server.start();
    RemoteProvider remote(fast_options(server.url()));
    CHECK(remote.name() == "remote:" + server.url());

    Rng rng(13);
    for (auto kind : {GuidanceKind::Sds, GuidanceKind::Denoise, GuidanceKind::Attention}) {
        auto req = make_request(rng, kind == GuidanceKind::Sds ? PromptKind::Local : PromptKind::Global);
        req.request_id = 555;
        req.noise_level = 0.05;
        const auto direct = mock.dispatch(kind, req);
        const auto via = remote.dispatch(kind, req);
        CHECK(via.request_id == 555);
        CHECK(via.payload.same_shape(direct.payload));
        CHECK(test::max_abs_diff(via.payload, direct.payload) < 1e-6);
        CHECK(via.t_used == doctest::Approx(0.05));
    }

    // Concurrent callers each get their own answer back.
    std::vector<std::future<bool>> futures;
    for (int t = 0; t < 4; ++t) {
        futures.push_back(std::async(std::launch::async, [&, t] {
            Rng local_rng(100 + static_cast<std::uint64_t>(t));
            bool ok = true;
            for (int i = 0; i < 5; ++i) {
                auto req = make_request(local_rng, PromptKind::Global);
                req.noise_level = 0.1;
                const auto expect = mock.denoise(req);
                const auto got = remote.denoise(req);
                ok = ok && test::max_abs_diff(got.payload, expect.payload) < 1e-6;
            }
            return ok;
        }));
    }
    for (auto& f : futures)
        CHECK(f.get());
}

TEST_CASE("guidance server error responses") {
    MockProvider mock(random_targets(14));
    GuidanceServer server(&mock);
    server.start();
    httplib::Client client("127.0.0.1", server.port());

    const auto post = [&](const std::string& body) { return client.Post(wire::kGuidancePath, body, "application/json"); };
    auto res = post("{not json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(nlohmann::json::parse(res->body).at("code") == "bad_request");

    Rng rng(15);
    auto body = wire::request_to_json(GuidanceKind::Sds, make_request(rng));
    body["kind"] = "paint";
    res = post(body.dump());
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(nlohmann::json::parse(res->body).at("code") == "bad_kind");
    CHECK(nlohmann::json::parse(res->body).contains("message"));

    body = wire::request_to_json(GuidanceKind::Sds, make_request(rng, PromptKind::Reference));
    res = post(body.dump());
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(nlohmann::json::parse(res->body).at("code") == "bad_prompt_kind");

    auto out_of_range = make_request(rng);
    out_of_range.image.data[0] = 2.0;
    res = post(wire::request_to_json(GuidanceKind::Sds, out_of_range).dump());
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(nlohmann::json::parse(res->body).at("code") == "bad_payload");

    // Definite client errors surface as provider errors without retries.
    RemoteProvider remote(fast_options(server.url()));
    CHECK(provider_code_of([&] { remote.sds_gradient(make_request(rng, PromptKind::Reference)); }) ==
          "bad_prompt_kind");
}

TEST_CASE("remote provider: unavailable service, retries and timeouts") {
    Rng rng(16);
    {
        GuidanceServer idle(nullptr);
        idle.start();
        auto opts = fast_options(idle.url());
        opts.max_attempts = 2;
        RemoteProvider remote(opts);
        try {
            remote.sds_gradient(make_request(rng));
            FAIL("expected a transport error");
        } catch (const TransportError& e) {
            CHECK(e.attempts() == 2);
            CHECK(e.retryable());
            CHECK(e.http_status() == 503);
            CHECK(std::string(e.what()).find("not_ready") != std::string::npos);
        }
    }

    MockProvider mock(random_targets(17));
    {
        ScriptedServer flaky(mock);
        flaky.unavailable_first = 2;
        flaky.start();
        RemoteProvider remote(fast_options(flaky.url()));
        CHECK_NOTHROW(remote.sds_gradient(make_request(rng)));
        CHECK(flaky.hits == 3);
    }
    {
        ScriptedServer slow(mock);
        slow.delay_ms = 600;
        slow.start();
        auto opts = fast_options(slow.url());
        opts.timeout_ms = 100;
        opts.max_attempts = 2;
        RemoteProvider remote(opts);
        const auto start = std::chrono::steady_clock::now();
        CHECK(code_of([&] { remote.sds_gradient(make_request(rng)); }) == ErrorCode::Transport);
        const auto waited = std::chrono::steady_clock::now() - start;
        CHECK(waited < std::chrono::milliseconds(1000));
    }
    {
        ScriptedServer liar(mock);
        liar.wrong_id = true;
        liar.start();
        RemoteProvider remote(fast_options(liar.url()));
        CHECK(provider_code_of([&] { remote.sds_gradient(make_request(rng)); }) == "bad_response");
    }
    {
        ScriptedServer corrupt(mock);
        corrupt.corrupt_payload = true;
        corrupt.start();
        RemoteProvider remote(fast_options(corrupt.url()));
        CHECK(code_of([&] { remote.sds_gradient(make_request(rng)); }) != ErrorCode::Internal);
    }

    // Nothing listening at all.
    auto opts = fast_options("http://127.0.0.1:1");
    opts.max_attempts = 1;
    RemoteProvider nowhere(opts);
    CHECK(code_of([&] { nowhere.sds_gradient(make_request(rng)); }) == ErrorCode::Transport);

    CHECK(code_of([] { RemoteProvider bad(RemoteOptions{.url = "ftp://x"}); }) == ErrorCode::Config);
    CHECK(code_of([] { RemoteProvider bad(RemoteOptions{.url = "http://"}); }) == ErrorCode::Config);
}
