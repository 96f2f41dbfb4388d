#include <httplib.h>
#include <json.hpp>

#include <sstream>
#include <thread>

#include "forge_tools/cli.hpp"
#include "forge_tools/http.hpp"
#include "support/test_support.hpp"
#include "unit_support.hpp"

namespace forge::tools {
namespace {

using forge::testing::TempDir;
using nlohmann::json;
using namespace std::chrono_literals;

struct Http {
    TempDir dir;
    std::shared_ptr<PinnableClock> clock = std::make_shared<PinnableClock>();
    Service svc{options()};
    HttpServer server{svc, clock};
    std::unique_ptr<httplib::Client> client;

    ServiceOptions options() {
        auto o = forge::testing::service_options(dir / "store");
        o.clock = clock;
        return o;
    }

    Http() {
        if (!server.start("127.0.0.1", 0)) throw std::runtime_error("bind failed");
        client = std::make_unique<httplib::Client>("127.0.0.1", server.port());
        client->set_read_timeout(10, 0);
    }
    ~Http() { server.stop(); }

    std::pair<int, json> post(const std::string& path, const json& body = json::object()) {
        auto r = client->Post(path, body.dump(), "application/json");
        return result(r);
    }
    std::pair<int, json> get(const std::string& path) { return result(client->Get(path)); }

    static std::pair<int, json> result(const httplib::Result& r) {
        if (!r) throw std::runtime_error("no response");
        return {r->status, r->body.empty() ? json() : json::parse(r->body)};
    }
};

TEST(Http, StatusMapping) {
    EXPECT_EQ(http_status_for("UnknownJob"), 404);
    EXPECT_EQ(http_status_for("UnknownComponent"), 404);
    EXPECT_EQ(http_status_for("IllegalTransition"), 409);
    EXPECT_EQ(http_status_for("JobActive"), 409);
    EXPECT_EQ(http_status_for("BackendUnavailable"), 503);
    EXPECT_EQ(http_status_for("CorruptStore"), 500);
    EXPECT_EQ(http_status_for("ValidationError"), 422);
    EXPECT_EQ(http_status_for("OutOfRange"), 422);
}

TEST(Http, JobsCrud) {
    Http h;
    auto [c1, j1] = h.post("/jobs", {{"template", "generic-exec"}, {"name", "web"}});
    ASSERT_EQ(c1, 201) << j1.dump();
    EXPECT_EQ(j1["id"], "j000001");
    EXPECT_EQ(j1["status"], "in-preparation");
    h.post("/jobs", {{"template", "count-demo"}});

    auto [c2, all] = h.get("/jobs");
    ASSERT_EQ(c2, 200);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0]["name"], "web");
    auto [c3, none] = h.get("/jobs?status=submitted");
    EXPECT_EQ(c3, 200);
    EXPECT_TRUE(none.empty());

    auto r = h.client->Patch("/jobs/j000001", json{{"name", "renamed"}}.dump(), "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(json::parse(r->body)["name"], "renamed");

    auto [c4, e4] = h.get("/jobs/j999999");
    EXPECT_EQ(c4, 404);
    EXPECT_EQ(e4["error"], "UnknownJob");
    auto [c5, e5] = h.post("/jobs/j000001/kill");
    EXPECT_EQ(c5, 409);
    EXPECT_EQ(e5["error"], "IllegalTransition");
    auto bad = h.client->Post("/jobs", "{not json", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    auto [c6, e6] = h.post("/jobs/j000002/split", {{"max", 0}});
    EXPECT_EQ(c6, 400);
    auto [c7, e7] = h.post("/jobs", {{"template", "generic-exec"}, {"set", {{"application.version", ""}}}});
    EXPECT_EQ(c7, 422) << e7.dump();
    EXPECT_EQ(e7["error"], "InvalidOverride");

    auto del = h.client->Delete("/jobs/j000002");
    ASSERT_TRUE(del);
    EXPECT_EQ(del->status, 204);
    EXPECT_EQ(h.get("/jobs").second.size(), 1u);
}

TEST(Http, EventsStream) {
    Http h;
    std::string received;
    std::atomic<bool> done{false};
    std::thread reader([&] {
        httplib::Client c("127.0.0.1", h.server.port());
        c.set_read_timeout(10, 0);
        c.Get("/events", [&](const char* data, std::size_t n) {
            received.append(data, n);
            return received.find("in-preparation submitted") == std::string::npos;
        });
        done = true;
    });
    std::this_thread::sleep_for(300ms);
    ASSERT_EQ(h.post("/jobs", {{"template", "generic-exec"}}).first, 201);
    ASSERT_EQ(h.post("/jobs/j000001/configure").first, 200);
    ASSERT_EQ(h.post("/jobs/j000001/submit").first, 200);
    reader.join();
    EXPECT_TRUE(done);
    EXPECT_NE(received.find("EVT j000001 in-preparation submitted"), std::string::npos) << received;
}

TEST(Http, SessionLogReplaysToSameCatalogue) {
    Http h;
    ASSERT_EQ(h.post("/jobs", {{"template", "generic-exec"}, {"name", "a b"}}).first, 201);
    ASSERT_EQ(h.post("/jobs", {{"template", "count-demo"}, {"set", {{"application.param.0.value", "hit"}}}}).first, 201);
    ASSERT_EQ(h.post("/jobs/j000001/copy", {{"name", "c"}}).first, 201);
    ASSERT_EQ(h.post("/jobs/j000002/split", {{"max", 1}}).first, 201);
    ASSERT_EQ(h.client->Delete("/jobs/j000003")->status, 204);
    h.server.stop();

    TempDir other;
    CliConfig config;
    config.share_dir = forge::testing::source_share_dir();
    config.path_prepend = {forge::testing::tool_bin_dir().string()};
    std::ostringstream out, err;
    int rc = run_cli({"--store", (other / "store").string(), "replay", (h.dir / "store" / "session.log").string()}, out, err,
                     config);
    ASSERT_EQ(rc, 0) << err.str();
    EXPECT_EQ(read_file(other / "store" / "catalogue.meta"), read_file(h.dir / "store" / "catalogue.meta"));
}

}  // namespace
}  // namespace forge::tools
