#include "forge_tools/http.hpp"

#include <atomic>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "forge/error.hpp"
#include "forge/strings.hpp"
#include "forge_tools/cli.hpp"

namespace forge::tools {

using nlohmann::json;

int http_status_for(const std::string& name) {
    static const std::set<std::string_view> conflict = {
        errc::IllegalTransition, errc::JobActive,        errc::AlreadyTerminal,      errc::SubjobsActive,
        errc::AlreadyConnected,  errc::NotConnected,     errc::DisconnectedComponent};
    static const std::set<std::string_view> unavailable = {errc::BackendUnavailable, errc::StoreUnreachable};
    static const std::set<std::string_view> internal = {errc::IoError, errc::CorruptStore, errc::FactoryFailure};
    if (name.starts_with("Unknown")) return 404;
    if (conflict.count(name)) return 409;
    if (unavailable.count(name)) return 503;
    if (internal.count(name)) return 500;
    return 422;
}

namespace {

struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json job_json(const Job& job) {
    json meta = json::object();
    auto doc = to_kv(job);
    for (const auto& [k, v] : doc.entries()) meta[k] = v;
    return {{"id", job.id},
            {"name", job.name},
            {"status", to_string(job.status)},
            {"backend", job.backend_id},
            {"parent", job.parent_id ? json(*job.parent_id) : json(nullptr)},
            {"subjobs", job.subjob_ids},
            {"reason", job.status_reason},
            {"created_at", job.created_at},
            {"updated_at", job.updated_at},
            {"meta", meta}};
}

json row_json(const CatalogueRow& r) {
    return {{"id", r.id}, {"name", r.name}, {"status", to_string(r.status)}, {"backend", r.backend}, {"updated_at", r.updated_at}};
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        auto j = json::parse(req.body);
        if (!j.is_object()) throw BadRequest("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw BadRequest(std::string("invalid JSON: ") + e.what());
    }
}

std::string text_of(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::string string_field(const json& body, const char* key, bool required = false) {
    if (!body.contains(key) || body[key].is_null()) {
        if (required) throw BadRequest(std::string("missing field '") + key + "'");
        return {};
    }
    if (!body[key].is_string()) throw BadRequest(std::string("field '") + key + "' must be a string");
    return body[key].get<std::string>();
}

std::vector<std::pair<std::string, std::string>> pairs_field(const json& body, const char* key) {
    std::vector<std::pair<std::string, std::string>> out;
    if (!body.contains(key)) return out;
    if (!body[key].is_object()) throw BadRequest(std::string("field '") + key + "' must be an object");
    for (const auto& [k, v] : body[key].items()) out.emplace_back(k, text_of(v));
    return out;
}

std::vector<std::string> assignment_words(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::string> out;
    for (const auto& [k, v] : pairs) out.push_back(k + "=" + v);
    return out;
}

std::map<std::string, std::string> to_map(const std::vector<std::pair<std::string, std::string>>& pairs) {
    return {pairs.begin(), pairs.end()};
}

void send_json(httplib::Response& res, int status, const json& j) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(Service& service, std::shared_ptr<PinnableClock> clock)
    : svc_(service), clock_(std::move(clock)), server_(std::make_unique<httplib::Server>()) {
    routes();
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::start(const std::string& host, int port) {
    if (port == 0) port = server_->bind_to_any_port(host);
    else if (!server_->bind_to_port(host, port)) port = -1;
    if (port < 0) return false;
    port_ = port;
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return true;
}

void HttpServer::stop() {
    if (!thread_.joinable()) return;
    server_->stop();
    thread_.join();
}

void HttpServer::routes() {
    auto& s = *server_;
    auto store_root = svc_.store().root();

    // Every handler runs with one pinned timestamp; `log` records CLI-equivalent words.
    using Log = std::function<void(const std::vector<std::string>&)>;
    using Handler = std::function<void(const httplib::Request&, httplib::Response&, const Log&)>;
    auto wrap = [store_root](Handler h) {
        return [h, store_root](const httplib::Request& req, httplib::Response& res) {
            std::int64_t now = SystemClock().now();
            PinnableClock::Pin pin(now);
            std::vector<std::vector<std::string>> pending;
            Log log = [&](const std::vector<std::string>& words) { pending.push_back(words); };
            try {
                h(req, res, log);
                for (const auto& w : pending) append_session(store_root, now, w);
            } catch (const BadRequest& e) {
                send_json(res, 400, {{"error", "BadRequest"}, {"message", e.what()}});
            } catch (const Error& e) {
                for (const auto& w : pending) append_session(store_root, now, w);
                send_json(res, http_status_for(e.name()), {{"error", e.name()}, {"message", e.detail()}});
            } catch (const std::exception& e) {
                send_json(res, 500, {{"error", "IoError"}, {"message", e.what()}});
            }
        };
    };
    auto id_of = [](const httplib::Request& req) { return req.path_params.at("id"); };

    s.Get("/jobs", wrap([this](const auto& req, auto& res, const Log&) {
        std::optional<JobStatus> filter;
        if (req.has_param("status")) filter = parse_status(req.get_param_value("status"));
        json out = json::array();
        for (const auto& r : svc_.list(filter)) out.push_back(row_json(r));
        send_json(res, 200, out);
    }));
    s.Post("/jobs", wrap([this](const auto& req, auto& res, const Log& log) {
        auto body = body_of(req);
        auto tpl = string_field(body, "template", true);
        auto name = string_field(body, "name");
        auto sets = pairs_field(body, "set");
        auto overrides = to_map(sets);
        if (!name.empty()) overrides["name"] = name;
        auto job = svc_.create(tpl, overrides);
        std::vector<std::string> words = {"create", "--template", tpl};
        if (!name.empty()) words.insert(words.end(), {"--name", name});
        for (const auto& w : assignment_words(sets)) words.insert(words.end(), {"--set", w});
        log(words);
        send_json(res, 201, job_json(job));
    }));
    s.Get("/jobs/:id", wrap([this, id_of](const auto& req, auto& res, const Log&) {
        send_json(res, 200, job_json(svc_.get(id_of(req))));
    }));
    s.Patch("/jobs/:id", wrap([this, id_of](const auto& req, auto& res, const Log& log) {
        auto id = id_of(req);
        auto body = body_of(req);
        auto sets = pairs_field(body, "set");
        auto name = string_field(body, "name");
        if (!sets.empty()) {
            svc_.patch(id, to_map(sets));
            std::vector<std::string> words = {"edit", id};
            for (const auto& w : assignment_words(sets)) words.insert(words.end(), {"--set", w});
            log(words);
        }
        if (!name.empty()) {
            svc_.rename(id, name);
            log({"rename", id, name});
        }
        send_json(res, 200, job_json(svc_.get(id)));
    }));
    s.Delete("/jobs/:id", wrap([this, id_of](const auto& req, auto& res, const Log& log) {
        auto id = id_of(req);
        svc_.remove(id);
        log({"delete", id});
        res.status = 204;
    }));

    auto action = [&](const char* verb, std::function<json(const std::string&)> op) {
        std::string v = verb;
        s.Post("/jobs/:id/" + v, wrap([op, v, id_of](const auto& req, auto& res, const Log& log) {
            auto id = id_of(req);
            auto out = op(id);
            log({v, id});
            send_json(res, 200, out);
        }));
    };
    action("configure", [this](const std::string& id) { return job_json(svc_.configure(id)); });
    action("submit", [this](const std::string& id) { return job_json(svc_.submit(id)); });
    action("kill", [this](const std::string& id) { return job_json(svc_.kill(id)); });
    action("fetch", [this](const std::string& id) {
        json files = json::array();
        for (const auto& f : svc_.fetch(id)) files.push_back(f.string());
        return json{{"files", files}};
    });
    action("merge", [this](const std::string& id) {
        auto r = svc_.merge(id);
        return json{{"merged", r.merged}, {"copied", r.copied}, {"missing", r.missing}, {"partial", r.partial}};
    });
    s.Post("/jobs/:id/copy", wrap([this, id_of](const auto& req, auto& res, const Log& log) {
        auto id = id_of(req);
        auto name = string_field(body_of(req), "name");
        auto job = svc_.copy(id, name.empty() ? std::nullopt : std::optional<std::string>(name));
        std::vector<std::string> words = {"copy", id};
        if (!name.empty()) words.insert(words.end(), {"--name", name});
        log(words);
        send_json(res, 201, job_json(job));
    }));
    s.Post("/jobs/:id/split", wrap([this, id_of](const auto& req, auto& res, const Log& log) {
        auto id = id_of(req);
        auto body = body_of(req);
        auto script = string_field(body, "script");
        auto opts = pairs_field(body, "options");
        std::vector<Job> subs;
        std::vector<std::string> words = {"split", id};
        if (!script.empty()) {
            if (body.contains("max")) throw BadRequest("give either 'max' or 'script'");
            subs = svc_.split_with_script(id, script, to_map(opts));
            words.insert(words.end(), {"--script", script});
            for (const auto& w : assignment_words(opts)) words.insert(words.end(), {"--opt", w});
        } else {
            if (!body.contains("max") || !body["max"].is_number_integer() || body["max"].template get<int>() < 1)
                throw BadRequest("'max' must be a positive integer");
            int max = body["max"].template get<int>();
            subs = svc_.split(id, max);
            words.insert(words.end(), {"--max", std::to_string(max)});
        }
        log(words);
        json out = json::array();
        for (const auto& j : subs) out.push_back(job_json(j));
        send_json(res, 201, out);
    }));

    s.Get("/options/schema", wrap([this](const auto& req, auto& res, const Log&) {
        bool all = req.has_param("all") && req.get_param_value("all") != "0";
        json out = json::array();
        for (const auto& spec : favorites_first(svc_.schema())) {
            if (!all && !spec.favorite) continue;
            auto p = presentation_for(spec);
            json pj = {{"kind", to_string(p.kind)}, {"choices", p.choices}};
            if (p.range) pj["range"] = {p.range->min, p.range->max};
            out.push_back({{"key", spec.key()},
                           {"owner", spec.owner},
                           {"name", spec.name},
                           {"type", spec.type.to_string()},
                           {"default", format_literal(spec.default_value)},
                           {"favorite", spec.favorite},
                           {"doc", spec.doc},
                           {"presentation", pj}});
        }
        send_json(res, 200, out);
    }));
    s.Get("/options/templates", wrap([this](const auto&, auto& res, const Log&) {
        send_json(res, 200, svc_.option_templates().list());
    }));
    s.Get("/options/templates/:name", wrap([this](const auto& req, auto& res, const Log&) {
        auto set = svc_.option_templates().load(req.path_params.at("name"), svc_.schema());
        json assignments = json::object();
        for (const auto& [k, v] : set.assignments) assignments[k] = format_literal(v);
        json sequences = json::object();
        for (const auto& [k, entries] : set.sequences) {
            json arr = json::array();
            for (const auto& e : entries) arr.push_back({{"entry", e.entry}, {"enabled", e.enabled}});
            sequences[k] = arr;
        }
        send_json(res, 200, {{"assignments", assignments}, {"sequences", sequences}});
    }));
    s.Put("/options/templates/:name", wrap([this](const auto& req, auto& res, const Log& log) {
        auto name = req.path_params.at("name");
        auto body = body_of(req);
        auto base = string_field(body, "template");
        auto sets = assignment_words(pairs_field(body, "set"));
        svc_.option_templates().save(compose_options(svc_, base, "", sets), name);
        std::vector<std::string> words = {"options", "save", name};
        if (!base.empty()) words.insert(words.end(), {"--template", base});
        for (const auto& w : sets) words.insert(words.end(), {"--set", w});
        log(words);
        send_json(res, 200, {{"name", name}});
    }));
    s.Post("/options/render", wrap([this](const auto& req, auto& res, const Log&) {
        auto body = body_of(req);
        auto format = string_field(body, "format");
        auto set = compose_options(svc_, string_field(body, "template"), string_field(body, "text"),
                                   assignment_words(pairs_field(body, "set")));
        res.set_content(render_options(set, svc_.schema(), parse_option_format(format.empty() ? "options-text" : format)),
                        "text/plain");
    }));

    s.Get("/components", wrap([this](const auto& req, auto& res, const Log&) {
        std::optional<std::string> filter;
        if (req.has_param("functional")) filter = req.get_param_value("functional");
        json out = json::array();
        for (const auto& info : svc_.bus().list_components(filter)) {
            const auto& d = info.descriptor;
            out.push_back({{"actual", d.actual_name},
                           {"logical", d.logical_name},
                           {"functional", d.functional_names},
                           {"priority", d.priority},
                           {"dependencies", d.dependencies},
                           {"connected", info.connected}});
        }
        send_json(res, 200, out);
    }));
    s.Get("/components/graph", wrap([this](const auto&, auto& res, const Log&) {
        res.set_content(svc_.bus().dependency_graph(), "text/plain");
    }));
    s.Get("/components/:name/params", wrap([this](const auto& req, auto& res, const Log&) {
        auto& bus = svc_.bus();
        json out = json::object();
        for (const auto& [k, v] : bus.params(bus.select(req.path_params.at("name")))) out[k] = format_literal(v);
        send_json(res, 200, out);
    }));
    s.Post("/components/:name/connect", wrap([this](const auto& req, auto& res, const Log&) {
        auto alias = string_field(body_of(req), "alias");
        auto h = svc_.bus().connect(req.path_params.at("name"), alias.empty() ? std::nullopt : std::optional<std::string>(alias));
        send_json(res, 200, {{"alias", h.alias()}, {"actual", h.actual_name()}});
    }));
    s.Post("/components/:name/disconnect", wrap([this](const auto& req, auto& res, const Log&) {
        auto removed = svc_.bus().disconnect(req.path_params.at("name"));
        send_json(res, 200, {{"disconnected", removed}});
    }));
    s.Post("/components/:name/replace", wrap([this](const auto& req, auto& res, const Log&) {
        auto replacement = string_field(body_of(req), "replacement", true);
        svc_.bus().replace(req.path_params.at("name"), replacement);
        send_json(res, 200, {{"replacement", replacement}});
    }));
    s.Patch("/components/:name", wrap([this](const auto& req, auto& res, const Log& log) {
        auto name = req.path_params.at("name");
        auto params = pairs_field(body_of(req), "params");
        svc_.configure_component(name, to_map(params));
        std::vector<std::string> words = {"components", "configure", name};
        for (const auto& w : assignment_words(params)) words.push_back(w);
        log(words);
        send_json(res, 200, {{"name", name}});
    }));
    s.Put("/components/:name/pin", wrap([this](const auto& req, auto& res, const Log& log) {
        auto name = req.path_params.at("name");
        auto actual = string_field(body_of(req), "actual", true);
        svc_.pin_component(name, actual);
        log({"components", "pin", name, actual});
        send_json(res, 200, {{"name", name}, {"actual", actual}});
    }));
    s.Delete("/components/:name/pin", wrap([this](const auto& req, auto& res, const Log& log) {
        auto name = req.path_params.at("name");
        svc_.unpin_component(name);
        log({"components", "unpin", name});
        res.status = 204;
    }));

    s.Get("/monitor", wrap([this](const auto&, auto& res, const Log&) {
        send_json(res, 200, {{"running", svc_.monitor().running()}, {"interval", svc_.monitor().interval()}});
    }));
    s.Post("/monitor/start", wrap([this](const auto& req, auto& res, const Log&) {
        auto body = body_of(req);
        std::int64_t interval = svc_.monitor().interval();
        if (body.contains("interval")) {
            if (!body["interval"].is_number_integer()) throw BadRequest("'interval' must be an integer");
            interval = body["interval"].template get<std::int64_t>();
        }
        svc_.monitor().start(interval);
        send_json(res, 200, {{"running", true}, {"interval", interval}});
    }));
    s.Post("/monitor/stop", wrap([this](const auto&, auto& res, const Log&) {
        svc_.monitor().stop();
        send_json(res, 200, {{"running", false}});
    }));
    s.Post("/monitor/poll", wrap([this](const auto&, auto& res, const Log& log) {
        json out = json::array();
        for (const auto& e : svc_.poll()) out.push_back(format_event(e));
        log({"monitor", "poll"});
        send_json(res, 200, out);
    }));

    s.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
        auto sub = svc_.events().subscribe();
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/plain",
            [sub](std::size_t, httplib::DataSink& sink) {
                if (!sink.is_writable()) return false;
                auto item = sub->next(std::chrono::milliseconds(200));
                if (!item) {
                    if (sub->closed()) sink.done();
                    return true;
                }
                std::string line = item->overflow() ? std::string(kOverflowMarker) : format_event(*item->event);
                line += '\n';
                if (!sink.write(line.data(), line.size())) return false;
                if (item->overflow()) sink.done();
                return true;
            },
            [sub](bool) { sub->close(); });
    });
}

}  // namespace forge::tools
