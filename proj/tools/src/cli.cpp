#include "forge_tools/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "forge/error.hpp"
#include "forge/service.hpp"
#include "forge/strings.hpp"
#include "forge_tools/http.hpp"
#include "forge_tools/session.hpp"

namespace forge::tools {

namespace {

struct Args {
    std::string template_id;
    std::string name;
    std::string id;
    std::string second;
    std::string status;
    std::string script;
    std::string format = "options-text";
    std::string file;
    std::string addr = "127.0.0.1:8080";
    std::string functional;
    std::string alias;
    std::string base;
    std::vector<std::string> sets;
    std::vector<std::string> opts;
    int max = 0;
    std::int64_t interval = 0;
    bool dry_run = false;
    bool all = false;
};

struct Parsed {
    CLI::App app{"forge: define, split, submit and monitor jobs", "forge"};
    Args a;
    std::vector<std::string> path;  // verb [subverb]
};

void build(Parsed& p) {
    auto& app = p.app;
    auto& a = p.a;
    app.require_subcommand(1);
    app.fallthrough(false);
    app.footer("Global options (anywhere on the line): --store PATH (env FORGE_STORE), --share PATH (env FORGE_SHARE),\n"
               "--porcelain (tab-separated output).");

    auto* create = app.add_subcommand("create", "Create a job from a workflow template");
    create->add_option("--template,-t", a.template_id, "Template id")->required();
    create->add_option("--name,-n", a.name, "Job name");
    create->add_option("--set", a.sets, "job.meta key=value override (repeatable)");

    auto* copy = app.add_subcommand("copy", "Copy a job into a new in-preparation job");
    copy->add_option("id", a.id)->required();
    copy->add_option("--name,-n", a.name);

    auto* rename = app.add_subcommand("rename", "Rename a job");
    rename->add_option("id", a.id)->required();
    rename->add_option("name", a.name)->required();

    auto* del = app.add_subcommand("delete", "Delete a job and its directory");
    del->add_option("id", a.id)->required();

    auto* edit = app.add_subcommand("edit", "Change job.meta keys of an in-preparation job");
    edit->add_option("id", a.id)->required();
    edit->add_option("--set", a.sets, "key=value (empty value removes the key)")->required();

    for (const char* verb : {"configure", "submit", "kill", "status", "fetch", "merge"}) {
        auto* sub = app.add_subcommand(verb);
        sub->add_option("id", a.id)->required();
    }
    app.get_subcommand("configure")->description("Generate script.sh (and jdl.txt) for inspection");
    app.get_subcommand("submit")->description("Submit a job (or all subjobs of a split job)");
    app.get_subcommand("kill")->description("Kill a submitted or running job");
    app.get_subcommand("status")->description("Show one job");
    app.get_subcommand("fetch")->description("Retrieve outputs into the job output directory");
    app.get_subcommand("merge")->description("Merge subjob outputs into the parent output directory");

    auto* list = app.add_subcommand("list", "List jobs");
    list->add_option("--status,-s", a.status, "Only jobs with this status");

    auto* split = app.add_subcommand("split", "Split a job into subjobs");
    split->add_option("id", a.id)->required();
    auto* max = split->add_option("--max", a.max, "Input files per subjob")->check(CLI::PositiveNumber);
    auto* script = split->add_option("--script", a.script, "Splitter script writing a plan file");
    split->add_option("--opt", a.opts, "KEY=VALUE passed to the splitter as FORGE_SPLIT_KEY");
    max->excludes(script);

    auto* fsck = app.add_subcommand("fsck", "Check the store for inconsistencies");
    (void)fsck;

    auto* monitor = app.add_subcommand("monitor", "Job monitoring");
    monitor->require_subcommand(1);
    auto* mstart = monitor->add_subcommand("start", "Poll in the foreground until 'monitor stop'");
    mstart->add_option("--interval", a.interval, "Seconds between polls")->check(CLI::NonNegativeNumber);
    monitor->add_subcommand("stop", "Ask a running 'monitor start' to stop");
    monitor->add_subcommand("poll", "Poll every active job once");

    auto* comps = app.add_subcommand("components", "Software bus");
    comps->require_subcommand(1);
    comps->add_subcommand("list")->add_option("--functional", a.functional);
    auto* cconnect = comps->add_subcommand("connect");
    cconnect->add_option("name", a.id)->required();
    cconnect->add_option("--alias", a.alias);
    comps->add_subcommand("disconnect")->add_option("name", a.id)->required();
    auto* creplace = comps->add_subcommand("replace");
    creplace->add_option("name", a.id)->required();
    creplace->add_option("replacement", a.second)->required();
    auto* cconf = comps->add_subcommand("configure");
    cconf->add_option("name", a.id)->required();
    cconf->add_option("assignments", a.sets, "param=value")->required();
    auto* cpin = comps->add_subcommand("pin");
    cpin->add_option("name", a.id)->required();
    cpin->add_option("actual", a.second)->required();
    comps->add_subcommand("unpin")->add_option("name", a.id)->required();
    comps->add_subcommand("graph");
    comps->add_subcommand("params")->add_option("name", a.id)->required();

    auto* options = app.add_subcommand("options", "Job-options editor");
    options->require_subcommand(1);
    options->add_subcommand("schema")->add_flag("--all", a.all, "Include non-favorite options");
    auto* render = options->add_subcommand("render");
    render->add_option("--template", a.base);
    render->add_option("--file", a.file, "Options text to start from");
    render->add_option("--set", a.sets, "Owner.Name=value");
    render->add_option("--format", a.format)->check(CLI::IsMember({"options-text", "script"}));
    auto* save = options->add_subcommand("save");
    save->add_option("name", a.name)->required();
    save->add_option("--template", a.base);
    save->add_option("--file", a.file);
    save->add_option("--set", a.sets);
    options->add_subcommand("templates");
    options->add_subcommand("check")->add_option("file", a.file)->required();

    app.add_subcommand("serve", "Run the HTTP service")->add_option("--addr", a.addr, "host:port");

    auto* replay = app.add_subcommand("replay", "Run a recorded session");
    replay->add_option("file", a.file)->required();
    replay->add_flag("--dry-run", a.dry_run, "Validate only");
}

void parse(Parsed& p, const std::vector<std::string>& words) {
    build(p);
    if (!words.empty() && !words.front().starts_with("-")) {
        bool known = false;
        for (const auto* sub : p.app.get_subcommands([](const CLI::App*) { return true; }))
            known = known || sub->get_name() == words.front();
        if (!known) throw CLI::ValidationError("unknown command '" + words.front() + "'");
    }
    std::vector<std::string> reversed(words.rbegin(), words.rend());
    p.app.parse(reversed);
    for (auto* sub = p.app.get_subcommands().empty() ? nullptr : p.app.get_subcommands().front(); sub;) {
        p.path.push_back(sub->get_name());
        sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front();
    }
}

std::pair<std::string, std::string> key_value(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("expected key=value, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

std::map<std::string, std::string> key_values(const std::vector<std::string>& items) {
    std::map<std::string, std::string> out;
    for (const auto& s : items) out.insert(key_value(s));
    return out;
}

struct Globals {
    std::optional<std::string> store;
    std::optional<std::string> share;
    bool porcelain = false;
};

// Global options may appear anywhere; they are not part of the recorded command.
std::vector<std::string> strip_globals(const std::vector<std::string>& args, Globals& g) {
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& s = args[i];
        if (s == "--porcelain") {
            g.porcelain = true;
        } else if ((s == "--store" || s == "--share") && i + 1 < args.size()) {
            (s == "--store" ? g.store : g.share) = args[++i];
        } else if (s.starts_with("--store=")) {
            g.store = s.substr(8);
        } else if (s.starts_with("--share=")) {
            g.share = s.substr(8);
        } else {
            rest.push_back(s);
        }
    }
    return rest;
}

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

std::string pad(const std::string& s, std::size_t width) { return s.size() >= width ? s : s + std::string(width - s.size(), ' '); }

void print_rows(std::ostream& out, const std::vector<std::vector<std::string>>& rows, bool porcelain) {
    if (porcelain) {
        for (const auto& r : rows) out << join(r, "\t") << "\n";
        return;
    }
    std::vector<std::size_t> widths;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (widths.size() <= i) widths.push_back(0);
            widths[i] = std::max(widths[i], r[i].size());
        }
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t i = 0; i < r.size(); ++i) line += i + 1 == r.size() ? r[i] : pad(r[i], widths[i] + 2);
        out << line << "\n";
    }
}

struct Runner {
    Globals g;
    fs::path store_root;
    fs::path share_dir;
    std::vector<std::string> path_prepend;
    std::shared_ptr<PinnableClock> clock = std::make_shared<PinnableClock>();
    std::ostream& out;
    std::ostream& err;

    std::unique_ptr<Service> service() const {
        ServiceOptions o;
        o.store_root = store_root;
        o.share_dir = share_dir;
        o.path_prepend = path_prepend;
        o.clock = clock;
        return std::make_unique<Service>(std::move(o));
    }

    int run(const std::vector<std::string>& words, std::optional<std::int64_t> ts, bool nested);
    int execute(Parsed& p, Service& svc);
    int replay(const Args& a);
    int monitor_foreground(Service& svc, std::int64_t interval);
    int serve(Service& svc, const std::string& addr);
};

int Runner::run(const std::vector<std::string>& words, std::optional<std::int64_t> ts, bool nested) {
    Parsed p;
    try {
        parse(p, words);
        if (p.path.front() == "split" && p.a.max == 0 && p.a.script.empty())
            throw CLI::ValidationError("split needs --max or --script");
        if (nested && (p.path.front() == "replay" || p.path.front() == "serve" ||
                       (p.path.front() == "monitor" && p.path.back() == "start")))
            throw CLI::ValidationError("'" + p.path.front() + "' cannot be replayed");
        for (const auto& s : p.a.sets)
            if (p.path.front() != "options" || p.path.back() != "check") key_value(s);
        for (const auto& s : p.a.opts) key_value(s);
    } catch (const CLI::CallForHelp&) {
        out << p.app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << p.app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage: " << e.what() << "\n";
        return 2;
    }
    if (p.path.front() == "replay") return replay(p.a);

    std::int64_t now = ts.value_or(SystemClock().now());
    PinnableClock::Pin pin(now);
    try {
        if (store_root.empty()) throw Error(errc::IoError, "no store: use --store or FORGE_STORE");
        auto svc = service();
        int rc = execute(p, *svc);
        if (rc == 0 && is_mutating(words)) append_session(store_root, now, words);
        return rc;
    } catch (const Error& e) {
        err << e.name() << ": " << e.detail() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "IoError: " << e.what() << "\n";
        return 1;
    }
}

std::string job_line_status(const Job& j) { return std::string(to_string(j.status)); }

int Runner::execute(Parsed& p, Service& svc) {
    const auto& a = p.a;
    const auto& verb = p.path.front();
    const std::string sub = p.path.size() > 1 ? p.path[1] : std::string();
    bool porcelain = g.porcelain;

    if (verb == "create") {
        auto overrides = key_values(a.sets);
        if (!a.name.empty()) overrides["name"] = a.name;
        out << svc.create(a.template_id, overrides).id << "\n";
    } else if (verb == "copy") {
        out << svc.copy(a.id, a.name.empty() ? std::nullopt : std::optional<std::string>(a.name)).id << "\n";
    } else if (verb == "rename") {
        svc.rename(a.id, a.name);
    } else if (verb == "delete") {
        svc.remove(a.id);
    } else if (verb == "edit") {
        svc.patch(a.id, key_values(a.sets));
    } else if (verb == "configure") {
        auto job = svc.configure(a.id);
        if (!porcelain) out << "configured " << job.id << ": " << svc.store().job_dir(job.id).string() << "/script.sh\n";
    } else if (verb == "submit") {
        auto job = svc.submit(a.id);
        out << job.id << (porcelain ? "\t" : " ") << job_line_status(job) << "\n";
    } else if (verb == "kill") {
        auto job = svc.kill(a.id);
        out << job.id << (porcelain ? "\t" : " ") << job_line_status(job) << "\n";
    } else if (verb == "status") {
        auto job = svc.get(a.id);
        if (porcelain) {
            out << job.id << "\t" << job.name << "\t" << to_string(job.status) << "\t" << job.backend_id << "\t"
                << job.status_reason << "\n";
        } else {
            out << "id: " << job.id << "\nname: " << job.name << "\nstatus: " << to_string(job.status)
                << "\nbackend: " << job.backend_id << "\n";
            if (!job.status_reason.empty()) out << "reason: " << job.status_reason << "\n";
            if (job.parent_id) out << "parent: " << *job.parent_id << "\n";
            if (!job.subjob_ids.empty()) out << "subjobs: " << join(job.subjob_ids, " ") << "\n";
            out << "output: " << job_output_dir(svc.store(), job).string() << "\n";
        }
    } else if (verb == "list") {
        std::optional<JobStatus> filter;
        if (!a.status.empty()) filter = parse_status(a.status);
        std::vector<std::vector<std::string>> rows;
        if (!porcelain) rows.push_back({"ID", "NAME", "STATUS", "BACKEND"});
        for (const auto& r : svc.list(filter)) {
            if (porcelain) rows.push_back({r.id, r.name, std::string(to_string(r.status))});
            else rows.push_back({r.id, r.name, std::string(to_string(r.status)), r.backend});
        }
        print_rows(out, rows, porcelain);
    } else if (verb == "split") {
        auto subs = a.script.empty() ? svc.split(a.id, a.max) : svc.split_with_script(a.id, a.script, key_values(a.opts));
        for (const auto& s : subs) {
            std::vector<std::string> files;
            for (const auto& in : s.declared_inputs()) files.push_back(in.name);
            out << s.id << (porcelain ? "\t" : "  ") << join(files, porcelain ? "," : ", ") << "\n";
        }
    } else if (verb == "merge") {
        auto r = svc.merge(a.id);
        for (const auto& m : r.merged) out << "merged\t" << m << "\n";
        for (const auto& c : r.copied) out << "copied\t" << c << "\n";
        for (const auto& m : r.missing) out << "missing\t" << m << "\n";
        if (r.partial && !porcelain) out << "partial merge: some subjob outputs are missing\n";
    } else if (verb == "fetch") {
        for (const auto& f : svc.fetch(a.id)) out << f.string() << "\n";
    } else if (verb == "fsck") {
        auto findings = svc.store().fsck();
        for (const auto& f : findings) out << to_string(f.kind) << "\t" << f.job_id << "\t" << f.detail << "\n";
        if (!findings.empty()) return 1;
    } else if (verb == "monitor") {
        if (sub == "start") {
            return monitor_foreground(svc, a.interval ? a.interval : svc.monitor().interval());
        } else if (sub == "stop") {
            write_file(store_root / "monitor.stop", "stop\n");
        } else {
            for (const auto& e : svc.poll()) out << format_event(e) << "\n";
        }
    } else if (verb == "components") {
        auto& bus = svc.bus();
        if (sub == "list") {
            std::vector<std::vector<std::string>> rows;
            if (!porcelain) rows.push_back({"ACTUAL", "LOGICAL", "FUNCTIONAL", "PRIORITY", "CONNECTED"});
            std::optional<std::string> filter;
            if (!a.functional.empty()) filter = a.functional;
            for (const auto& info : bus.list_components(filter)) {
                const auto& d = info.descriptor;
                std::vector<std::string> fn(d.functional_names.begin(), d.functional_names.end());
                rows.push_back({d.actual_name, d.logical_name, join(fn, ","), std::to_string(d.priority),
                                info.connected ? "yes" : "no"});
            }
            print_rows(out, rows, porcelain);
        } else if (sub == "connect") {
            auto h = a.alias.empty() ? bus.connect(a.id) : bus.connect(a.id, a.alias);
            out << h.alias() << " -> " << h.actual_name() << "\n";
            for (const auto& b : bus.bookmarks(h.actual_name())) out << "  also connected " << b << "\n";
        } else if (sub == "disconnect") {
            bus.acquire(a.id);
            for (const auto& n : bus.disconnect(a.id)) out << n << "\n";
        } else if (sub == "replace") {
            bus.acquire(a.id);
            bus.replace(a.id, a.second);
            out << a.id << " -> " << a.second << "\n";
        } else if (sub == "configure") {
            svc.configure_component(a.id, key_values(a.sets));
        } else if (sub == "pin") {
            svc.pin_component(a.id, a.second);
        } else if (sub == "unpin") {
            svc.unpin_component(a.id);
        } else if (sub == "graph") {
            for (const auto& info : bus.list_components())
                if (!info.descriptor.dependencies.empty()) bus.acquire(info.descriptor.actual_name);
            out << bus.dependency_graph();
        } else if (sub == "params") {
            auto actual = bus.select(a.id);
            for (const auto& [k, v] : bus.params(actual)) out << k << (porcelain ? "\t" : " = ") << format_literal(v) << "\n";
        }
    } else if (verb == "options") {
        const auto& schema = svc.schema();
        auto build_set = [&]() { return compose_options(svc, a.base, a.file.empty() ? "" : read_file(a.file), a.sets); };
        if (sub == "schema") {
            auto specs = favorites_first(schema);
            std::vector<std::vector<std::string>> rows;
            if (!porcelain) rows.push_back({"OPTION", "TYPE", "PRESENTATION", "DEFAULT", "DOC"});
            for (const auto& s : specs) {
                if (!a.all && !s.favorite) continue;
                rows.push_back({s.key(), s.type.to_string(), std::string(to_string(presentation_for(s).kind)),
                                format_literal(s.default_value), s.doc});
            }
            print_rows(out, rows, porcelain);
        } else if (sub == "render") {
            out << render_options(build_set(), schema, parse_option_format(a.format));
        } else if (sub == "save") {
            svc.option_templates().save(build_set(), a.name);
        } else if (sub == "templates") {
            for (const auto& t : svc.option_templates().list()) out << t << "\n";
        } else if (sub == "check") {
            auto set = parse_options(read_file(a.file), schema);
            if (!porcelain) out << effective_non_default(set, schema).size() << " non-default options\n";
        }
    } else if (verb == "serve") {
        return serve(svc, a.addr);
    }
    return 0;
}

int Runner::monitor_foreground(Service& svc, std::int64_t interval) {
    auto stop_file = store_root / "monitor.stop";
    fs::remove(stop_file);
    svc.monitor().start(interval);
    auto sub = svc.events().subscribe();
    g_interrupted = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted && !fs::exists(stop_file)) {
        while (auto item = sub->next(std::chrono::milliseconds(200))) {
            if (item->overflow()) break;
            out << format_event(*item->event) << std::endl;
        }
    }
    svc.monitor().stop();
    fs::remove(stop_file);
    return 0;
}

int Runner::serve(Service& svc, const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw Error(errc::ValidationError, "--addr must be host:port");
    int port = std::stoi(addr.substr(colon + 1));
    HttpServer server(svc, clock);
    g_interrupted = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    if (!server.start(addr.substr(0, colon), port)) throw Error(errc::IoError, "cannot listen on " + addr);
    out << "listening on http://" << addr.substr(0, colon) << ":" << server.port() << std::endl;
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return 0;
}

int Runner::replay(const Args& a) {
    std::vector<SessionLine> lines;
    try {
        lines = parse_session(read_file(a.file));
    } catch (const Error& e) {
        err << "usage: " << e.detail() << "\n";
        return e.name() == errc::ParseError ? 2 : 1;
    }
    for (const auto& l : lines) {
        if (auto problem = check_usage(l.words)) {
            err << "line " << l.line_no << ": " << *problem << "\n";
            return 2;
        }
    }
    if (a.dry_run) {
        out << lines.size() << " commands ok\n";
        return 0;
    }
    for (const auto& l : lines) {
        int rc = run(l.words, l.timestamp, true);
        if (rc != 0) {
            err << "replay stopped at line " << l.line_no << "\n";
            return rc;
        }
    }
    return 0;
}

}  // namespace

OptionSet compose_options(Service& svc, const std::string& base, const std::string& text,
                          const std::vector<std::string>& sets) {
    const auto& schema = svc.schema();
    OptionSet set;
    if (!base.empty()) set = svc.option_templates().load(base, schema);
    if (!text.empty()) {
        auto parsed = parse_options(text, schema);
        for (auto& [k, v] : parsed.assignments) set.assignments[k] = v;
        for (auto& [k, v] : parsed.sequences) set.sequences[k] = v;
    }
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw Error(errc::ValidationError, "expected Key=value, got '" + s + "'");
        auto key = s.substr(0, eq);
        const auto* spec = schema.find(key);
        if (spec && spec->type.kind == ValueKind::Sequence) {
            // `~Entry` keeps the entry in the sequence but disabled.
            std::vector<SequenceEntry> entries;
            auto items = std::get<std::vector<Scalar>>(parse_value(spec->type, s.substr(eq + 1)));
            for (const auto& item : items) {
                const auto& name = std::get<std::string>(item);
                if (name.starts_with("~")) entries.push_back({name.substr(1), false});
                else entries.push_back({name, true});
            }
            define_sequence(set, schema, key, std::move(entries));
        } else {
            set_option_text(set, schema, key, s.substr(eq + 1));
        }
    }
    return set;
}

std::optional<std::string> check_usage(const std::vector<std::string>& words) {
    Parsed p;
    try {
        parse(p, words);
        if (p.path.front() == "split" && p.a.max == 0 && p.a.script.empty()) return "split needs --max or --script";
        if (p.path.front() == "replay" || p.path.front() == "serve" || (p.path.front() == "monitor" && p.path.back() == "start"))
            return "'" + p.path.front() + "' cannot be replayed";
        for (const auto& s : p.a.opts) key_value(s);
        if (!(p.path.front() == "options" && p.path.back() == "check"))
            for (const auto& s : p.a.sets) key_value(s);
    } catch (const CLI::ParseError& e) {
        return std::string(e.what());
    }
    return std::nullopt;
}

bool is_mutating(const std::vector<std::string>& words) {
    Globals g;
    auto rest = strip_globals(words, g);
    if (rest.empty()) return false;
    static const std::set<std::string> verbs = {"create", "copy", "rename", "delete", "edit", "configure",
                                                "submit", "kill", "split", "merge", "fetch"};
    const auto& v = rest[0];
    if (verbs.count(v)) return true;
    auto second = rest.size() > 1 ? rest[1] : std::string();
    if (v == "monitor") return second == "poll";
    if (v == "components") return second == "configure" || second == "pin" || second == "unpin";
    if (v == "options") return second == "save";
    return false;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliConfig& config) {
    Runner r{{}, {}, {}, config.path_prepend, std::make_shared<PinnableClock>(), out, err};
    auto words = strip_globals(args, r.g);
    if (r.g.store) r.store_root = *r.g.store;
    else if (const char* env = std::getenv("FORGE_STORE"); env && *env) r.store_root = env;
    else if (config.store) r.store_root = *config.store;
    if (r.g.share) r.share_dir = *r.g.share;
    else if (const char* env = std::getenv("FORGE_SHARE"); env && *env) r.share_dir = env;
    else r.share_dir = config.share_dir;
    if (!r.store_root.empty()) r.store_root = fs::absolute(r.store_root);
    if (words.empty()) {
        err << "usage: forge [--store PATH] [--porcelain] <command> ...; try --help\n";
        return 2;
    }
    return r.run(words, std::nullopt, false);
}

}  // namespace forge::tools
