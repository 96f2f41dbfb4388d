#include "forge/backends.hpp"

#include <algorithm>
#include <charconv>

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge {

BackendEnv make_backend_env(fs::path store_root, std::shared_ptr<const ReplicaCatalogue> replicas,
                            std::shared_ptr<const FileTransfer> transfer, std::vector<std::string> path_prepend) {
    BackendEnv env;
    env.store_root = std::move(store_root);
    env.path_prepend = std::move(path_prepend);
    if (replicas) env.resolve_lfn = [replicas](const std::string& lfn) { return replicas->resolve(lfn); };
    if (transfer)
        env.transfer = [transfer](TransferMethod m, const std::string& src, const std::string& dst, const fs::path& sandbox) {
            transfer->transfer(m, src, dst, sandbox);
        };
    return env;
}

std::optional<int> read_exit_file(const fs::path& dir) {
    auto path = dir / ".forge-exit";
    if (!fs::exists(path)) return std::nullopt;
    auto text = std::string(trim(read_file(path)));
    int code = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), code);
    if (ec != std::errc() || ptr != text.data() + text.size()) return 255;
    return code;
}

PollResult status_from_exit(int code) {
    if (code == 0) return {JobStatus::Completed, {}};
    return {JobStatus::Failed, "exit " + std::to_string(code)};
}

namespace {

pid_t parse_pid(const std::string& text, const std::string& job_id) {
    pid_t pid = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), pid);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || pid <= 0)
        throw Error(errc::UnknownTicket, job_id + ": '" + text + "'");
    return pid;
}

PollResult poll_process(const fs::path& dir, pid_t pid) {
    if (fs::exists(dir / ".forge-killed")) return {JobStatus::Killed, {}};
    if (auto code = read_exit_file(dir)) return status_from_exit(*code);
    if (process_alive(pid)) return {JobStatus::Running, {}};
    if (auto code = read_exit_file(dir)) return status_from_exit(*code);
    return {JobStatus::Failed, "lost"};
}

void clear_markers(const fs::path& dir) {
    for (const char* name : {".forge-exit", ".forge-exit.tmp", ".forge-killed", ".forge-pid"}) fs::remove(dir / name);
}

bool has_store_location(const Job& job) {
    for (const auto& in : job.declared_inputs())
        if (in.location.starts_with(kStorePrefix)) return true;
    for (const auto& out : job.declared_outputs())
        if (out.location.starts_with(kStorePrefix)) return true;
    return false;
}

}  // namespace

fs::path HandlerBase::output_dir(const Job& job) const {
    fs::path out = job.output_dir.empty() ? fs::path("output") : fs::path(job.output_dir);
    return out.is_absolute() ? out : job_dir(job) / out;
}

TransferMethod HandlerBase::choose_transfer(const Job& job) const {
    return has_store_location(job) ? TransferMethod::RemoteStore : TransferMethod::LocalCopy;
}

void HandlerBase::configure_job(Job& job) {
    if (job.status != JobStatus::InPreparation)
        throw Error(errc::IllegalTransition, job.id + " is " + std::string(to_string(job.status)) + ", configure needs in-preparation");
    auto script = generate_script(job, dialect());
    std::string jdl = dialect() == Dialect::Jdl ? generate_jdl(job) : std::string();
    for (const auto& in : job.declared_inputs()) {
        if (!in.location.starts_with(kLfnPrefix)) continue;
        if (!env_.resolve_lfn) throw Error(errc::UnresolvedLogicalName, in.location + " (no replica catalogue)");
        env_.resolve_lfn(in.location);
    }
    auto dir = job_dir(job);
    fs::create_directories(dir);
    write_file_atomic(dir / "script.sh", script.text);
    if (dialect() == Dialect::Jdl) write_file_atomic(dir / "jdl.txt", jdl);
    else fs::remove(dir / "jdl.txt");
    job.transfer = std::string(to_string(choose_transfer(job)));
}

void HandlerBase::require_configured(const Job& job) const {
    if (job.transfer.empty() || !fs::exists(job_dir(job) / "script.sh"))
        throw Error(errc::NotConfigured, job.id);
}

void HandlerBase::stage_inputs(const Job& job, const fs::path& dest_input_dir) const {
    if (!env_.transfer) throw Error(errc::BackendUnavailable, "no file transfer available");
    auto method = parse_transfer_method(job.transfer);
    auto dir = job_dir(job);
    fs::create_directories(dest_input_dir);
    for (const auto& in : job.declared_inputs()) {
        auto dst = dest_input_dir / in.name;
        std::string src;
        if (in.location.empty()) {
            src = (dir / "input" / in.name).string();
            if (!fs::exists(src)) throw Error(errc::SourceMissing, src);
            if (fs::path(src) == dst) continue;
        } else if (in.location.starts_with(kLfnPrefix)) {
            if (!env_.resolve_lfn) throw Error(errc::UnresolvedLogicalName, in.location);
            src = env_.resolve_lfn(in.location);
        } else {
            src = in.location;
        }
        env_.transfer(method, src, dst.string(), dir / "sandbox");
    }
}

void HandlerBase::check_killable(const Job& job) const {
    if (is_terminal(job.status)) throw Error(errc::AlreadyTerminal, job.id + " is " + std::string(to_string(job.status)));
    if (!is_active(job.status)) throw Error(errc::IllegalTransition, job.id + " has not been submitted");
}

std::vector<fs::path> HandlerBase::fetch_output(const Job& job) {
    if (!is_terminal(job.status)) throw Error(errc::JobActive, job.id + " is " + std::string(to_string(job.status)));
    if (!env_.transfer) throw Error(errc::BackendUnavailable, "no file transfer available");
    auto method = job.transfer.empty() ? TransferMethod::LocalCopy : parse_transfer_method(job.transfer);
    auto sandbox = job_dir(job) / "sandbox";
    auto src_dir = execution_dir(job) / "output";
    auto dest_dir = output_dir(job);
    fs::create_directories(dest_dir);

    std::vector<OutputFile> files{{"stdout.txt", {}}, {"stderr.txt", {}}};
    for (const auto& out : job.declared_outputs()) files.push_back(out);

    std::vector<fs::path> fetched;
    std::vector<std::string> missing;
    for (const auto& f : files) {
        auto src = src_dir / f.name;
        auto dst = dest_dir / f.name;
        if (fs::exists(src)) {
            if (fs::weakly_canonical(src) != fs::weakly_canonical(dst)) env_.transfer(method, src.string(), dst.string(), sandbox);
        } else if (!fs::exists(dst)) {
            missing.push_back(f.name);
            continue;
        }
        fetched.push_back(dst);
        if (!f.location.empty()) {
            std::string target = f.location;
            if (!target.starts_with(kStorePrefix) && (target.ends_with('/') || fs::is_directory(target)))
                target = (fs::path(target) / f.name).string();
            auto m = target.starts_with(kStorePrefix) && method == TransferMethod::LocalCopy ? TransferMethod::RemoteStore : method;
            env_.transfer(m, dst.string(), target, sandbox);
        }
    }
    if (!missing.empty()) throw Error(errc::MissingOutput, join(missing, ", "));
    return fetched;
}

std::string LocalHandler::submit(Job& job) {
    require_configured(job);
    auto dir = job_dir(job);
    clear_markers(dir);
    stage_inputs(job, dir / "input");
    pid_t pid = launch_detached(dir, exit_capturing_command("script.sh"), payload_env());
    write_file(dir / ".forge-pid", std::to_string(pid) + "\n");
    return std::to_string(pid);
}

PollResult LocalHandler::poll(const Job& job) {
    return poll_process(job_dir(job), parse_pid(job.ticket, job.id));
}

void LocalHandler::kill(const Job& job) {
    check_killable(job);
    pid_t pid = parse_pid(job.ticket, job.id);
    write_file(job_dir(job) / ".forge-killed", "killed\n");
    kill_group(pid);
}

bool satisfies(const ComputingElement& ce, const ResourceRequirements& reqs) {
    for (const auto& r : reqs.entries) {
        if (auto* need = std::get_if<double>(&r.value)) {
            std::string key = r.attribute;
            if (key.size() > 3 && key.starts_with("Min")) key = key.substr(3);
            auto it = ce.attributes.find(key);
            if (it == ce.attributes.end()) return false;
            auto* have = std::get_if<double>(&it->second);
            if (!have || *have < *need) return false;
        } else {
            auto it = ce.attributes.find(r.attribute);
            if (it == ce.attributes.end()) return false;
            auto* have = std::get_if<std::string>(&it->second);
            if (!have || *have != std::get<std::string>(r.value)) return false;
        }
    }
    return true;
}

std::optional<std::size_t> select_ce(const std::vector<ComputingElement>& ces, const std::vector<int>& free_slots,
                                     const ResourceRequirements& reqs) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < ces.size(); ++i) {
        if (!satisfies(ces[i], reqs)) continue;
        int free = i < free_slots.size() ? free_slots[i] : ces[i].slots;
        if (!best) {
            best = i;
            continue;
        }
        int best_free = *best < free_slots.size() ? free_slots[*best] : ces[*best].slots;
        if (free > best_free || (free == best_free && ces[i].name < ces[*best].name)) best = i;
    }
    return best;
}

MockGridHandler::MockGridHandler(BackendEnv env, std::vector<ComputingElement> ces)
    : HandlerBase(std::move(env)), ces_(std::move(ces)) {
    for (const auto& ce : ces_)
        if (ce.name.empty() || ce.name.find('/') != std::string::npos || ce.slots < 1)
            throw Error(errc::ValidationError, "bad computing element '" + ce.name + "'");
}

fs::path MockGridHandler::site_dir(const std::string& ce, const std::string& job_id) const {
    return env_.store_root / "grid" / ce / job_id;
}

namespace {
std::pair<std::string, pid_t> split_grid_ticket(const Job& job) {
    auto colon = job.ticket.rfind(':');
    if (colon == std::string::npos || colon == 0) throw Error(errc::UnknownTicket, job.id + ": '" + job.ticket + "'");
    return {job.ticket.substr(0, colon), parse_pid(job.ticket.substr(colon + 1), job.id)};
}
}  // namespace

fs::path MockGridHandler::execution_dir(const Job& job) const {
    return site_dir(split_grid_ticket(job).first, job.id);
}

std::vector<int> MockGridHandler::free_slots() const {
    std::vector<int> out;
    for (const auto& ce : ces_) {
        int busy = 0;
        auto root = env_.store_root / "grid" / ce.name;
        if (fs::is_directory(root)) {
            for (const auto& site : fs::directory_iterator(root)) {
                auto pid_file = site.path() / ".forge-pid";
                if (!fs::exists(pid_file) || fs::exists(site.path() / ".forge-exit") || fs::exists(site.path() / ".forge-killed"))
                    continue;
                pid_t pid = 0;
                auto text = std::string(trim(read_file(pid_file)));
                std::from_chars(text.data(), text.data() + text.size(), pid);
                if (process_alive(pid)) ++busy;
            }
        }
        out.push_back(ce.slots - busy);
    }
    return out;
}

std::string MockGridHandler::submit(Job& job) {
    require_configured(job);
    if (!env_.transfer) throw Error(errc::BackendUnavailable, "no file transfer available");
    auto dir = job_dir(job);
    auto jdl_path = dir / "jdl.txt";
    if (!fs::exists(jdl_path)) throw Error(errc::NotConfigured, job.id + " has no jdl.txt");
    auto jdl = parse_jdl(read_file(jdl_path));

    std::lock_guard lock(mu_);
    auto idx = select_ce(ces_, free_slots(), jdl.requirements);
    if (!idx) {
        std::vector<std::string> names;
        for (const auto& ce : ces_) names.push_back(ce.name);
        std::vector<std::string> clauses;
        for (const auto& r : jdl.requirements.entries) clauses.push_back(r.attribute + "=" + format_requirement_value(r.value));
        throw Error(errc::MatchFailure, "no computing element satisfies {" + join(clauses, ", ") + "}; candidates: [" +
                                            join(names, ", ") + "]");
    }
    const auto& ce = ces_[*idx];
    auto site = site_dir(ce.name, job.id);
    fs::remove_all(site);
    fs::create_directories(site / "input");

    auto sandbox = dir / "sandbox";
    auto method = parse_transfer_method(job.transfer);
    auto inputs = job.declared_inputs();
    for (const auto& entry : jdl.input_sandbox) {
        if (entry == "script.sh") {
            env_.transfer(method, (dir / "script.sh").string(), (site / "script.sh").string(), sandbox);
            continue;
        }
        auto it = std::find_if(inputs.begin(), inputs.end(), [&](const InputFile& f) { return f.name == entry; });
        if (it == inputs.end()) throw Error(errc::InvalidWorkflow, "InputSandbox lists undeclared file " + entry);
        std::string src;
        if (it->location.empty()) src = (dir / "input" / it->name).string();
        else if (it->location.starts_with(kLfnPrefix)) {
            if (!env_.resolve_lfn) throw Error(errc::UnresolvedLogicalName, it->location);
            src = env_.resolve_lfn(it->location);
        } else src = it->location;
        env_.transfer(method, src, (site / "input" / entry).string(), sandbox);
    }
    pid_t pid = launch_detached(site, exit_capturing_command("script.sh"), payload_env());
    write_file(site / ".forge-pid", std::to_string(pid) + "\n");
    return ce.name + ":" + std::to_string(pid);
}

PollResult MockGridHandler::poll(const Job& job) {
    auto [ce, pid] = split_grid_ticket(job);
    auto site = site_dir(ce, job.id);
    if (!fs::is_directory(site)) throw Error(errc::UnknownTicket, job.id + ": no site " + site.string());
    return poll_process(site, pid);
}

void MockGridHandler::kill(const Job& job) {
    check_killable(job);
    auto [ce, pid] = split_grid_ticket(job);
    auto site = site_dir(ce, job.id);
    if (!fs::is_directory(site)) throw Error(errc::UnknownTicket, job.id + ": no site " + site.string());
    write_file(site / ".forge-killed", "killed\n");
    kill_group(pid);
}

namespace {

std::optional<double> as_number(std::string_view text) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::int64_t as_int(const KvDocument& doc, const std::string& key, std::int64_t fallback, std::int64_t min) {
    auto text = doc.get(key);
    if (!text) return fallback;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
    if (ec != std::errc() || ptr != text->data() + text->size() || v < min)
        throw Error(errc::ParseError, key + ": expected an integer >= " + std::to_string(min));
    return v;
}

}  // namespace

BackendConfig BackendConfig::from_kv(const KvDocument& doc) {
    BackendConfig cfg;
    auto mode = doc.get_or("batchsim.mode", "real");
    if (mode != "real" && mode != "virtual") throw Error(errc::ParseError, "batchsim.mode: expected real or virtual");
    cfg.batchsim_virtual = mode == "virtual";
    if (auto ts = doc.get("batchsim.tick_seconds")) {
        auto v = as_number(*ts);
        if (!v || *v <= 0) throw Error(errc::ParseError, "batchsim.tick_seconds: expected a positive number");
        cfg.tick_seconds = *v;
    }
    for (int i : doc.indices("queue")) {
        auto base = "queue." + std::to_string(i);
        QueueSpec q;
        q.name = doc.get_or(base + ".name", "");
        if (q.name.empty()) throw Error(errc::ParseError, base + ".name missing");
        q.limit_ticks = as_int(doc, base + ".limit_ticks", 3600, 1);
        q.slots = static_cast<int>(as_int(doc, base + ".slots", 1, 1));
        cfg.queues.push_back(q);
    }
    for (int i : doc.indices("ce")) {
        auto base = "ce." + std::to_string(i) + ".";
        ComputingElement ce;
        for (const auto& [key, value] : doc.entries()) {
            if (!key.starts_with(base)) continue;
            auto attr = key.substr(base.size());
            if (attr == "name") ce.name = value;
            else if (attr == "slots") ce.slots = static_cast<int>(as_int(doc, key, 1, 1));
            else if (auto n = as_number(value)) ce.attributes[attr] = *n;
            else ce.attributes[attr] = value;
        }
        if (ce.name.empty()) throw Error(errc::ParseError, base + "name missing");
        cfg.ces.push_back(std::move(ce));
    }
    cfg.replicas = ReplicaCatalogue::from_kv(doc);
    return cfg;
}

}  // namespace forge
