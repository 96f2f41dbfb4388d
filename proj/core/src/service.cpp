#include "forge/service.hpp"

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge {

namespace {

BackendEnv env_from(const fs::path& store_root, const std::vector<std::string>& path_prepend, bus::ConnectContext& ctx) {
    auto xfer = ctx.dependencies.at("file-transfer");
    auto reps = ctx.dependencies.at("replica-catalogue");
    BackendEnv env;
    env.store_root = store_root;
    env.path_prepend = path_prepend;
    env.resolve_lfn = [reps](const std::string& lfn) {
        return reps.call<ReplicaCatalogue>([&](ReplicaCatalogue& r) { return r.resolve(lfn); });
    };
    env.transfer = [xfer](TransferMethod m, const std::string& src, const std::string& dst, const fs::path& sandbox) {
        xfer.call<FileTransfer>([&](FileTransfer& t) { t.transfer(m, src, dst, sandbox); });
    };
    return env;
}

bus::ParamSpec param(std::string name, std::string_view type, Value def, std::optional<Range> range, std::string doc) {
    return {std::move(name), ValueType::parse(type), std::move(def), range, std::move(doc)};
}

bus::ParamSpec mode_param(bool virtual_mode) {
    auto spec = param("mode", "enum", std::string(virtual_mode ? "virtual" : "real"), std::nullopt,
                      "real runs payloads as processes; virtual runs them on the simulated clock");
    spec.type.choices = {"real", "virtual"};
    return spec;
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)),
      store_(std::make_unique<Store>(options_.store_root)),
      templates_({options_.store_root / "templates", options_.share_dir / "templates"}),
      option_templates_(options_.store_root / "templates" / "options") {
    if (!options_.clock) options_.clock = std::make_shared<SystemClock>();
    if (!options_.sim_clock) options_.sim_clock = options_.clock;
    auto schema_path = options_.share_dir / "schemas" / "demo.schema";
    if (fs::exists(schema_path)) schema_ = OptionSchema::load(schema_path);
    for (const auto& candidate : {options_.store_root / "backends.meta", options_.share_dir / "backends.meta"}) {
        if (fs::exists(candidate)) {
            backend_config_ = BackendConfig::from_kv(KvDocument::load(candidate));
            break;
        }
    }
    event_log_.open(options_.store_root / "events.log", std::ios::app);
    hub_.add_sink([this](const JobEvent& e) {
        std::lock_guard lock(log_mu_);
        event_log_ << format_event(e) << '\n';
        event_log_.flush();
    });
    monitor_ = std::make_shared<Monitor>(
        *store_, hub_, [this](const std::string& backend, const std::function<void(JobHandler&)>& use) { with_handler(backend, use); },
        options_.clock);
    register_components();
    load_component_state();
    bus_.connect("monitor");
}

Service::~Service() {
    monitor_->stop();
    hub_.close_all();
}

void Service::register_components() {
    auto root = options_.store_root;
    auto prepend = options_.path_prepend;
    const std::vector<std::string> handler_deps{"file-transfer", "replica-catalogue"};

    bus_.register_component({"transfer.v1", "transfer", {"file-transfer"}, 0, {}, {}}, [root](bus::ConnectContext&) {
        return std::make_shared<FileTransfer>(RemoteStore(root));
    });
    bus_.register_component({"replicas.v1", "replicas", {"replica-catalogue"}, 0, {}, {}}, [this](bus::ConnectContext&) {
        return std::make_shared<ReplicaCatalogue>(backend_config_.replicas);
    });
    bus_.register_component({"local.v1", "local", {"job-handler"}, 10, {}, handler_deps},
                            [root, prepend](bus::ConnectContext& ctx) {
                                return std::make_shared<LocalHandler>(env_from(root, prepend, ctx));
                            });
    bus_.register_component(
        {"batchsim.v1",
         "batchsim",
         {"job-handler"},
         20,
         {mode_param(backend_config_.batchsim_virtual),
          param("tick_seconds", "real", backend_config_.tick_seconds, Range{0.001, 3600}, "seconds per queue tick in real mode")},
         handler_deps},
        [this, root, prepend](bus::ConnectContext& ctx) {
            BatchSimConfig cfg;
            cfg.queues = backend_config_.queues;
            cfg.virtual_mode = std::get<std::string>(ctx.params.at("mode")) == "virtual";
            cfg.tick_seconds = std::get<double>(ctx.params.at("tick_seconds"));
            cfg.state_path = root / "backends" / "batchsim.state";
            return std::make_shared<BatchSimHandler>(env_from(root, prepend, ctx), cfg, options_.sim_clock);
        });
    bus_.register_component({"mockgrid.v1", "mockgrid", {"job-handler"}, 5, {}, handler_deps},
                            [this, root, prepend](bus::ConnectContext& ctx) {
                                return std::make_shared<MockGridHandler>(env_from(root, prepend, ctx), backend_config_.ces);
                            });
    bus_.register_component({"monitor.v1",
                             "monitor",
                             {"monitor"},
                             0,
                             {param("poll_interval_s", "integer", std::int64_t{Monitor::kDefaultInterval}, Range{1, 3600},
                                    "seconds between background polls")},
                             {}},
                            [this](bus::ConnectContext&) { return monitor_; });
    bus_.register_component({"generic.v1", "generic", {"app-handler"}, 0, {}, {}},
                            [](bus::ConnectContext&) { return std::make_shared<GenericApplicationHandler>(); });
    bus_.register_component({"countdemo.v1", "count-demo", {"app-handler"}, 0, {}, {}},
                            [](bus::ConnectContext&) { return std::make_shared<CountDemoHandler>(); });
}

namespace {

const bus::ParamSpec& find_param(const bus::ComponentDescriptor& d, const std::string& name) {
    for (const auto& p : d.config_params)
        if (p.name == name) return p;
    throw Error(errc::UnknownParam, d.actual_name + "." + name);
}

const bus::ComponentDescriptor& find_descriptor(const std::vector<bus::ComponentInfo>& infos, const std::string& actual) {
    for (const auto& i : infos)
        if (i.descriptor.actual_name == actual) return i.descriptor;
    throw Error(errc::UnknownName, actual);
}

}  // namespace

void Service::load_component_state() {
    auto path = options_.store_root / "components.meta";
    if (!fs::exists(path)) return;
    auto doc = KvDocument::load(path);
    auto infos = bus_.list_components();
    std::map<std::string, bus::ParamValues> configs;
    for (const auto& [key, value] : doc.entries()) {
        if (key.starts_with("pin.")) {
            bus_.pin(key.substr(4), value);
        } else if (key.starts_with("config.")) {
            auto rest = key.substr(7);
            auto dot = rest.rfind('.');
            if (dot == std::string::npos) throw Error(errc::CorruptStore, path.string() + ": bad key " + key);
            auto actual = rest.substr(0, dot);
            const auto& spec = find_param(find_descriptor(infos, actual), rest.substr(dot + 1));
            configs[actual][spec.name] = coerce(spec.type, parse_value(spec.type, value));
        }
    }
    for (const auto& [actual, values] : configs) bus_.configure(actual, values);
}

void Service::save_component_state() {
    KvDocument doc;
    for (const auto& [name, actual] : bus_.pins()) doc.set("pin." + name, actual);
    for (const auto& info : bus_.list_components()) {
        auto values = bus_.params(info.descriptor.actual_name);
        for (const auto& spec : info.descriptor.config_params) {
            auto it = values.find(spec.name);
            if (it != values.end() && !(it->second == spec.default_value))
                doc.set("config." + info.descriptor.actual_name + "." + spec.name, format_literal(it->second));
        }
    }
    write_file_atomic(options_.store_root / "components.meta", doc.serialize("forge component settings"));
}

void Service::configure_component(const std::string& name, const std::map<std::string, std::string>& assignments) {
    auto actual = bus_.select(name);
    auto infos = bus_.list_components();
    const auto& d = find_descriptor(infos, actual);
    bus::ParamValues values;
    for (const auto& [key, text] : assignments) {
        const auto& spec = find_param(d, key);
        values[key] = parse_value(spec.type, text);
    }
    bus_.configure(actual, values);
    save_component_state();
}

void Service::pin_component(const std::string& name, const std::string& actual) {
    bus_.pin(name, actual);
    save_component_state();
}

void Service::unpin_component(const std::string& name) {
    bus_.unpin(name);
    save_component_state();
}

void Service::with_handler(const std::string& backend_id, const std::function<void(JobHandler&)>& use) {
    bus::ComponentHandle h;
    try {
        h = bus_.acquire(backend_id);
    } catch (const Error& e) {
        if (e.name() == errc::UnknownName) throw Error(errc::BackendUnavailable, "no backend '" + backend_id + "'");
        throw;
    }
    if (!h.functional_names().count("job-handler"))
        throw Error(errc::BackendUnavailable, "'" + backend_id + "' is not a job handler");
    h.call<JobHandler>([&](JobHandler& handler) { use(handler); });
}

bus::ComponentHandle Service::resolve_application_handler(const std::string& handler_id) {
    bus::ComponentHandle h;
    try {
        h = bus_.acquire(handler_id);
    } catch (const Error& e) {
        if (e.name() == errc::UnknownName) throw Error(errc::UnknownHandler, handler_id);
        throw;
    }
    if (!h.functional_names().count("app-handler")) throw Error(errc::UnknownHandler, handler_id + " is not an application handler");
    return h;
}

Job Service::create(const std::string& template_id, const Overrides& overrides) {
    return create_job(*store_, templates_, template_id, overrides, now());
}

Job Service::copy(const std::string& id, std::optional<std::string> name) { return copy_job(*store_, id, now(), std::move(name)); }

void Service::rename(const std::string& id, const std::string& name) { rename_job(*store_, id, name, now()); }

void Service::remove(const std::string& id) { delete_job(*store_, id); }

Job Service::patch(const std::string& id, const Overrides& overrides) {
    std::lock_guard lock(store_->writer());
    Job job = store_->load(id);
    if (is_active(job.status)) throw Error(errc::JobActive, id + " is " + std::string(to_string(job.status)));
    if (job.status != JobStatus::InPreparation)
        throw Error(errc::IllegalTransition, id + " is " + std::string(to_string(job.status)));
    Job updated = apply_overrides(job, overrides);
    // Edits invalidate the generated script.
    updated.transfer.clear();
    updated.updated_at = now();
    store_->save(updated);
    return updated;
}

void Service::configure_one(Job& job) {
    if (job.status != JobStatus::InPreparation)
        throw Error(errc::IllegalTransition, job.id + " is " + std::string(to_string(job.status)) + ", configure needs in-preparation");
    resolve_application_handler(job.application.handler_id).call<ApplicationHandler>([&](ApplicationHandler& h) { h.configure(job); });
    with_handler(job.backend_id, [&](JobHandler& h) { h.configure_job(job); });
    job.updated_at = now();
    store_->save(job);
}

Job Service::configure(const std::string& id) {
    std::lock_guard lock(store_->writer());
    Job job = store_->load(id);
    for (const auto& sub_id : job.subjob_ids) {
        Job sub = store_->load(sub_id);
        configure_one(sub);
    }
    configure_one(job);
    return job;
}

void Service::submit_one(Job& job, std::vector<JobEvent>& events) {
    if (job.status != JobStatus::InPreparation)
        throw Error(errc::IllegalTransition, job.id + " is " + std::string(to_string(job.status)));
    bool configured = !job.transfer.empty() && fs::exists(store_->job_dir(job.id) / "script.sh");
    if (!configured) configure_one(job);
    std::string ticket;
    with_handler(job.backend_id, [&](JobHandler& h) { ticket = h.submit(job); });
    job.ticket = ticket;
    events.push_back(transition(job, JobStatus::Submitted, now()));
    store_->save(job);
}

Job Service::submit(const std::string& id) {
    std::vector<JobEvent> events;
    Job result;
    {
        std::lock_guard lock(store_->writer());
        Job job = store_->load(id);
        try {
            if (!job.subjob_ids.empty()) {
                bool any = false;
                for (const auto& sub_id : job.subjob_ids) {
                    Job sub = store_->load(sub_id);
                    if (sub.status != JobStatus::InPreparation) continue;
                    submit_one(sub, events);
                    any = true;
                }
                if (!any) throw Error(errc::IllegalTransition, id + ": no subjob is in preparation");
                auto up = rollup_parent(*store_, id, now());
                events.insert(events.end(), up.begin(), up.end());
            } else {
                submit_one(job, events);
                if (job.parent_id) {
                    auto up = rollup_parent(*store_, *job.parent_id, now());
                    events.insert(events.end(), up.begin(), up.end());
                }
            }
        } catch (...) {
            publish(events);
            throw;
        }
        result = store_->load(id);
    }
    publish(events);
    return result;
}

Job Service::kill(const std::string& id) {
    std::vector<JobEvent> events;
    Job result;
    {
        std::lock_guard lock(store_->writer());
        Job job = store_->load(id);
        auto kill_one = [&](Job& j) {
            with_handler(j.backend_id, [&](JobHandler& h) { h.kill(j); });
            events.push_back(transition(j, JobStatus::Killed, now()));
            store_->save(j);
        };
        if (!job.subjob_ids.empty()) {
            bool any = false;
            for (const auto& sub_id : job.subjob_ids) {
                Job sub = store_->load(sub_id);
                if (!is_active(sub.status)) continue;
                kill_one(sub);
                any = true;
            }
            if (!any) {
                if (is_terminal(job.status)) throw Error(errc::AlreadyTerminal, id + " is " + std::string(to_string(job.status)));
                throw Error(errc::IllegalTransition, id + ": no subjob is active");
            }
            auto up = rollup_parent(*store_, id, now());
            events.insert(events.end(), up.begin(), up.end());
        } else {
            if (is_terminal(job.status)) throw Error(errc::AlreadyTerminal, id + " is " + std::string(to_string(job.status)));
            if (!is_active(job.status)) throw Error(errc::IllegalTransition, id + " has not been submitted");
            kill_one(job);
            if (job.parent_id) {
                auto up = rollup_parent(*store_, *job.parent_id, now());
                events.insert(events.end(), up.begin(), up.end());
            }
        }
        result = store_->load(id);
    }
    publish(events);
    return result;
}

std::vector<fs::path> Service::fetch(const std::string& id) {
    Job job = store_->load(id);
    std::vector<fs::path> out;
    if (job.subjob_ids.empty()) {
        with_handler(job.backend_id, [&](JobHandler& h) { out = h.fetch_output(job); });
        return out;
    }
    std::vector<std::string> missing;
    for (const auto& sub_id : job.subjob_ids) {
        Job sub = store_->load(sub_id);
        if (!is_terminal(sub.status)) throw Error(errc::SubjobsActive, sub_id + " is " + std::string(to_string(sub.status)));
        try {
            with_handler(sub.backend_id, [&](JobHandler& h) {
                auto files = h.fetch_output(sub);
                out.insert(out.end(), files.begin(), files.end());
            });
        } catch (const Error& e) {
            if (e.name() != errc::MissingOutput) throw;
            missing.push_back(sub_id + ": " + e.detail());
        }
    }
    if (!missing.empty()) throw Error(errc::MissingOutput, join(missing, "; "));
    return out;
}

std::vector<Job> Service::split(const std::string& id, int max_files) {
    return split_by_input_files(*store_, id, max_files, now());
}

std::vector<Job> Service::split_with_script(const std::string& id, const fs::path& script,
                                            const std::map<std::string, std::string>& options) {
    return split_by_script(*store_, id, script, options, now());
}

MergeReport Service::merge(const std::string& id) { return collect_outputs(*store_, id); }

}  // namespace forge
