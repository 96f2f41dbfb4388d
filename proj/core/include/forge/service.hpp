#pragma once

#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forge/backends.hpp"
#include "forge/bus.hpp"
#include "forge/clock.hpp"
#include "forge/events.hpp"
#include "forge/jobops.hpp"
#include "forge/monitor.hpp"
#include "forge/optedit.hpp"
#include "forge/registry.hpp"
#include "forge/splitmerge.hpp"

namespace forge {

struct ServiceOptions {
    fs::path store_root;
    /// Shipped assets: templates/, schemas/, splitters/, backends.meta.
    fs::path share_dir;
    /// Prepended to payload PATH (where countapp lives).
    std::vector<std::string> path_prepend;
    /// Timestamps for jobs and events. Defaults to the system clock.
    std::shared_ptr<const Clock> clock;
    /// Virtual clock for batchsim in virtual mode. Defaults to `clock`.
    std::shared_ptr<const Clock> sim_clock;
};

/// The common API behind the CLI and the HTTP service. Every operation is
/// a thin composition of module operations; job mutations go through the
/// store's writer lock and publish their events.
class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Store& store() { return *store_; }
    bus::Bus& bus() { return bus_; }
    EventHub& events() { return hub_; }
    Monitor& monitor() { return *monitor_; }
    const TemplateLibrary& templates() const { return templates_; }
    const OptionSchema& schema() const { return schema_; }
    const OptionTemplates& option_templates() const { return option_templates_; }
    const BackendConfig& backend_config() const { return backend_config_; }
    const ServiceOptions& options() const { return options_; }
    std::int64_t now() const { return options_.clock->now(); }

    Job create(const std::string& template_id, const Overrides& overrides);
    Job copy(const std::string& id, std::optional<std::string> name = std::nullopt);
    void rename(const std::string& id, const std::string& name);
    void remove(const std::string& id);
    /// Applies job.meta key overrides to an in-preparation job.
    Job patch(const std::string& id, const Overrides& overrides);
    Job get(const std::string& id) { return store_->load(id); }
    std::vector<CatalogueRow> list(std::optional<JobStatus> filter = std::nullopt) { return store_->list(filter); }

    /// Application handler check, then the job handler's configure. A split
    /// parent configures every subjob.
    Job configure(const std::string& id);
    /// Configures first when needed. A split parent submits its subjobs.
    Job submit(const std::string& id);
    Job kill(const std::string& id);
    std::vector<fs::path> fetch(const std::string& id);
    std::vector<Job> split(const std::string& id, int max_files);
    std::vector<Job> split_with_script(const std::string& id, const fs::path& script,
                                       const std::map<std::string, std::string>& options);
    MergeReport merge(const std::string& id);
    std::vector<JobEvent> poll() { return monitor_->poll_once(); }

    /// Throws BackendUnavailable.
    void with_handler(const std::string& backend_id, const std::function<void(JobHandler&)>& use);
    /// Throws UnknownHandler.
    bus::ComponentHandle resolve_application_handler(const std::string& handler_id);

    /// Component management; configuration and pins persist in components.meta.
    void configure_component(const std::string& name, const std::map<std::string, std::string>& assignments);
    void pin_component(const std::string& name, const std::string& actual);
    void unpin_component(const std::string& name);

    fs::path default_splitter() const { return options_.share_dir / "splitters" / "by-files.sh"; }

private:
    void register_components();
    void load_component_state();
    void save_component_state();
    void submit_one(Job& job, std::vector<JobEvent>& events);
    void configure_one(Job& job);
    void publish(const std::vector<JobEvent>& events) { hub_.publish(events); }

    ServiceOptions options_;
    std::unique_ptr<Store> store_;
    EventHub hub_;
    TemplateLibrary templates_;
    OptionSchema schema_;
    OptionTemplates option_templates_;
    BackendConfig backend_config_;
    std::shared_ptr<Monitor> monitor_;
    bus::Bus bus_;
    std::mutex log_mu_;
    std::ofstream event_log_;
};

}  // namespace forge
