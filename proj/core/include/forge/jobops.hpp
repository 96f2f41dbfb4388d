#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forge/bus.hpp"
#include "forge/job.hpp"
#include "forge/registry.hpp"

namespace forge {

/// Workflow templates: job.meta-grammar files named `<id>.meta`, searched
/// in the given directories in order.
class TemplateLibrary {
public:
    explicit TemplateLibrary(std::vector<std::filesystem::path> dirs) : dirs_(std::move(dirs)) {}

    std::vector<std::string> list() const;
    /// Throws UnknownTemplate.
    KvDocument load(const std::string& id) const;

    /// Template defaults, then overrides (job.meta keys; an empty value
    /// removes the key). The result has no identity yet.
    /// Throws UnknownTemplate or InvalidOverride.
    Job instantiate(const std::string& id, const std::map<std::string, std::string>& overrides) const;

private:
    std::vector<std::filesystem::path> dirs_;
};

using Overrides = std::map<std::string, std::string>;

/// Applies overrides to an existing job's key-value form. Throws InvalidOverride.
Job apply_overrides(const Job& job, const Overrides& overrides);

Job create_job(Store& store, const TemplateLibrary& templates, const std::string& template_id,
               const Overrides& overrides, std::int64_t now);
/// Fresh id, InPreparation, same workflow/requirements/application/backend, no outputs.
Job copy_job(Store& store, const std::string& id, std::int64_t now, std::optional<std::string> name = std::nullopt);
/// Throws UnknownJob or JobActive.
void rename_job(Store& store, const std::string& id, const std::string& new_name, std::int64_t now);
/// Removes a job (and its subjobs). Throws UnknownJob or JobActive.
void delete_job(Store& store, const std::string& id);

/// Validates/configures one application type. Registered on the bus under
/// the functional name "app-handler".
class ApplicationHandler : public bus::Component {
public:
    virtual std::string id() const = 0;
    /// Throws Error(ValidationError) when the application is misconfigured.
    virtual void configure(const Job& job) const = 0;
};

/// Passes the application through verbatim.
class GenericApplicationHandler final : public ApplicationHandler {
public:
    std::string id() const override { return "generic"; }
    void configure(const Job&) const override {}
};

/// Handler for the demo counting application: requires a non-empty
/// string parameter "pattern"; optional nbins (integer >= 1) and lo < hi.
class CountDemoHandler final : public ApplicationHandler {
public:
    std::string id() const override { return "count-demo"; }
    void configure(const Job& job) const override;
};

}  // namespace forge
