#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "forge/events.hpp"
#include "forge/kv.hpp"
#include "forge/status.hpp"
#include "forge/value.hpp"

namespace forge {

struct Executable {
    std::string name;
    std::vector<std::string> args;
    bool operator==(const Executable&) const = default;
};

struct Parameter {
    std::string name;
    Scalar value;
    bool operator==(const Parameter&) const = default;
};

/// `location` is a filesystem path, a logical name `lfn:<name>`, a remote
/// store key `store:<key>`, or empty when the file is placed in input/ by hand.
struct InputFile {
    std::string name;
    std::string location;
    bool operator==(const InputFile&) const = default;
};

/// `location` is an optional extra destination used by fetch.
struct OutputFile {
    std::string name;
    std::string location;
    bool operator==(const OutputFile&) const = default;
};

using WorkflowElement = std::variant<Executable, Parameter, InputFile, OutputFile>;

struct Workflow {
    std::vector<WorkflowElement> elements;

    std::vector<Executable> executables() const;
    std::vector<InputFile> inputs() const;
    std::vector<OutputFile> outputs() const;
    /// Throws Error(InvalidWorkflow).
    void validate() const;
    bool operator==(const Workflow&) const = default;
};

using RequirementValue = std::variant<double, std::string>;

struct Requirement {
    std::string attribute;
    RequirementValue value;
    bool operator==(const Requirement&) const = default;
};

/// Backend-neutral attribute/value list. Attribute names are unique
/// (case-insensitively, so dialect translations stay injective).
struct ResourceRequirements {
    std::vector<Requirement> entries;

    const Requirement* find(std::string_view attribute) const;
    void validate() const;
    bool operator==(const ResourceRequirements&) const = default;
};

std::string format_requirement_value(const RequirementValue& v);

struct Application {
    std::string image_location;
    std::string name;
    std::string version;
    std::vector<Parameter> parameters;
    std::vector<InputFile> input_files;
    std::vector<OutputFile> output_files;
    std::string handler_id = "generic";

    const Parameter* parameter(std::string_view name) const;
    bool operator==(const Application&) const = default;
};

struct Job {
    std::string id;
    std::string name;
    Workflow workflow;
    ResourceRequirements requirements;
    Application application;
    std::string backend_id = "local";
    JobStatus status = JobStatus::InPreparation;
    std::optional<std::string> parent_id;
    std::vector<std::string> subjob_ids;
    std::string output_dir;
    std::int64_t created_at = 0;
    std::int64_t updated_at = 0;
    // Backend bookkeeping.
    std::string ticket;
    std::string transfer;
    std::string status_reason;

    /// Declared inputs/outputs: workflow files followed by application files.
    std::vector<InputFile> declared_inputs() const;
    std::vector<OutputFile> declared_outputs() const;

    /// Throws Error(InvalidJob) / Error(InvalidWorkflow).
    void validate() const;
    bool operator==(const Job&) const = default;
};

/// Applies a legal status change, bumps updated_at and returns the event.
/// Throws Error(IllegalTransition).
JobEvent transition(Job& job, JobStatus to, std::int64_t now, std::string reason = {});

/// job.meta representation. Keys are written sorted by KvDocument.
KvDocument to_kv(const Job& job);
/// With `require_identity` false (templates) id/status/timestamps may be absent.
/// Throws Error(ParseError) describing the first problem.
Job job_from_kv(const KvDocument& doc, bool require_identity = true);

/// Keys users may not set through template overrides.
bool is_reserved_job_key(std::string_view key);

}  // namespace forge
