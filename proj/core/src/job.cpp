#include "forge/job.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge {

namespace {

template <class T>
std::vector<T> collect(const std::vector<WorkflowElement>& elements) {
    std::vector<T> out;
    for (const auto& e : elements)
        if (auto* p = std::get_if<T>(&e)) out.push_back(*p);
    return out;
}

bool valid_file_name(std::string_view name) {
    return !name.empty() && name.find('/') == std::string_view::npos && name != "." && name != "..";
}

bool valid_attribute(std::string_view a) {
    if (a.empty()) return false;
    for (char c : a)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

std::string_view scalar_type_name(const Scalar& s) {
    switch (s.index()) {
        case 0: return "boolean";
        case 1: return "integer";
        case 2: return "real";
        default: return "string";
    }
}

Scalar read_scalar(const KvDocument& doc, const std::string& prefix) {
    auto type = doc.get_or(prefix + ".type", "string");
    auto kind = ValueType::parse(type).kind;
    auto raw = doc.get_or(prefix + ".value", "");
    if (kind == ValueKind::String) return raw;
    return parse_scalar(kind, raw);
}

void write_scalar(KvDocument& doc, const std::string& prefix, const Scalar& v) {
    doc.set(prefix + ".type", std::string(scalar_type_name(v)));
    doc.set(prefix + ".value", format_plain(v));
}

std::int64_t read_int(const KvDocument& doc, std::string_view key, std::int64_t fallback) {
    auto v = doc.get(key);
    if (!v) return fallback;
    std::int64_t out{};
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size())
        throw Error(errc::ParseError, "key '" + std::string(key) + "' is not an integer");
    return out;
}

void write_params(KvDocument& doc, const std::string& prefix, const std::vector<Parameter>& params) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = prefix + "." + std::to_string(i);
        doc.set(p + ".name", params[i].name);
        write_scalar(doc, p, params[i].value);
    }
}

template <class File>
void write_files(KvDocument& doc, const std::string& prefix, const std::vector<File>& files) {
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto p = prefix + "." + std::to_string(i);
        doc.set(p + ".name", files[i].name);
        if (!files[i].location.empty()) doc.set(p + ".location", files[i].location);
    }
}

template <class File>
std::vector<File> read_files(const KvDocument& doc, const std::string& prefix) {
    std::vector<File> out;
    for (int i : doc.indices(prefix)) {
        auto p = prefix + "." + std::to_string(i);
        out.push_back(File{doc.at(p + ".name"), doc.get_or(p + ".location", "")});
    }
    return out;
}

}  // namespace

std::vector<Executable> Workflow::executables() const { return collect<Executable>(elements); }
std::vector<InputFile> Workflow::inputs() const { return collect<InputFile>(elements); }
std::vector<OutputFile> Workflow::outputs() const { return collect<OutputFile>(elements); }

void Workflow::validate() const {
    bool has_exe = false;
    std::set<std::string> inputs, outputs;
    for (const auto& e : elements) {
        if (auto* x = std::get_if<Executable>(&e)) {
            if (trim(x->name).empty()) throw Error(errc::InvalidWorkflow, "executable with empty name");
            has_exe = true;
        } else if (auto* p = std::get_if<Parameter>(&e)) {
            if (!valid_attribute(p->name)) throw Error(errc::InvalidWorkflow, "bad parameter name '" + p->name + "'");
        } else if (auto* in = std::get_if<InputFile>(&e)) {
            if (!valid_file_name(in->name)) throw Error(errc::InvalidWorkflow, "bad input file name '" + in->name + "'");
            if (!inputs.insert(in->name).second)
                throw Error(errc::InvalidWorkflow, "duplicate input file '" + in->name + "'");
        } else if (auto* out = std::get_if<OutputFile>(&e)) {
            if (!valid_file_name(out->name))
                throw Error(errc::InvalidWorkflow, "bad output file name '" + out->name + "'");
            if (!outputs.insert(out->name).second)
                throw Error(errc::InvalidWorkflow, "duplicate output file '" + out->name + "'");
        }
    }
    if (!has_exe) throw Error(errc::InvalidWorkflow, "workflow has no executable");
}

const Requirement* ResourceRequirements::find(std::string_view attribute) const {
    for (const auto& r : entries)
        if (r.attribute == attribute) return &r;
    return nullptr;
}

void ResourceRequirements::validate() const {
    std::set<std::string> seen;
    for (const auto& r : entries) {
        if (!valid_attribute(r.attribute))
            throw Error(errc::InvalidJob, "bad requirement attribute '" + r.attribute + "'");
        if (!seen.insert(to_lower(r.attribute)).second)
            throw Error(errc::InvalidJob, "duplicate requirement attribute '" + r.attribute + "'");
        if (auto* s = std::get_if<std::string>(&r.value); s && s->find('"') != std::string::npos)
            throw Error(errc::InvalidJob, "requirement value may not contain '\"'");
    }
}

std::string format_requirement_value(const RequirementValue& v) {
    if (auto* d = std::get_if<double>(&v)) return format_number(*d);
    return std::get<std::string>(v);
}

const Parameter* Application::parameter(std::string_view n) const {
    for (const auto& p : parameters)
        if (p.name == n) return &p;
    return nullptr;
}

std::vector<InputFile> Job::declared_inputs() const {
    auto out = workflow.inputs();
    out.insert(out.end(), application.input_files.begin(), application.input_files.end());
    return out;
}

std::vector<OutputFile> Job::declared_outputs() const {
    auto out = workflow.outputs();
    out.insert(out.end(), application.output_files.begin(), application.output_files.end());
    return out;
}

void Job::validate() const {
    workflow.validate();
    requirements.validate();
    if (name.empty()) throw Error(errc::InvalidJob, "job name is empty");
    if (name.find('\n') != std::string::npos) throw Error(errc::InvalidJob, "job name contains a newline");
    if (application.name.empty() || application.version.empty())
        throw Error(errc::InvalidJob, "application name and version are required");
    if (application.handler_id.empty()) throw Error(errc::InvalidJob, "application handler is required");
    if (backend_id.empty()) throw Error(errc::InvalidJob, "backend is required");
    for (const auto& p : application.parameters)
        if (!valid_attribute(p.name)) throw Error(errc::InvalidJob, "bad application parameter '" + p.name + "'");
    for (const auto& f : application.input_files)
        if (!valid_file_name(f.name)) throw Error(errc::InvalidJob, "bad application input '" + f.name + "'");
    for (const auto& f : application.output_files)
        if (!valid_file_name(f.name)) throw Error(errc::InvalidJob, "bad application output '" + f.name + "'");
}

JobEvent transition(Job& job, JobStatus to, std::int64_t now, std::string reason) {
    if (!is_legal_transition(job.status, to)) {
        throw Error(errc::IllegalTransition, job.id + ": " + std::string(to_string(job.status)) + " -> " +
                                                 std::string(to_string(to)));
    }
    JobEvent e{job.id, job.status, to, now, std::move(reason)};
    job.status = to;
    job.updated_at = now;
    job.status_reason = e.reason;
    return e;
}

KvDocument to_kv(const Job& job) {
    KvDocument doc;
    doc.set("id", job.id);
    doc.set("name", job.name);
    doc.set("backend", job.backend_id);
    doc.set("status", std::string(to_string(job.status)));
    doc.set("created_at", std::to_string(job.created_at));
    doc.set("updated_at", std::to_string(job.updated_at));
    doc.set("output_dir", job.output_dir);
    if (job.parent_id) doc.set("parent", *job.parent_id);
    doc.set_list("subjob", job.subjob_ids);
    if (!job.ticket.empty()) doc.set("ticket", job.ticket);
    if (!job.transfer.empty()) doc.set("transfer", job.transfer);
    if (!job.status_reason.empty()) doc.set("reason", job.status_reason);

    for (std::size_t i = 0; i < job.workflow.elements.size(); ++i) {
        auto p = "element." + std::to_string(i);
        std::visit(
            [&](const auto& el) {
                using T = std::decay_t<decltype(el)>;
                doc.set(p + ".name", el.name);
                if constexpr (std::is_same_v<T, Executable>) {
                    doc.set(p + ".kind", "executable");
                    doc.set_list(p + ".arg", el.args);
                } else if constexpr (std::is_same_v<T, Parameter>) {
                    doc.set(p + ".kind", "parameter");
                    write_scalar(doc, p, el.value);
                } else {
                    doc.set(p + ".kind", std::is_same_v<T, InputFile> ? "input" : "output");
                    if (!el.location.empty()) doc.set(p + ".location", el.location);
                }
            },
            job.workflow.elements[i]);
    }
    for (std::size_t i = 0; i < job.requirements.entries.size(); ++i) {
        auto p = "requirement." + std::to_string(i);
        const auto& r = job.requirements.entries[i];
        doc.set(p + ".attribute", r.attribute);
        doc.set(p + ".type", std::holds_alternative<double>(r.value) ? "number" : "string");
        doc.set(p + ".value", format_requirement_value(r.value));
    }
    const auto& app = job.application;
    doc.set("application.image", app.image_location);
    doc.set("application.name", app.name);
    doc.set("application.version", app.version);
    doc.set("application.handler", app.handler_id);
    write_params(doc, "application.param", app.parameters);
    write_files(doc, "application.input", app.input_files);
    write_files(doc, "application.output", app.output_files);
    return doc;
}

Job job_from_kv(const KvDocument& doc, bool require_identity) {
    Job job;
    try {
        if (require_identity) {
            job.id = doc.at("id");
            job.status = parse_status(doc.at("status"));
            job.created_at = read_int(doc, "created_at", 0);
            job.updated_at = read_int(doc, "updated_at", 0);
            if (!doc.contains("updated_at") || !doc.contains("created_at"))
                throw Error(errc::ParseError, "missing timestamps");
        } else {
            job.id = doc.get_or("id", "");
            if (auto s = doc.get("status")) job.status = parse_status(*s);
        }
        job.name = doc.get_or("name", "");
        job.backend_id = doc.get_or("backend", "local");
        job.output_dir = doc.get_or("output_dir", "");
        if (auto p = doc.get("parent")) job.parent_id = *p;
        job.subjob_ids = doc.list("subjob");
        job.ticket = doc.get_or("ticket", "");
        job.transfer = doc.get_or("transfer", "");
        job.status_reason = doc.get_or("reason", "");

        for (int i : doc.indices("element")) {
            auto p = "element." + std::to_string(i);
            const auto& kind = doc.at(p + ".kind");
            const auto& name = doc.at(p + ".name");
            if (kind == "executable") {
                job.workflow.elements.emplace_back(Executable{name, doc.list(p + ".arg")});
            } else if (kind == "parameter") {
                job.workflow.elements.emplace_back(Parameter{name, read_scalar(doc, p)});
            } else if (kind == "input") {
                job.workflow.elements.emplace_back(InputFile{name, doc.get_or(p + ".location", "")});
            } else if (kind == "output") {
                job.workflow.elements.emplace_back(OutputFile{name, doc.get_or(p + ".location", "")});
            } else {
                throw Error(errc::ParseError, "unknown element kind '" + kind + "' at " + p);
            }
        }
        for (int i : doc.indices("requirement")) {
            auto p = "requirement." + std::to_string(i);
            Requirement r;
            r.attribute = doc.at(p + ".attribute");
            const auto& value = doc.at(p + ".value");
            if (doc.get_or(p + ".type", "string") == "number")
                r.value = std::get<double>(parse_scalar(ValueKind::Real, value));
            else
                r.value = value;
            job.requirements.entries.push_back(std::move(r));
        }
        auto& app = job.application;
        app.image_location = doc.get_or("application.image", "");
        app.name = doc.get_or("application.name", "");
        app.version = doc.get_or("application.version", "");
        app.handler_id = doc.get_or("application.handler", "generic");
        for (int i : doc.indices("application.param")) {
            auto p = "application.param." + std::to_string(i);
            app.parameters.push_back(Parameter{doc.at(p + ".name"), read_scalar(doc, p)});
        }
        app.input_files = read_files<InputFile>(doc, "application.input");
        app.output_files = read_files<OutputFile>(doc, "application.output");
    } catch (const Error& e) {
        if (e.name() == errc::ParseError) throw;
        throw Error(errc::ParseError, e.detail());
    }
    return job;
}

bool is_reserved_job_key(std::string_view key) {
    static const std::set<std::string, std::less<>> reserved = {
        "id", "status", "created_at", "updated_at", "parent", "ticket", "transfer", "reason"};
    return reserved.count(key) > 0 || key.starts_with("subjob.");
}

}  // namespace forge
