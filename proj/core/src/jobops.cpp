#include "forge/jobops.hpp"

#include <algorithm>

#include "forge/error.hpp"

namespace forge {

std::vector<std::string> TemplateLibrary::list() const {
    std::vector<std::string> out;
    for (const auto& dir : dirs_) {
        if (!fs::is_directory(dir)) continue;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() != ".meta") continue;
            auto id = entry.path().stem().string();
            if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

KvDocument TemplateLibrary::load(const std::string& id) const {
    if (id.empty() || id.find('/') != std::string::npos) throw Error(errc::UnknownTemplate, id);
    for (const auto& dir : dirs_) {
        auto path = dir / (id + ".meta");
        if (fs::exists(path)) return KvDocument::load(path);
    }
    throw Error(errc::UnknownTemplate, id);
}

Job apply_overrides(const Job& job, const Overrides& overrides) {
    KvDocument doc = to_kv(job);
    for (const auto& [key, value] : overrides) {
        if (key.empty() || is_reserved_job_key(key)) throw Error(errc::InvalidOverride, "key '" + key + "' is not settable");
        if (value.empty()) doc.erase_prefix(key);
        else doc.set(key, value);
    }
    try {
        Job out = job_from_kv(doc, false);
        out.validate();
        return out;
    } catch (const Error& e) {
        throw Error(errc::InvalidOverride, e.detail());
    }
}

Job TemplateLibrary::instantiate(const std::string& id, const Overrides& overrides) const {
    KvDocument doc = load(id);
    for (const auto& [key, value] : overrides) {
        if (key.empty() || is_reserved_job_key(key)) throw Error(errc::InvalidOverride, "key '" + key + "' is not settable");
        if (value.empty()) doc.erase_prefix(key);
        else doc.set(key, value);
    }
    Job job;
    try {
        job = job_from_kv(doc, false);
        if (job.name.empty()) job.name = id;
        job.validate();
    } catch (const Error& e) {
        throw Error(overrides.empty() ? errc::InvalidJob : errc::InvalidOverride, "template " + id + ": " + e.detail());
    }
    return job;
}

Job create_job(Store& store, const TemplateLibrary& templates, const std::string& template_id,
               const Overrides& overrides, std::int64_t now) {
    Job job = templates.instantiate(template_id, overrides);
    std::lock_guard lock(store.writer());
    job.id = store.allocate_id();
    job.status = JobStatus::InPreparation;
    if (job.output_dir.empty()) job.output_dir = "output";
    job.created_at = job.updated_at = now;
    store.save(job);
    return job;
}

Job copy_job(Store& store, const std::string& id, std::int64_t now, std::optional<std::string> name) {
    std::lock_guard lock(store.writer());
    Job src = store.load(id);
    Job job = src;
    job.id = store.allocate_id();
    job.name = name.value_or(src.name + "-copy");
    job.status = JobStatus::InPreparation;
    job.parent_id.reset();
    job.subjob_ids.clear();
    job.output_dir = "output";
    job.ticket.clear();
    job.transfer.clear();
    job.status_reason.clear();
    job.created_at = job.updated_at = now;
    store.save(job);
    return job;
}

void rename_job(Store& store, const std::string& id, const std::string& new_name, std::int64_t now) {
    std::lock_guard lock(store.writer());
    Job job = store.load(id);
    if (is_active(job.status)) throw Error(errc::JobActive, id + " is " + std::string(to_string(job.status)));
    job.name = new_name;
    job.updated_at = now;
    store.save(job);
}

void delete_job(Store& store, const std::string& id) {
    std::lock_guard lock(store.writer());
    Job job = store.load(id);
    if (is_active(job.status)) throw Error(errc::JobActive, id + " is " + std::string(to_string(job.status)));
    for (const auto& sub : job.subjob_ids) {
        if (!store.exists(sub)) continue;
        if (is_active(store.load(sub).status)) throw Error(errc::JobActive, "subjob " + sub + " is active");
    }
    for (const auto& sub : job.subjob_ids)
        if (store.exists(sub)) store.remove(sub);
    if (job.parent_id && store.exists(*job.parent_id)) {
        Job parent = store.load(*job.parent_id);
        std::erase(parent.subjob_ids, id);
        store.save(parent);
    }
    store.remove(id);
}

void CountDemoHandler::configure(const Job& job) const {
    const auto& app = job.application;
    auto* pattern = app.parameter("pattern");
    if (!pattern) throw Error(errc::ValidationError, "count-demo: missing parameter 'pattern'");
    auto* text = std::get_if<std::string>(&pattern->value);
    if (!text || text->empty()) throw Error(errc::ValidationError, "count-demo: 'pattern' must be a non-empty string");
    double lo = 0, hi = 100;
    if (auto* nbins = app.parameter("nbins")) {
        auto* n = std::get_if<std::int64_t>(&nbins->value);
        if (!n || *n < 1) throw Error(errc::ValidationError, "count-demo: 'nbins' must be an integer >= 1");
    }
    auto number = [&](const char* name, double& out) {
        if (auto* p = app.parameter(name)) {
            if (auto* i = std::get_if<std::int64_t>(&p->value)) out = static_cast<double>(*i);
            else if (auto* d = std::get_if<double>(&p->value)) out = *d;
            else throw Error(errc::ValidationError, std::string("count-demo: '") + name + "' must be numeric");
        }
    };
    number("lo", lo);
    number("hi", hi);
    if (!(lo < hi)) throw Error(errc::ValidationError, "count-demo: requires lo < hi");
}

}  // namespace forge
