#include "forge/registry.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "forge/error.hpp"

namespace forge {

namespace {

std::int64_t numeric_id(std::string_view id) {
    if (id.size() < 2 || id.front() != 'j') return -1;
    std::int64_t n = -1;
    auto [p, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), n);
    return ec == std::errc{} && p == id.data() + id.size() ? n : -1;
}

}  // namespace

std::string_view to_string(Finding::Kind kind) {
    switch (kind) {
        case Finding::Kind::MissingDirectory: return "MissingDirectory";
        case Finding::Kind::MissingMeta: return "MissingMeta";
        case Finding::Kind::CorruptMeta: return "CorruptMeta";
        case Finding::Kind::StatusMismatch: return "StatusMismatch";
        case Finding::Kind::NameMismatch: return "NameMismatch";
        case Finding::Kind::UncataloguedJob: return "UncataloguedJob";
        case Finding::Kind::StaleNextId: return "StaleNextId";
    }
    return "?";
}

Store::Store(std::filesystem::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "jobs");
    refresh();
}

void Store::refresh() {
    std::lock_guard lock(cat_mu_);
    catalogue_.clear();
    next_id_ = 1;
    if (!fs::exists(catalogue_path())) return;
    try {
        auto doc = KvDocument::load(catalogue_path());
        next_id_ = std::stoll(doc.get_or("next_id", "1"));
        for (const auto& [key, value] : doc.entries()) {
            if (!key.starts_with("job.") || !key.ends_with(".status")) continue;
            std::string id = key.substr(4, key.size() - 4 - 7);
            CatalogueRow row;
            row.id = id;
            row.name = doc.at("job." + id + ".name");
            row.status = parse_status(value);
            row.backend = doc.get_or("job." + id + ".backend", "");
            row.updated_at = std::stoll(doc.get_or("job." + id + ".updated_at", "0"));
            catalogue_.emplace(id, std::move(row));
        }
    } catch (const Error& e) {
        throw Error(errc::CorruptStore, catalogue_path().string() + ": " + e.detail());
    } catch (const std::exception& e) {
        throw Error(errc::CorruptStore, catalogue_path().string() + ": " + e.what());
    }
}

std::filesystem::path Store::job_dir(const std::string& id) const { return root_ / "jobs" / id; }
std::filesystem::path Store::meta_path(const std::string& id) const { return job_dir(id) / "job.meta"; }

std::int64_t Store::next_id() const {
    std::lock_guard lock(cat_mu_);
    return next_id_;
}

std::string Store::allocate_id() {
    std::lock_guard wlock(writer_);
    std::string id;
    {
        std::lock_guard lock(cat_mu_);
        char buf[32];
        std::snprintf(buf, sizeof buf, "j%06lld", static_cast<long long>(next_id_));
        id = buf;
        ++next_id_;
    }
    write_catalogue_locked();
    return id;
}

void Store::write_catalogue_locked() {
    KvDocument doc;
    {
        std::lock_guard lock(cat_mu_);
        doc.set("next_id", std::to_string(next_id_));
        for (const auto& [id, row] : catalogue_) {
            doc.set("job." + id + ".name", row.name);
            doc.set("job." + id + ".status", std::string(to_string(row.status)));
            doc.set("job." + id + ".backend", row.backend);
            doc.set("job." + id + ".updated_at", std::to_string(row.updated_at));
        }
    }
    write_file_atomic(catalogue_path(), doc.serialize("forge job catalogue"), hook_);
}

void Store::save(const Job& job) {
    job.validate();
    std::lock_guard wlock(writer_);
    auto dir = job_dir(job.id);
    for (const char* sub : {"input", "output", "sandbox"}) fs::create_directories(dir / sub);
    write_file_atomic(meta_path(job.id), to_kv(job).serialize("forge job"), hook_);
    {
        std::lock_guard lock(cat_mu_);
        catalogue_[job.id] = CatalogueRow{job.id, job.name, job.status, job.backend_id, job.updated_at};
        auto n = numeric_id(job.id);
        if (n >= next_id_) next_id_ = n + 1;
    }
    write_catalogue_locked();
}

Job Store::load(const std::string& id) const {
    auto path = meta_path(id);
    {
        std::lock_guard lock(cat_mu_);
        if (!catalogue_.count(id) && !fs::exists(path)) throw Error(errc::UnknownJob, id);
    }
    if (!fs::exists(path)) throw Error(errc::UnknownJob, id + " (no " + path.string() + ")");
    try {
        auto job = job_from_kv(KvDocument::load(path));
        if (job.id != id) throw Error(errc::ParseError, "id field is '" + job.id + "'");
        return job;
    } catch (const Error& e) {
        throw Error(errc::CorruptStore, path.string() + ": " + e.detail());
    }
}

bool Store::exists(const std::string& id) const {
    std::lock_guard lock(cat_mu_);
    return catalogue_.count(id) > 0;
}

std::vector<CatalogueRow> Store::list(std::optional<JobStatus> filter) const {
    std::lock_guard lock(cat_mu_);
    std::vector<CatalogueRow> out;
    for (const auto& [id, row] : catalogue_)
        if (!filter || row.status == *filter) out.push_back(row);
    return out;
}

void Store::remove(const std::string& id) {
    std::lock_guard wlock(writer_);
    {
        std::lock_guard lock(cat_mu_);
        if (!catalogue_.erase(id)) throw Error(errc::UnknownJob, id);
    }
    write_catalogue_locked();
    std::error_code ec;
    fs::remove_all(job_dir(id), ec);
}

std::vector<Finding> Store::fsck() const {
    std::vector<Finding> out;
    std::map<std::string, CatalogueRow> cat;
    std::int64_t next = 0;
    {
        std::lock_guard lock(cat_mu_);
        cat = catalogue_;
        next = next_id_;
    }
    for (const auto& [id, row] : cat) {
        if (numeric_id(id) >= next) out.push_back({Finding::Kind::StaleNextId, id, "next_id " + std::to_string(next)});
        if (!fs::is_directory(job_dir(id))) {
            out.push_back({Finding::Kind::MissingDirectory, id, job_dir(id).string()});
            continue;
        }
        if (!fs::exists(meta_path(id))) {
            out.push_back({Finding::Kind::MissingMeta, id, meta_path(id).string()});
            continue;
        }
        try {
            auto job = load(id);
            if (job.status != row.status)
                out.push_back({Finding::Kind::StatusMismatch, id,
                               "catalogue " + std::string(to_string(row.status)) + ", meta " +
                                   std::string(to_string(job.status))});
            if (job.name != row.name)
                out.push_back({Finding::Kind::NameMismatch, id, "catalogue '" + row.name + "', meta '" + job.name + "'"});
        } catch (const Error& e) {
            out.push_back({Finding::Kind::CorruptMeta, id, e.detail()});
        }
    }
    if (fs::is_directory(root_ / "jobs")) {
        std::vector<std::string> on_disk;
        for (const auto& entry : fs::directory_iterator(root_ / "jobs"))
            if (entry.is_directory()) on_disk.push_back(entry.path().filename().string());
        std::sort(on_disk.begin(), on_disk.end());
        for (const auto& id : on_disk)
            if (!cat.count(id)) out.push_back({Finding::Kind::UncataloguedJob, id, job_dir(id).string()});
    }
    return out;
}

}  // namespace forge
