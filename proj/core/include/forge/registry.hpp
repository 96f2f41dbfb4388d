#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forge/fsutil.hpp"
#include "forge/job.hpp"

namespace forge {

struct CatalogueRow {
    std::string id;
    std::string name;
    JobStatus status = JobStatus::InPreparation;
    std::string backend;
    std::int64_t updated_at = 0;
    bool operator==(const CatalogueRow&) const = default;
};

struct Finding {
    enum class Kind { MissingDirectory, MissingMeta, CorruptMeta, StatusMismatch, NameMismatch, UncataloguedJob, StaleNextId };
    Kind kind;
    std::string job_id;
    std::string detail;
};

std::string_view to_string(Finding::Kind kind);

/// Persistent job registry.
///
/// Layout: `<root>/catalogue.meta` and `<root>/jobs/<id>/{job.meta,
/// script.sh, jdl.txt, input/, output/, sandbox/}`. Every file is replaced
/// atomically (write-temp-then-rename). Writes are serialized by the
/// registry's writer lock; loads read immutable files and may run
/// concurrently.
class Store {
public:
    /// Opens (and if needed initializes) the store. Throws CorruptStore when
    /// the catalogue cannot be read.
    explicit Store(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path job_dir(const std::string& id) const;
    std::filesystem::path meta_path(const std::string& id) const;
    std::filesystem::path catalogue_path() const { return root_ / "catalogue.meta"; }

    /// Returns `j` + six-digit counter; ids are never reused.
    std::string allocate_id();
    std::int64_t next_id() const;

    /// Validates and persists the job (job.meta first, then the catalogue).
    void save(const Job& job);
    /// Throws UnknownJob or CorruptStore(path, reason).
    Job load(const std::string& id) const;
    bool exists(const std::string& id) const;
    /// Sorted by id.
    std::vector<CatalogueRow> list(std::optional<JobStatus> filter = std::nullopt) const;
    /// Removes the catalogue entry and the job directory.
    void remove(const std::string& id);

    /// Reports catalogue/disk mismatches without changing anything.
    std::vector<Finding> fsck() const;

    /// Re-reads the catalogue from disk (another process may have written it).
    void refresh();

    void set_rename_hook(RenameHook hook) { hook_ = std::move(hook); }
    std::recursive_mutex& writer() const { return writer_; }

private:
    void write_catalogue_locked();

    std::filesystem::path root_;
    mutable std::recursive_mutex writer_;
    mutable std::mutex cat_mu_;
    std::map<std::string, CatalogueRow> catalogue_;
    std::int64_t next_id_ = 1;
    RenameHook hook_;
};

}  // namespace forge
