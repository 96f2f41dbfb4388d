#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/bus.hpp"
#include "forge/fsutil.hpp"
#include "forge/kv.hpp"

namespace forge {

enum class TransferMethod { LocalCopy, RemoteStore, Sandbox };

std::string_view to_string(TransferMethod m);
/// "copy", "store", "sandbox". Throws ValidationError.
TransferMethod parse_transfer_method(std::string_view text);

inline constexpr std::string_view kStorePrefix = "store:";
inline constexpr std::string_view kLfnPrefix = "lfn:";

/// Stand-in for a remote file server: objects live under `<root>/objects/<key>`.
class RemoteStore {
public:
    explicit RemoteStore(fs::path root) : root_(std::move(root)) {}

    const fs::path& root() const { return root_; }
    /// Throws SourceMissing or StoreUnreachable.
    void put(const fs::path& src, const std::string& key) const;
    /// Throws SourceMissing (absent key) or StoreUnreachable.
    void get(const std::string& key, const fs::path& dst) const;
    bool contains(const std::string& key) const;

private:
    fs::path object_path(const std::string& key) const;
    fs::path root_;
};

/// Moves one file. Locations are filesystem paths or `store:<key>`.
/// Sandbox copies through `sandbox_dir/<file name>` first.
/// Throws SourceMissing or StoreUnreachable.
class FileTransfer : public bus::Component {
public:
    explicit FileTransfer(RemoteStore remote) : remote_(std::move(remote)) {}

    void transfer(TransferMethod method, const std::string& src, const std::string& dst,
                  const fs::path& sandbox_dir = {}) const;
    const RemoteStore& remote() const { return remote_; }

private:
    void copy_any(const std::string& src, const std::string& dst) const;
    RemoteStore remote_;
};

/// Logical file name -> physical locations, in file order.
class ReplicaCatalogue : public bus::Component {
public:
    ReplicaCatalogue() = default;
    /// Reads `replica.N.lfn/path`; an lfn may appear several times.
    static ReplicaCatalogue from_kv(const KvDocument& doc);

    void add(const std::string& lfn, const std::string& path);
    std::vector<std::string> locations(std::string_view lfn) const;
    /// First location that exists, else the first listed one.
    /// Accepts `lfn:name` or `name`. Throws UnresolvedLogicalName.
    std::string resolve(std::string_view lfn) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace forge
