#include "forge/transfer.hpp"

#include "forge/error.hpp"

namespace forge {

std::string_view to_string(TransferMethod m) {
    switch (m) {
        case TransferMethod::LocalCopy: return "copy";
        case TransferMethod::RemoteStore: return "store";
        case TransferMethod::Sandbox: return "sandbox";
    }
    return "copy";
}

TransferMethod parse_transfer_method(std::string_view text) {
    if (text == "copy") return TransferMethod::LocalCopy;
    if (text == "store") return TransferMethod::RemoteStore;
    if (text == "sandbox") return TransferMethod::Sandbox;
    throw Error(errc::ValidationError, "unknown transfer method '" + std::string(text) + "'");
}

fs::path RemoteStore::object_path(const std::string& key) const {
    if (key.empty() || key.find('/') != std::string::npos || key == "." || key == "..")
        throw Error(errc::SourceMissing, "bad store key '" + key + "'");
    return root_ / "objects" / key;
}

void RemoteStore::put(const fs::path& src, const std::string& key) const {
    if (!fs::is_directory(root_)) throw Error(errc::StoreUnreachable, root_.string());
    if (!fs::is_regular_file(src)) throw Error(errc::SourceMissing, src.string());
    auto dst = object_path(key);
    fs::create_directories(dst.parent_path());
    write_file_atomic(dst, read_file(src));
}

void RemoteStore::get(const std::string& key, const fs::path& dst) const {
    if (!fs::is_directory(root_)) throw Error(errc::StoreUnreachable, root_.string());
    auto src = object_path(key);
    if (!fs::is_regular_file(src)) throw Error(errc::SourceMissing, std::string(kStorePrefix) + key);
    copy_file_over(src, dst);
}

bool RemoteStore::contains(const std::string& key) const {
    try {
        return fs::is_regular_file(object_path(key));
    } catch (const Error&) {
        return false;
    }
}

void FileTransfer::copy_any(const std::string& src, const std::string& dst) const {
    bool src_remote = src.starts_with(kStorePrefix);
    bool dst_remote = dst.starts_with(kStorePrefix);
    if (src_remote && dst_remote) {
        auto tmp = remote_.root() / "objects" / (".xfer-" + dst.substr(kStorePrefix.size()));
        remote_.get(src.substr(kStorePrefix.size()), tmp);
        remote_.put(tmp, dst.substr(kStorePrefix.size()));
        fs::remove(tmp);
    } else if (src_remote) {
        remote_.get(src.substr(kStorePrefix.size()), dst);
    } else if (dst_remote) {
        remote_.put(src, dst.substr(kStorePrefix.size()));
    } else {
        if (!fs::is_regular_file(src)) throw Error(errc::SourceMissing, src);
        copy_file_over(src, dst);
    }
}

void FileTransfer::transfer(TransferMethod method, const std::string& src, const std::string& dst,
                            const fs::path& sandbox_dir) const {
    switch (method) {
        case TransferMethod::LocalCopy:
            if (src.starts_with(kStorePrefix) || dst.starts_with(kStorePrefix))
                throw Error(errc::ValidationError, "copy transfer cannot reach " + (src.starts_with(kStorePrefix) ? src : dst));
            copy_any(src, dst);
            break;
        case TransferMethod::RemoteStore:
            copy_any(src, dst);
            break;
        case TransferMethod::Sandbox: {
            if (sandbox_dir.empty()) throw Error(errc::ValidationError, "sandbox transfer needs a sandbox directory");
            std::string leaf = dst.starts_with(kStorePrefix) ? dst.substr(kStorePrefix.size()) : fs::path(dst).filename().string();
            auto staged = (sandbox_dir / leaf).string();
            if (staged != src) copy_any(src, staged);
            if (staged != dst) copy_any(staged, dst);
            break;
        }
    }
}

ReplicaCatalogue ReplicaCatalogue::from_kv(const KvDocument& doc) {
    ReplicaCatalogue cat;
    for (int i : doc.indices("replica")) {
        auto base = "replica." + std::to_string(i);
        auto lfn = doc.get(base + ".lfn");
        auto path = doc.get(base + ".path");
        if (!lfn || !path || lfn->empty() || path->empty())
            throw Error(errc::ParseError, base + " needs both lfn and path");
        cat.add(*lfn, *path);
    }
    return cat;
}

namespace {
std::string bare(std::string_view lfn) {
    if (lfn.starts_with(kLfnPrefix)) lfn.remove_prefix(kLfnPrefix.size());
    return std::string(lfn);
}
}  // namespace

void ReplicaCatalogue::add(const std::string& lfn, const std::string& path) { entries_.emplace_back(bare(lfn), path); }

std::vector<std::string> ReplicaCatalogue::locations(std::string_view lfn) const {
    auto key = bare(lfn);
    std::vector<std::string> out;
    for (const auto& [l, p] : entries_)
        if (l == key) out.push_back(p);
    return out;
}

std::string ReplicaCatalogue::resolve(std::string_view lfn) const {
    auto locs = locations(lfn);
    if (locs.empty()) throw Error(errc::UnresolvedLogicalName, std::string(kLfnPrefix) + bare(lfn));
    for (const auto& p : locs)
        if (fs::exists(p)) return p;
    return locs.front();
}

}  // namespace forge
