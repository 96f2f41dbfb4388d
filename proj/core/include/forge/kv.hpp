#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

/// The `key = value` document used by job.meta, catalogue.meta, templates,
/// backends.meta, option schemas and split plans.
///
/// Lines are UTF-8 `key = value`; `#` starts a comment line; lists are
/// spelled as indexed keys (`element.0.kind`, `element.1.kind`, ...).
/// Serialization writes keys in byte-lexicographic order, so two equal
/// documents always produce identical bytes.
class KvDocument {
public:
    using Map = std::map<std::string, std::string, std::less<>>;

    KvDocument() = default;

    /// Throws Error(ParseError) naming `source` and the offending line.
    static KvDocument parse(std::string_view text, std::string_view source = "<text>");
    /// Also requires the file to end with a newline, so truncation is detected.
    static KvDocument load(const std::filesystem::path& path);

    std::string serialize(std::string_view header = {}) const;

    void set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }
    void erase(std::string_view key);
    void erase_prefix(std::string_view prefix);

    bool contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }
    std::optional<std::string> get(std::string_view key) const;
    std::string get_or(std::string_view key, std::string_view fallback) const;
    /// Throws Error(ParseError) when the key is absent.
    const std::string& at(std::string_view key) const;

    /// Sorted numeric indices N for which some key starts with `prefix.N`.
    std::vector<int> indices(std::string_view prefix) const;
    /// Values of `prefix.N` keys in index order.
    std::vector<std::string> list(std::string_view prefix) const;
    void set_list(const std::string& prefix, const std::vector<std::string>& values);

    const Map& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    bool operator==(const KvDocument&) const = default;

private:
    Map entries_;
};

}  // namespace forge
