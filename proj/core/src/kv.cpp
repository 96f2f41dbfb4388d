#include "forge/kv.hpp"

#include <charconv>
#include <set>

#include "forge/error.hpp"
#include "forge/fsutil.hpp"
#include "forge/strings.hpp"

namespace forge {

namespace {

std::string escape(std::string_view v) {
    std::string out;
    for (char c : v) {
        if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else out += c;
    }
    return out;
}

std::string unescape(std::string_view v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == '\\' && i + 1 < v.size()) {
            ++i;
            out += v[i] == 'n' ? '\n' : v[i];
        } else {
            out += v[i];
        }
    }
    return out;
}

}  // namespace

KvDocument KvDocument::parse(std::string_view text, std::string_view source) {
    KvDocument doc;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == text.npos ? text.npos : end - pos);
        pos = end == text.npos ? text.size() : end + 1;
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos || trim(t.substr(0, eq)).empty()) {
            throw Error(errc::ParseError,
                        std::string(source) + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key(trim(t.substr(0, eq)));
        if (doc.contains(key)) {
            throw Error(errc::ParseError,
                        std::string(source) + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        doc.entries_.emplace(std::move(key), unescape(trim(t.substr(eq + 1))));
    }
    return doc;
}

KvDocument KvDocument::load(const std::filesystem::path& path) {
    std::string text = read_file(path);
    if (!text.empty() && text.back() != '\n') {
        throw Error(errc::ParseError, path.string() + ": truncated (no trailing newline)");
    }
    return parse(text, path.string());
}

std::string KvDocument::serialize(std::string_view header) const {
    std::string out;
    if (!header.empty()) {
        out += "# ";
        out += header;
        out += '\n';
    }
    for (const auto& [k, v] : entries_) {
        out += k;
        out += " = ";
        out += escape(v);
        out += '\n';
    }
    return out;
}

void KvDocument::erase(std::string_view key) {
    auto it = entries_.find(key);
    if (it != entries_.end()) entries_.erase(it);
}

void KvDocument::erase_prefix(std::string_view prefix) {
    for (auto it = entries_.lower_bound(prefix); it != entries_.end() && it->first.starts_with(prefix);) {
        it = entries_.erase(it);
    }
}

std::optional<std::string> KvDocument::get(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string KvDocument::get_or(std::string_view key, std::string_view fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? std::string(fallback) : it->second;
}

const std::string& KvDocument::at(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(errc::ParseError, "missing key '" + std::string(key) + "'");
    return it->second;
}

std::vector<int> KvDocument::indices(std::string_view prefix) const {
    std::set<int> found;
    std::string p = std::string(prefix) + ".";
    for (auto it = entries_.lower_bound(p); it != entries_.end() && it->first.starts_with(p); ++it) {
        std::string_view rest = std::string_view(it->first).substr(p.size());
        int n = 0;
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
        if (ec != std::errc{} || ptr == rest.data() || n < 0) continue;
        if (ptr != rest.data() + rest.size() && *ptr != '.') continue;
        found.insert(n);
    }
    return {found.begin(), found.end()};
}

std::vector<std::string> KvDocument::list(std::string_view prefix) const {
    std::vector<std::string> out;
    for (int i : indices(prefix)) {
        if (auto v = get(std::string(prefix) + "." + std::to_string(i))) out.push_back(*v);
    }
    return out;
}

void KvDocument::set_list(const std::string& prefix, const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) set(prefix + "." + std::to_string(i), values[i]);
}

}  // namespace forge
