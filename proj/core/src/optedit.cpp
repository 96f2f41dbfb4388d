#include "forge/optedit.hpp"

#include <algorithm>
#include <set>

#include "forge/error.hpp"
#include "forge/fsutil.hpp"
#include "forge/strings.hpp"

namespace forge {

std::string OptionSpec::key() const { return owner.empty() ? name : owner + "." + name; }

const OptionSpec* OptionSchema::find(std::string_view key) const {
    for (const auto& o : options)
        if (o.key() == key) return &o;
    return nullptr;
}

const OptionSpec* OptionSchema::find(std::string_view owner, std::string_view name) const {
    for (const auto& o : options)
        if (o.owner == owner && o.name == name) return &o;
    return nullptr;
}

void OptionSchema::validate() const {
    std::set<std::string> keys;
    for (const auto& o : options) {
        auto fail = [&](const std::string& why) { throw Error(errc::InvalidSpec, o.key() + ": " + why); };
        if (o.name.empty()) fail("empty name");
        if (!keys.insert(o.key()).second) fail("duplicate option");
        if (o.type.kind == ValueKind::Enum && o.type.choices.empty()) fail("enum without choices");
        if (o.range && !(o.type.kind == ValueKind::Integer || o.type.kind == ValueKind::Real ||
                         (o.type.kind == ValueKind::List &&
                          (o.type.element == ValueKind::Integer || o.type.element == ValueKind::Real))))
            fail("range on a non-numeric type");
        try {
            check_value(o.type, o.default_value, o.range);
        } catch (const Error& e) {
            fail("default " + e.detail());
        }
    }
}

OptionSchema OptionSchema::from_kv(const KvDocument& doc) {
    OptionSchema schema;
    for (int i : doc.indices("option")) {
        auto base = "option." + std::to_string(i) + ".";
        OptionSpec o;
        o.owner = doc.get_or(base + "owner", "");
        o.name = doc.get_or(base + "name", "");
        auto where = o.owner.empty() ? o.name : o.owner + "." + o.name;
        try {
            o.type = ValueType::parse(doc.at(base + "type"));
            if (auto choices = doc.get(base + "choices")) {
                if (o.type.kind != ValueKind::Enum) throw Error(errc::InvalidSpec, "choices on a non-enum type");
                o.type.choices = split(*choices, ',');
            }
            o.range = parse_range(doc.get_or(base + "range", ""));
            o.default_value = coerce(o.type, parse_value(o.type, doc.at(base + "default")));
        } catch (const Error& e) {
            if (e.name() == errc::ParseError) throw;
            throw Error(errc::InvalidSpec, where + ": " + e.detail());
        }
        auto fav = doc.get_or(base + "favorite", "false");
        if (fav != "true" && fav != "false") throw Error(errc::InvalidSpec, where + ": favorite must be true or false");
        o.favorite = fav == "true";
        o.doc = doc.get_or(base + "doc", "");
        schema.options.push_back(std::move(o));
    }
    schema.validate();
    return schema;
}

OptionSchema OptionSchema::load(const std::filesystem::path& path) { return from_kv(KvDocument::load(path)); }

namespace {

const OptionSpec& spec_or_throw(const OptionSchema& schema, std::string_view key) {
    auto* spec = schema.find(key);
    if (!spec) throw Error(errc::UnknownOption, std::string(key));
    return *spec;
}

}  // namespace

void set_option(OptionSet& set, const OptionSchema& schema, std::string_view owner, std::string_view name, const Value& value) {
    auto key = owner.empty() ? std::string(name) : std::string(owner) + "." + std::string(name);
    const auto& spec = spec_or_throw(schema, key);
    Value v = coerce(spec.type, value);
    check_value(spec.type, v, spec.range);
    if (spec.type.kind == ValueKind::Sequence) {
        std::vector<SequenceEntry> entries;
        for (const auto& s : std::get<std::vector<Scalar>>(v)) entries.push_back({std::get<std::string>(s), true});
        set.sequences[key] = std::move(entries);
        set.assignments.erase(key);
        return;
    }
    set.assignments[key] = std::move(v);
}

void set_option_text(OptionSet& set, const OptionSchema& schema, std::string_view key, std::string_view text) {
    const auto& spec = spec_or_throw(schema, key);
    set_option(set, schema, spec.owner, spec.name, parse_value(spec.type, text));
}

void define_sequence(OptionSet& set, const OptionSchema& schema, std::string_view key, std::vector<SequenceEntry> entries) {
    const auto& spec = spec_or_throw(schema, key);
    if (spec.type.kind != ValueKind::Sequence) throw Error(errc::UnknownOption, std::string(key) + " is not a sequence");
    set.sequences[spec.key()] = std::move(entries);
    set.assignments.erase(spec.key());
}

void unset_option(OptionSet& set, std::string_view key) {
    set.assignments.erase(std::string(key));
    set.sequences.erase(std::string(key));
}

Value effective_value(const OptionSet& set, const OptionSpec& spec) {
    auto key = spec.key();
    if (auto it = set.sequences.find(key); it != set.sequences.end()) {
        std::vector<Scalar> out;
        for (const auto& e : it->second)
            if (e.enabled) out.push_back(e.entry);
        return out;
    }
    if (auto it = set.assignments.find(key); it != set.assignments.end()) return it->second;
    return spec.default_value;
}

std::map<std::string, Value> effective_non_default(const OptionSet& set, const OptionSchema& schema) {
    std::map<std::string, Value> out;
    for (const auto& spec : schema.options) {
        auto v = effective_value(set, spec);
        if (!(v == spec.default_value)) out[spec.key()] = std::move(v);
    }
    return out;
}

OptionFormat parse_option_format(std::string_view text) {
    if (text == "options-text") return OptionFormat::OptionsText;
    if (text == "script") return OptionFormat::Script;
    throw Error(errc::ValidationError, "unknown format '" + std::string(text) + "'");
}

std::string render_options(const OptionSet& set, const OptionSchema& schema, OptionFormat format) {
    std::string out;
    for (const auto& spec : schema.options) {
        auto literal = format_literal(effective_value(set, spec));
        if (format == OptionFormat::OptionsText) out += spec.key() + " = " + literal + ";\n";
        else out += "set " + spec.key() + " " + literal + "\n";
    }
    return out;
}

OptionSet parse_options(std::string_view text, const OptionSchema& schema) {
    OptionSet set;
    std::size_t start = 0;
    int lineno = 0;
    std::set<std::string> seen;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = trim(text.substr(start, nl - start));
        start = nl + 1;
        ++lineno;
        if (line.empty() || line.starts_with('#') || line.starts_with("//")) continue;
        auto where = "line " + std::to_string(lineno);
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error(errc::ParseError, where + ": expected 'Owner.Name = value;'");
        if (!line.ends_with(';')) throw Error(errc::ParseError, where + ": missing ';'");
        auto key = std::string(trim(line.substr(0, eq)));
        auto literal = trim(line.substr(eq + 1, line.size() - eq - 2));
        const auto& spec = spec_or_throw(schema, key);
        if (!seen.insert(key).second) throw Error(errc::ParseError, where + ": " + key + " assigned twice");
        Value v;
        try {
            v = coerce(spec.type, parse_value(spec.type, literal));
        } catch (const Error& e) {
            throw Error(e.name(), where + ": " + e.detail());
        }
        check_value(spec.type, v, spec.range);
        if (v == spec.default_value) continue;
        set_option(set, schema, spec.owner, spec.name, v);
    }
    return set;
}

std::string_view to_string(Presentation p) {
    switch (p) {
        case Presentation::Checkbox: return "checkbox";
        case Presentation::Dropdown: return "dropdown";
        case Presentation::TextEntry: return "text-entry";
        case Presentation::ListAppend: return "list-append";
        case Presentation::SequenceArranger: return "sequence-arranger";
    }
    return "text-entry";
}

PresentationDescriptor presentation_for(const OptionSpec& spec) {
    switch (spec.type.kind) {
        case ValueKind::Boolean: return {Presentation::Checkbox, {}, std::nullopt};
        case ValueKind::Enum: return {Presentation::Dropdown, spec.type.choices, std::nullopt};
        case ValueKind::Integer:
        case ValueKind::Real:
        case ValueKind::String: return {Presentation::TextEntry, {}, spec.range};
        case ValueKind::List: return {Presentation::ListAppend, {}, spec.range};
        case ValueKind::Sequence: return {Presentation::SequenceArranger, {}, std::nullopt};
    }
    return {Presentation::TextEntry, {}, spec.range};
}

std::vector<OptionSpec> favorites_first(const OptionSchema& schema) {
    auto out = schema.options;
    std::stable_partition(out.begin(), out.end(), [](const OptionSpec& o) { return o.favorite; });
    return out;
}

namespace {

void check_template_name(const std::string& name) {
    if (name.empty() || name.find('/') != std::string::npos || name.starts_with('.'))
        throw Error(errc::UnknownTemplate, "bad template name '" + name + "'");
}

}  // namespace

void OptionTemplates::save(const OptionSet& set, const std::string& name) const {
    check_template_name(name);
    KvDocument doc;
    for (const auto& [key, value] : set.assignments) doc.set("assign." + key, format_literal(value));
    for (const auto& [key, entries] : set.sequences) {
        doc.set("sequence." + key + ".count", std::to_string(entries.size()));
        for (std::size_t i = 0; i < entries.size(); ++i) {
            auto base = "sequence." + key + ".entry." + std::to_string(i);
            doc.set(base + ".name", entries[i].entry);
            doc.set(base + ".enabled", entries[i].enabled ? "true" : "false");
        }
    }
    write_file_atomic(dir_ / (name + ".opts"), doc.serialize("forge option template " + name));
}

OptionSet OptionTemplates::load(const std::string& name, const OptionSchema& schema) const {
    check_template_name(name);
    auto path = dir_ / (name + ".opts");
    if (!fs::exists(path)) throw Error(errc::UnknownTemplate, name);
    auto doc = KvDocument::load(path);
    OptionSet set;
    for (const auto& [key, value] : doc.entries()) {
        if (!key.starts_with("assign.")) continue;
        const auto& spec = spec_or_throw(schema, key.substr(7));
        set.assignments[spec.key()] = coerce(spec.type, parse_value(spec.type, value));
    }
    for (const auto& [key, value] : doc.entries()) {
        if (!key.starts_with("sequence.") || !key.ends_with(".count")) continue;
        auto seq = key.substr(9, key.size() - 9 - 6);
        auto count = std::stoul(value);
        std::vector<SequenceEntry> entries;
        for (std::size_t i = 0; i < count; ++i) {
            auto base = "sequence." + seq + ".entry." + std::to_string(i);
            entries.push_back({doc.at(base + ".name"), doc.at(base + ".enabled") == "true"});
        }
        set.sequences[seq] = std::move(entries);
    }
    return set;
}

std::vector<std::string> OptionTemplates::list() const {
    std::vector<std::string> out;
    if (!fs::is_directory(dir_)) return out;
    for (const auto& e : fs::directory_iterator(dir_))
        if (e.path().extension() == ".opts") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace forge
