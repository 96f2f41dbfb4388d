#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/kv.hpp"
#include "forge/value.hpp"

namespace forge {

struct OptionSpec {
    std::string owner;  // may be empty for top-level options such as sequences
    std::string name;
    ValueType type;
    Value default_value;
    std::optional<Range> range;
    bool favorite = false;
    std::string doc;

    /// `Owner.Name`, or `Name` when there is no owner.
    std::string key() const;
};

/// Schema file: `option.N.owner/name/type/default/range/choices/favorite/doc`.
struct OptionSchema {
    std::vector<OptionSpec> options;

    const OptionSpec* find(std::string_view key) const;
    const OptionSpec* find(std::string_view owner, std::string_view name) const;

    /// Throws ParseError or InvalidSpec.
    static OptionSchema from_kv(const KvDocument& doc);
    static OptionSchema load(const std::filesystem::path& path);
    /// Throws InvalidSpec(owner.name: reason).
    void validate() const;
};

struct SequenceEntry {
    std::string entry;
    bool enabled = true;
    bool operator==(const SequenceEntry&) const = default;
};

/// User edits on top of schema defaults. Keys are OptionSpec::key().
struct OptionSet {
    std::map<std::string, Value> assignments;
    std::map<std::string, std::vector<SequenceEntry>> sequences;
    bool operator==(const OptionSet&) const = default;
};

/// Type, range and choice checked; on any error the set is untouched.
/// Throws UnknownOption, TypeMismatch, OutOfRange, NotAChoice.
void set_option(OptionSet& set, const OptionSchema& schema, std::string_view owner, std::string_view name, const Value& value);
/// Parses `text` against the option's type first.
void set_option_text(OptionSet& set, const OptionSchema& schema, std::string_view key, std::string_view text);
/// Throws UnknownOption (also when the option is not a sequence).
void define_sequence(OptionSet& set, const OptionSchema& schema, std::string_view key, std::vector<SequenceEntry> entries);
void unset_option(OptionSet& set, std::string_view key);

/// The value rendering would use: sequence definition (enabled entries),
/// then assignment, then default.
Value effective_value(const OptionSet& set, const OptionSpec& spec);
/// Effective values that differ from the defaults.
std::map<std::string, Value> effective_non_default(const OptionSet& set, const OptionSchema& schema);

enum class OptionFormat { OptionsText, Script };
/// "options-text" or "script". Throws ValidationError.
OptionFormat parse_option_format(std::string_view text);

/// Every schema option in schema order: `Owner.Name = <literal>;` or
/// `set Owner.Name <literal>`.
std::string render_options(const OptionSet& set, const OptionSchema& schema, OptionFormat format = OptionFormat::OptionsText);

/// Reads the options-text form (blank lines and `#` or `//` comments
/// allowed). Values equal to the default are not stored.
/// Throws ParseError(line), UnknownOption, TypeMismatch, OutOfRange, NotAChoice.
OptionSet parse_options(std::string_view text, const OptionSchema& schema);

enum class Presentation { Checkbox, Dropdown, TextEntry, ListAppend, SequenceArranger };
std::string_view to_string(Presentation p);

struct PresentationDescriptor {
    Presentation kind;
    std::vector<std::string> choices;
    std::optional<Range> range;
};

PresentationDescriptor presentation_for(const OptionSpec& spec);

/// Favorites in schema order, then the rest in schema order.
std::vector<OptionSpec> favorites_first(const OptionSchema& schema);

/// Immutable snapshots at `<dir>/<name>.opts`.
class OptionTemplates {
public:
    explicit OptionTemplates(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void save(const OptionSet& set, const std::string& name) const;
    /// Throws UnknownTemplate.
    OptionSet load(const std::string& name, const OptionSchema& schema) const;
    std::vector<std::string> list() const;

private:
    std::filesystem::path dir_;
};

}  // namespace forge
