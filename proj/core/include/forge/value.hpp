#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace forge {

enum class ValueKind { Boolean, Integer, Real, String, Enum, List, Sequence };

std::string_view to_string(ValueKind kind);

/// Declared type of a configurable parameter or job option.
struct ValueType {
    ValueKind kind = ValueKind::String;
    ValueKind element = ValueKind::String;  // List only
    std::vector<std::string> choices;       // Enum only

    /// "boolean", "integer", "real", "string", "enum", "list:<scalar>", "sequence".
    static ValueType parse(std::string_view text);
    std::string to_string() const;

    bool operator==(const ValueType&) const = default;
};

using Scalar = std::variant<bool, std::int64_t, double, std::string>;
using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<Scalar>>;

struct Range {
    double min = 0;
    double max = 0;
    bool operator==(const Range&) const = default;
};

std::string format_number(double v);

/// Literal form used by the options text grammar: strings double-quoted,
/// lists as `{ "a", "b" }`, booleans `true|false`.
std::string format_literal(const Value& v);
std::string format_scalar_literal(const Scalar& v);

/// Unquoted form used in key-value files and environment assignments.
std::string format_plain(const Scalar& v);

/// Parses either a literal (quoted string, `{...}` list) or a plain token
/// against `type`. Throws Error(TypeMismatch) when the text does not fit.
Value parse_value(const ValueType& type, std::string_view text);
Scalar parse_scalar(ValueKind kind, std::string_view text);

/// Converts integer literals assigned to real-typed slots; throws
/// TypeMismatch for anything else that does not match `type`.
Value coerce(const ValueType& type, Value v);

/// Type, range and choice check. Throws TypeMismatch, OutOfRange or NotAChoice.
void check_value(const ValueType& type, const Value& v, const std::optional<Range>& range);

std::optional<Range> parse_range(std::string_view text);
std::string format_range(const Range& r);

}  // namespace forge
