#include "forge/value.hpp"

#include <charconv>
#include <cmath>

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge {

namespace {

std::optional<ValueKind> scalar_kind_from(std::string_view s) {
    if (s == "boolean") return ValueKind::Boolean;
    if (s == "integer") return ValueKind::Integer;
    if (s == "real") return ValueKind::Real;
    if (s == "string") return ValueKind::String;
    return std::nullopt;
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

// Parses a double-quoted string starting at text[pos]; advances pos past it.
std::string unquote_at(std::string_view text, std::size_t& pos) {
    std::string out;
    ++pos;
    while (pos < text.size() && text[pos] != '"') {
        if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
        out += text[pos++];
    }
    if (pos >= text.size()) throw Error(errc::TypeMismatch, "unterminated string literal");
    ++pos;
    return out;
}

bool is_numeric_kind(ValueKind k) { return k == ValueKind::Integer || k == ValueKind::Real; }

double as_double(const Scalar& s) {
    if (auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&s)) return *d;
    return 0;
}

void check_scalar(ValueKind kind, const Scalar& s) {
    bool ok = false;
    switch (kind) {
        case ValueKind::Boolean: ok = std::holds_alternative<bool>(s); break;
        case ValueKind::Integer: ok = std::holds_alternative<std::int64_t>(s); break;
        case ValueKind::Real: ok = std::holds_alternative<double>(s); break;
        case ValueKind::String:
        case ValueKind::Enum: ok = std::holds_alternative<std::string>(s); break;
        default: break;
    }
    if (!ok) throw Error(errc::TypeMismatch, "expected " + std::string(to_string(kind)));
}

Scalar coerce_scalar(ValueKind kind, Scalar s) {
    if (kind == ValueKind::Real) {
        if (auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
    }
    check_scalar(kind, s);
    return s;
}

}  // namespace

std::string_view to_string(ValueKind kind) {
    switch (kind) {
        case ValueKind::Boolean: return "boolean";
        case ValueKind::Integer: return "integer";
        case ValueKind::Real: return "real";
        case ValueKind::String: return "string";
        case ValueKind::Enum: return "enum";
        case ValueKind::List: return "list";
        case ValueKind::Sequence: return "sequence";
    }
    return "?";
}

ValueType ValueType::parse(std::string_view text) {
    ValueType t;
    text = trim(text);
    if (auto k = scalar_kind_from(text)) {
        t.kind = *k;
    } else if (text == "enum") {
        t.kind = ValueKind::Enum;
    } else if (text == "sequence") {
        t.kind = ValueKind::Sequence;
    } else if (text.starts_with("list:")) {
        auto el = scalar_kind_from(text.substr(5));
        if (!el) throw Error(errc::TypeMismatch, "bad list element type '" + std::string(text) + "'");
        t.kind = ValueKind::List;
        t.element = *el;
    } else {
        throw Error(errc::TypeMismatch, "unknown value type '" + std::string(text) + "'");
    }
    return t;
}

std::string ValueType::to_string() const {
    if (kind == ValueKind::List) return "list:" + std::string(forge::to_string(element));
    return std::string(forge::to_string(kind));
}

std::string format_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
        return std::to_string(static_cast<std::int64_t>(v));
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string format_plain(const Scalar& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
            else if constexpr (std::is_same_v<T, double>) return format_number(x);
            else return x;
        },
        v);
}

std::string format_scalar_literal(const Scalar& v) {
    if (auto* s = std::get_if<std::string>(&v)) return quote(*s);
    return format_plain(v);
}

std::string format_literal(const Value& v) {
    if (auto* list = std::get_if<std::vector<Scalar>>(&v)) {
        if (list->empty()) return "{}";
        std::string out = "{ ";
        for (std::size_t i = 0; i < list->size(); ++i) {
            if (i) out += ", ";
            out += format_scalar_literal((*list)[i]);
        }
        return out + " }";
    }
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::vector<Scalar>>) return {};
            else return format_scalar_literal(Scalar{x});
        },
        v);
}

Scalar parse_scalar(ValueKind kind, std::string_view text) {
    text = trim(text);
    switch (kind) {
        case ValueKind::Boolean:
            if (text == "true") return true;
            if (text == "false") return false;
            throw Error(errc::TypeMismatch, "not a boolean: '" + std::string(text) + "'");
        case ValueKind::Integer: {
            std::int64_t v{};
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc{} || p != text.data() + text.size() || text.empty())
                throw Error(errc::TypeMismatch, "not an integer: '" + std::string(text) + "'");
            return v;
        }
        case ValueKind::Real: {
            double v{};
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc{} || p != text.data() + text.size() || text.empty())
                throw Error(errc::TypeMismatch, "not a real: '" + std::string(text) + "'");
            return v;
        }
        case ValueKind::String:
        case ValueKind::Enum:
            if (!text.empty() && text.front() == '"') {
                std::size_t pos = 0;
                std::string s = unquote_at(text, pos);
                if (pos != text.size()) throw Error(errc::TypeMismatch, "trailing characters after string");
                return s;
            }
            return std::string(text);
        default:
            throw Error(errc::TypeMismatch, "not a scalar type");
    }
}

Value parse_value(const ValueType& type, std::string_view text) {
    text = trim(text);
    if (type.kind != ValueKind::List && type.kind != ValueKind::Sequence) {
        Scalar s = parse_scalar(type.kind, text);
        return std::visit([](auto&& x) -> Value { return x; }, s);
    }
    ValueKind el = type.kind == ValueKind::List ? type.element : ValueKind::String;
    std::vector<Scalar> out;
    if (!text.empty() && text.front() == '{') {
        if (text.back() != '}') throw Error(errc::TypeMismatch, "unterminated list literal");
        std::string_view body = trim(text.substr(1, text.size() - 2));
        std::size_t pos = 0;
        while (pos < body.size()) {
            while (pos < body.size() && body[pos] == ' ') ++pos;
            if (pos >= body.size()) break;
            std::size_t start = pos;
            if (body[pos] == '"') {
                unquote_at(body, pos);
            } else {
                while (pos < body.size() && body[pos] != ',') ++pos;
            }
            out.push_back(parse_scalar(el, body.substr(start, pos - start)));
            while (pos < body.size() && body[pos] == ' ') ++pos;
            if (pos < body.size()) {
                if (body[pos] != ',') throw Error(errc::TypeMismatch, "expected ',' in list literal");
                ++pos;
            }
        }
    } else if (!text.empty()) {
        for (auto part : split(text, ',')) out.push_back(parse_scalar(el, part));
    }
    return out;
}

Value coerce(const ValueType& type, Value v) {
    if (type.kind == ValueKind::List || type.kind == ValueKind::Sequence) {
        auto* list = std::get_if<std::vector<Scalar>>(&v);
        if (!list) throw Error(errc::TypeMismatch, "expected " + type.to_string());
        ValueKind el = type.kind == ValueKind::List ? type.element : ValueKind::String;
        for (auto& s : *list) s = coerce_scalar(el, std::move(s));
        return v;
    }
    if (std::holds_alternative<std::vector<Scalar>>(v))
        throw Error(errc::TypeMismatch, "expected " + type.to_string() + ", got list");
    Scalar s = std::visit(
        [](auto&& x) -> Scalar {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::vector<Scalar>>) return false;
            else return x;
        },
        std::move(v));
    s = coerce_scalar(type.kind, std::move(s));
    return std::visit([](auto&& x) -> Value { return x; }, s);
}

void check_value(const ValueType& type, const Value& v, const std::optional<Range>& range) {
    Value c = coerce(type, v);
    auto check_range = [&](const Scalar& s) {
        if (!range || (!std::holds_alternative<std::int64_t>(s) && !std::holds_alternative<double>(s))) return;
        double d = as_double(s);
        if (d < range->min || d > range->max)
            throw Error(errc::OutOfRange, format_plain(s) + " not in " + format_range(*range));
    };
    if (type.kind == ValueKind::Enum) {
        const auto& s = std::get<std::string>(c);
        bool found = false;
        for (const auto& ch : type.choices) found = found || ch == s;
        if (!found) throw Error(errc::NotAChoice, "'" + s + "' is not one of " + join(type.choices, ","));
    }
    if (auto* list = std::get_if<std::vector<Scalar>>(&c)) {
        if (type.kind == ValueKind::List && is_numeric_kind(type.element))
            for (const auto& s : *list) check_range(s);
    } else if (is_numeric_kind(type.kind)) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (!std::is_same_v<T, std::vector<Scalar>>) check_range(Scalar{x});
            },
            c);
    }
}

std::optional<Range> parse_range(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    auto parts = split(text, ',');
    if (parts.size() != 2) throw Error(errc::TypeMismatch, "range must be 'min,max'");
    Range r;
    r.min = std::get<double>(parse_scalar(ValueKind::Real, parts[0]));
    r.max = std::get<double>(parse_scalar(ValueKind::Real, parts[1]));
    if (r.min > r.max) throw Error(errc::TypeMismatch, "range min exceeds max");
    return r;
}

std::string format_range(const Range& r) { return format_number(r.min) + "," + format_number(r.max); }

}  // namespace forge
