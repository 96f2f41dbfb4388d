#include "forge/scriptgen.hpp"

#include <charconv>
#include <cctype>
#include <sstream>

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge {

std::string_view to_string(Dialect d) {
    switch (d) {
        case Dialect::Plain: return "plain";
        case Dialect::Jdl: return "jdl";
        case Dialect::BatchSim: return "batchsim";
    }
    return "plain";
}

Dialect parse_dialect(std::string_view text) {
    if (text == "plain") return Dialect::Plain;
    if (text == "jdl") return Dialect::Jdl;
    if (text == "batchsim") return Dialect::BatchSim;
    throw Error(errc::UnsupportedDialect, std::string(text));
}

namespace {

std::string env_name(std::string_view param) {
    std::string out = "FORGE_PARAM_";
    for (char c : to_upper(param)) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return out;
}

void check_workflow(const Job& job) {
    try {
        job.workflow.validate();
    } catch (const Error& e) {
        if (e.name() == errc::InvalidWorkflow) throw;
        throw Error(errc::InvalidWorkflow, e.detail());
    }
}

std::string jdl_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string jdl_list(const std::vector<std::string>& items) {
    std::string out = "{";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += jdl_quote(items[i]);
    }
    return out + "}";
}

}  // namespace

std::vector<std::string> translate_requirements(const ResourceRequirements& reqs, Dialect dialect) {
    if (dialect == Dialect::Plain) throw Error(errc::UnsupportedDialect, "plain has no requirement syntax");
    std::vector<std::string> out;
    for (const auto& r : reqs.entries) {
        if (dialect == Dialect::Jdl) {
            if (auto* n = std::get_if<double>(&r.value)) out.push_back("other." + r.attribute + " >= " + format_number(*n));
            else out.push_back("other." + r.attribute + " == " + jdl_quote(std::get<std::string>(r.value)));
        } else {
            out.push_back("#BS " + to_lower(r.attribute) + "=" + format_requirement_value(r.value));
        }
    }
    return out;
}

RunScript generate_script(const Job& job, Dialect dialect) {
    check_workflow(job);
    RunScript rs;
    for (const auto& in : job.declared_inputs()) rs.declared_inputs.push_back(in.name);
    for (const auto& out : job.declared_outputs()) rs.declared_outputs.push_back(out.name);

    std::ostringstream s;
    s << "#!/bin/sh\n";
    s << "# job " << (job.id.empty() ? "-" : job.id) << "\n";
    if (dialect == Dialect::BatchSim)
        for (const auto& line : translate_requirements(job.requirements, dialect)) s << line << "\n";
    s << "set -e\n";
    s << "mkdir -p output work\n";
    s << "exec >output/stdout.txt 2>output/stderr.txt\n";
    for (const auto& name : rs.declared_inputs) s << "cp " << shell_quote("input/" + name) << " " << shell_quote("work/" + name) << "\n";
    s << "cd work\n";
    s << "FORGE_INPUT_FILES=" << shell_quote(join(rs.declared_inputs, " ")) << "\n";
    s << "export FORGE_INPUT_FILES\n";
    for (const auto& p : job.application.parameters) {
        auto var = env_name(p.name);
        s << var << "=" << shell_quote(format_plain(p.value)) << "\n";
        s << "export " << var << "\n";
    }
    for (const auto& el : job.workflow.elements) {
        if (auto* p = std::get_if<Parameter>(&el)) {
            auto var = env_name(p->name);
            s << var << "=" << shell_quote(format_plain(p->value)) << "\n";
            s << "export " << var << "\n";
        } else if (auto* x = std::get_if<Executable>(&el)) {
            std::vector<std::string> words{x->name};
            words.insert(words.end(), x->args.begin(), x->args.end());
            s << shell_join(words) << "\n";
        }
    }
    s << "cd ..\n";
    for (const auto& name : rs.declared_outputs) s << "mv " << shell_quote("work/" + name) << " " << shell_quote("output/" + name) << "\n";
    rs.text = s.str();
    return rs;
}

std::string generate_jdl(const Job& job) {
    check_workflow(job);
    auto exes = job.workflow.executables();
    const auto& exe = exes.front();
    std::vector<std::string> inputs{"script.sh"};
    for (const auto& in : job.declared_inputs()) inputs.push_back(in.name);
    std::vector<std::string> outputs{"stdout.txt", "stderr.txt"};
    for (const auto& out : job.declared_outputs()) outputs.push_back(out.name);
    auto reqs = translate_requirements(job.requirements, Dialect::Jdl);

    std::string text;
    text += "Executable = " + jdl_quote(exe.name) + ";\n";
    if (!exe.args.empty()) text += "Arguments = " + jdl_quote(shell_join(exe.args)) + ";\n";
    text += "InputSandbox = " + jdl_list(inputs) + ";\n";
    text += "OutputSandbox = " + jdl_list(outputs) + ";\n";
    text += "Requirements = " + (reqs.empty() ? std::string("true") : join(reqs, " && ")) + ";\n";
    return text;
}

namespace {

struct Cursor {
    std::string_view s;
    std::size_t pos = 0;
    int line;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(errc::JdlParseError, "line " + std::to_string(line) + ": " + what);
    }
    void skip_ws() {
        while (pos < s.size() && s[pos] == ' ') ++pos;
    }
    bool eat(std::string_view tok) {
        skip_ws();
        if (s.substr(pos, tok.size()) != tok) return false;
        pos += tok.size();
        return true;
    }
    void expect(std::string_view tok) {
        if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
    }
    std::string string_lit() {
        skip_ws();
        if (pos >= s.size() || s[pos] != '"') fail("expected string");
        ++pos;
        std::string out;
        while (pos < s.size() && s[pos] != '"') {
            if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
            out += s[pos++];
        }
        if (pos >= s.size()) fail("unterminated string");
        ++pos;
        return out;
    }
    std::vector<std::string> list() {
        expect("{");
        std::vector<std::string> out;
        skip_ws();
        if (eat("}")) return out;
        for (;;) {
            out.push_back(string_lit());
            if (eat("}")) return out;
            expect(",");
        }
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        if (start == pos) fail("expected identifier");
        return std::string(s.substr(start, pos - start));
    }
    void end() {
        expect(";");
        skip_ws();
        if (pos != s.size()) fail("trailing characters");
    }
};

ResourceRequirements parse_requirements(Cursor& c) {
    ResourceRequirements reqs;
    if (c.eat("true")) return reqs;
    for (;;) {
        c.expect("other.");
        Requirement r;
        r.attribute = c.ident();
        if (c.eat(">=")) {
            c.skip_ws();
            std::size_t start = c.pos;
            while (c.pos < c.s.size() && c.s[c.pos] != ' ' && c.s[c.pos] != ';') ++c.pos;
            auto tok = c.s.substr(start, c.pos - start);
            double v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size()) c.fail("bad number '" + std::string(tok) + "'");
            r.value = v;
        } else if (c.eat("==")) {
            r.value = c.string_lit();
        } else {
            c.fail("expected >= or ==");
        }
        reqs.entries.push_back(std::move(r));
        if (!c.eat("&&")) return reqs;
    }
}

}  // namespace

JdlDocument parse_jdl(std::string_view text) {
    static constexpr std::string_view order[] = {"Executable", "Arguments", "StdOutput", "StdError",
                                                 "InputSandbox", "OutputSandbox", "Requirements"};
    JdlDocument doc;
    std::size_t next = 0;
    bool seen_exe = false, seen_in = false, seen_out = false, seen_req = false;
    int lineno = 0;
    if (!text.empty() && text.back() != '\n') throw Error(errc::JdlParseError, "missing final newline");
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        auto line = text.substr(start, nl - start);
        start = nl + 1;
        ++lineno;
        Cursor c{line, 0, lineno};
        auto key = c.ident();
        std::size_t idx = next;
        while (idx < std::size(order) && order[idx] != key) ++idx;
        if (idx == std::size(order)) c.fail("unexpected key '" + key + "'");
        next = idx + 1;
        c.expect("=");
        if (key == "Executable") {
            doc.executable = c.string_lit();
            seen_exe = true;
        } else if (key == "Arguments") {
            doc.arguments = shell_split(c.string_lit());
        } else if (key == "StdOutput") {
            doc.std_output = c.string_lit();
        } else if (key == "StdError") {
            doc.std_error = c.string_lit();
        } else if (key == "InputSandbox") {
            doc.input_sandbox = c.list();
            seen_in = true;
        } else if (key == "OutputSandbox") {
            doc.output_sandbox = c.list();
            seen_out = true;
        } else {
            doc.requirements = parse_requirements(c);
            seen_req = true;
        }
        c.end();
    }
    if (!seen_exe) throw Error(errc::JdlParseError, "missing Executable");
    if (!seen_in) throw Error(errc::JdlParseError, "missing InputSandbox");
    if (!seen_out) throw Error(errc::JdlParseError, "missing OutputSandbox");
    if (!seen_req) throw Error(errc::JdlParseError, "missing Requirements");
    return doc;
}

}  // namespace forge
