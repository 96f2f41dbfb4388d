#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "forge/job.hpp"

namespace forge {

enum class Dialect { Plain, Jdl, BatchSim };

std::string_view to_string(Dialect d);
/// "plain", "jdl", "batchsim". Throws UnsupportedDialect.
Dialect parse_dialect(std::string_view text);

struct RunScript {
    std::string text;
    std::vector<std::string> declared_inputs;
    std::vector<std::string> declared_outputs;
};

/// POSIX sh run script. Expects to be started in the job's execution
/// directory with the inputs already placed in `input/`; leaves the
/// declared outputs plus stdout.txt/stderr.txt in `output/`.
/// The batchsim dialect adds `#BS` requirement header lines.
/// Throws InvalidWorkflow.
RunScript generate_script(const Job& job, Dialect dialect = Dialect::Plain);

/// Throws InvalidWorkflow.
std::string generate_jdl(const Job& job);

/// jdl: `other.<Attr> >= <v>` / `other.<Attr> == "<v>"`;
/// batchsim: `#BS <attr>=<v>`. Throws UnsupportedDialect for Plain.
std::vector<std::string> translate_requirements(const ResourceRequirements& reqs, Dialect dialect);

/// What the mock grid recovers from a jdl.txt.
struct JdlDocument {
    std::string executable;
    std::vector<std::string> arguments;
    std::string std_output;
    std::string std_error;
    std::vector<std::string> input_sandbox;
    std::vector<std::string> output_sandbox;
    ResourceRequirements requirements;
    bool operator==(const JdlDocument&) const = default;
};

/// Accepts exactly the generator grammar. Throws JdlParseError.
JdlDocument parse_jdl(std::string_view text);

}  // namespace forge
