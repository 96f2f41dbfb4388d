#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

// Error names are part of the external contract: the CLI prints them on
// stderr and the HTTP service puts them in the response body.
namespace errc {
// bus
inline constexpr std::string_view DuplicateActualName = "DuplicateActualName";
inline constexpr std::string_view UnknownName = "UnknownName";
inline constexpr std::string_view DependencyCycle = "DependencyCycle";
inline constexpr std::string_view FactoryFailure = "FactoryFailure";
inline constexpr std::string_view NotConnected = "NotConnected";
inline constexpr std::string_view AlreadyConnected = "AlreadyConnected";
inline constexpr std::string_view ContractMismatch = "ContractMismatch";
inline constexpr std::string_view DisconnectedComponent = "DisconnectedComponent";
inline constexpr std::string_view UnknownParam = "UnknownParam";
inline constexpr std::string_view TypeMismatch = "TypeMismatch";
inline constexpr std::string_view OutOfRange = "OutOfRange";
// jobmodel / registry
inline constexpr std::string_view UnknownTemplate = "UnknownTemplate";
inline constexpr std::string_view InvalidOverride = "InvalidOverride";
inline constexpr std::string_view UnknownJob = "UnknownJob";
inline constexpr std::string_view JobActive = "JobActive";
inline constexpr std::string_view IllegalTransition = "IllegalTransition";
inline constexpr std::string_view UnknownHandler = "UnknownHandler";
inline constexpr std::string_view InvalidJob = "InvalidJob";
inline constexpr std::string_view ValidationError = "ValidationError";
inline constexpr std::string_view CorruptStore = "CorruptStore";
inline constexpr std::string_view IoError = "IoError";
// scriptgen
inline constexpr std::string_view InvalidWorkflow = "InvalidWorkflow";
inline constexpr std::string_view UnsupportedDialect = "UnsupportedDialect";
inline constexpr std::string_view JdlParseError = "JdlParseError";
// backends
inline constexpr std::string_view UnresolvedLogicalName = "UnresolvedLogicalName";
inline constexpr std::string_view BackendUnavailable = "BackendUnavailable";
inline constexpr std::string_view MatchFailure = "MatchFailure";
inline constexpr std::string_view UnknownTicket = "UnknownTicket";
inline constexpr std::string_view AlreadyTerminal = "AlreadyTerminal";
inline constexpr std::string_view MissingOutput = "MissingOutput";
inline constexpr std::string_view SourceMissing = "SourceMissing";
inline constexpr std::string_view StoreUnreachable = "StoreUnreachable";
inline constexpr std::string_view NotConfigured = "NotConfigured";
// monitor
inline constexpr std::string_view InvalidInterval = "InvalidInterval";
// splitmerge
inline constexpr std::string_view NoInputFiles = "NoInputFiles";
inline constexpr std::string_view ScriptFailure = "ScriptFailure";
inline constexpr std::string_view InvalidPlan = "InvalidPlan";
inline constexpr std::string_view BinningMismatch = "BinningMismatch";
inline constexpr std::string_view SchemaMismatch = "SchemaMismatch";
inline constexpr std::string_view EmptyInput = "EmptyInput";
inline constexpr std::string_view SubjobsActive = "SubjobsActive";
inline constexpr std::string_view FormatError = "FormatError";
// optedit
inline constexpr std::string_view ParseError = "ParseError";
inline constexpr std::string_view InvalidSpec = "InvalidSpec";
inline constexpr std::string_view UnknownOption = "UnknownOption";
inline constexpr std::string_view NotAChoice = "NotAChoice";
}  // namespace errc

/// Domain error raised by every forge module. `name()` is one of the errc
/// constants; `what()` carries "<name>: <detail>".
class Error : public std::runtime_error {
public:
    Error(std::string_view name, const std::string& detail)
        : std::runtime_error(std::string(name) + ": " + detail), name_(name), detail_(detail) {}

    const std::string& name() const noexcept { return name_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string name_;
    std::string detail_;
};

}  // namespace forge
