#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "forge/fsutil.hpp"
#include "forge/job.hpp"
#include "forge/kv.hpp"
#include "forge/registry.hpp"

namespace forge {

/// File form: `HIST <name> <nbins> <lo> <hi>` then one line of counts.
struct Histogram {
    std::string name;
    int nbins = 1;
    double lo = 0;
    double hi = 1;
    std::vector<double> counts;

    /// Index of the bin holding x, or -1 outside [lo, hi).
    int bin(double x) const;
    void fill(double x, double weight = 1);
    bool operator==(const Histogram&) const = default;
};

/// Throws FormatError.
Histogram parse_histogram(std::string_view text);
std::string format_histogram(const Histogram& h);

/// Elementwise sum. Throws EmptyInput or BinningMismatch.
Histogram merge_histograms(const std::vector<Histogram>& inputs);

/// TSV, first row holds the column names.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    bool operator==(const Table&) const = default;
};

/// Throws FormatError.
Table parse_table(std::string_view text);
std::string format_table(const Table& t);
/// Row concatenation in input order. Throws EmptyInput or SchemaMismatch.
Table merge_tables(const std::vector<Table>& inputs);

struct SubjobSpec {
    std::vector<std::string> files;
    std::map<std::string, std::string> params;  // parameter overrides
    bool operator==(const SubjobSpec&) const = default;
};

/// Plan file: `subjob.N.files = a.dat, b.dat` and optional `subjob.N.param.<NAME> = value`.
struct SplitPlan {
    std::vector<SubjobSpec> subjobs;
    bool operator==(const SplitPlan&) const = default;
};

/// Throws InvalidPlan.
SplitPlan parse_plan(const KvDocument& doc);
KvDocument plan_to_kv(const SplitPlan& plan);

/// Consecutive chunks of at most `max_files` files. Throws ValidationError when max_files < 1.
SplitPlan plan_by_input_files(const std::vector<std::string>& files, int max_files);

/// Subsets must be non-empty, disjoint, cover `parent_files` and keep their
/// relative order. Throws InvalidPlan("not covering" / "not disjoint" / ...).
void validate_plan(const SplitPlan& plan, const std::vector<std::string>& parent_files);

/// Creates one subjob per plan entry. The parent must be InPreparation and
/// not already split. Throws NoInputFiles, JobActive, InvalidPlan.
std::vector<Job> apply_plan(Store& store, const std::string& parent_id, const SplitPlan& plan, std::int64_t now);

std::vector<Job> split_by_input_files(Store& store, const std::string& parent_id, int max_files, std::int64_t now);

/// Runs `script <plan-file> <input names...>` in the parent's job dir with
/// `FORGE_SPLIT_<KEY>=value` for every option, then applies the plan it
/// wrote. Throws ScriptFailure or InvalidPlan.
std::vector<Job> split_by_script(Store& store, const std::string& parent_id, const fs::path& script,
                                 const std::map<std::string, std::string>& options, std::int64_t now);

struct MergeReport {
    std::vector<std::string> merged;   // output names merged into one file
    std::vector<std::string> copied;   // `<name>.<subjob id>` files
    std::vector<std::string> missing;  // `<subjob id>/<name>`
    bool partial = false;
};

/// Gathers subjob outputs into the parent's output directory: `.hist`
/// merged, `.tsv` concatenated, anything else copied with the subjob id as
/// suffix. Outputs of subjobs that did not complete count as missing.
/// Throws SubjobsActive.
MergeReport collect_outputs(Store& store, const std::string& parent_id);

/// Output directory of a job: output_dir when absolute, else relative to the job dir.
fs::path job_output_dir(const Store& store, const Job& job);

}  // namespace forge
