#include "forge/splitmerge.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "forge/error.hpp"
#include "forge/process.hpp"
#include "forge/strings.hpp"

namespace forge {

namespace {

std::optional<double> to_double(std::string_view s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string> words(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

}  // namespace

int Histogram::bin(double x) const {
    if (!(x >= lo) || !(x < hi)) return -1;
    auto b = static_cast<int>(std::floor((x - lo) / (hi - lo) * nbins));
    return std::clamp(b, 0, nbins - 1);
}

void Histogram::fill(double x, double weight) {
    if (counts.size() != static_cast<std::size_t>(nbins)) counts.resize(nbins, 0.0);
    int b = bin(x);
    if (b >= 0) counts[b] += weight;
}

Histogram parse_histogram(std::string_view text) {
    auto lines = split(text, '\n');
    if (lines.size() < 2) throw Error(errc::FormatError, "histogram needs a header and a counts line");
    auto head = words(lines[0]);
    if (head.size() != 5 || head[0] != "HIST") throw Error(errc::FormatError, "bad histogram header '" + lines[0] + "'");
    Histogram h;
    h.name = head[1];
    auto nb = to_double(head[2]);
    auto lo = to_double(head[3]);
    auto hi = to_double(head[4]);
    if (!nb || *nb < 1 || *nb != std::floor(*nb) || !lo || !hi || !(*lo < *hi))
        throw Error(errc::FormatError, "bad histogram binning '" + lines[0] + "'");
    h.nbins = static_cast<int>(*nb);
    h.lo = *lo;
    h.hi = *hi;
    for (const auto& w : words(lines[1])) {
        auto c = to_double(w);
        if (!c || *c < 0) throw Error(errc::FormatError, "bad histogram count '" + w + "'");
        h.counts.push_back(*c);
    }
    if (h.counts.size() != static_cast<std::size_t>(h.nbins))
        throw Error(errc::FormatError, "expected " + std::to_string(h.nbins) + " counts, got " + std::to_string(h.counts.size()));
    for (std::size_t i = 2; i < lines.size(); ++i)
        if (!lines[i].empty()) throw Error(errc::FormatError, "trailing data in histogram");
    return h;
}

std::string format_histogram(const Histogram& h) {
    std::string out = "HIST " + h.name + " " + std::to_string(h.nbins) + " " + format_number(h.lo) + " " + format_number(h.hi) + "\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        if (i) out += ' ';
        out += format_number(h.counts[i]);
    }
    return out + "\n";
}

Histogram merge_histograms(const std::vector<Histogram>& inputs) {
    if (inputs.empty()) throw Error(errc::EmptyInput, "no histograms to merge");
    Histogram out = inputs.front();
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        const auto& h = inputs[i];
        if (h.name != out.name || h.nbins != out.nbins || h.lo != out.lo || h.hi != out.hi)
            throw Error(errc::BinningMismatch, out.name + "(" + std::to_string(out.nbins) + ") vs " + h.name + "(" +
                                                   std::to_string(h.nbins) + ")");
        for (int b = 0; b < out.nbins; ++b) out.counts[b] += h.counts[b];
    }
    return out;
}

Table parse_table(std::string_view text) {
    Table t;
    bool header = true;
    std::size_t start = 0;
    int lineno = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(start, nl - start);
        start = nl + 1;
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        for (;;) {
            auto tab = line.find('\t', pos);
            cells.emplace_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
            if (tab == std::string_view::npos) break;
            pos = tab + 1;
        }
        if (header) {
            t.columns = std::move(cells);
            header = false;
        } else {
            if (cells.size() != t.columns.size())
                throw Error(errc::FormatError, "row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                                   " cells, expected " + std::to_string(t.columns.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (header) throw Error(errc::FormatError, "table has no header row");
    return t;
}

std::string format_table(const Table& t) {
    std::string out = join(t.columns, "\t") + "\n";
    for (const auto& row : t.rows) out += join(row, "\t") + "\n";
    return out;
}

Table merge_tables(const std::vector<Table>& inputs) {
    if (inputs.empty()) throw Error(errc::EmptyInput, "no tables to merge");
    Table out = inputs.front();
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        if (inputs[i].columns != out.columns)
            throw Error(errc::SchemaMismatch, "[" + join(out.columns, ",") + "] vs [" + join(inputs[i].columns, ",") + "]");
        out.rows.insert(out.rows.end(), inputs[i].rows.begin(), inputs[i].rows.end());
    }
    return out;
}

SplitPlan parse_plan(const KvDocument& doc) {
    SplitPlan plan;
    for (const auto& [key, value] : doc.entries()) {
        if (!key.starts_with("subjob.")) throw Error(errc::InvalidPlan, "unexpected key '" + key + "'");
    }
    for (int i : doc.indices("subjob")) {
        auto base = "subjob." + std::to_string(i) + ".";
        SubjobSpec spec;
        auto files = doc.get(base + "files");
        if (!files) throw Error(errc::InvalidPlan, base + "files missing");
        spec.files = split(*files, ',');
        for (const auto& [key, value] : doc.entries()) {
            if (!key.starts_with(base)) continue;
            auto rest = key.substr(base.size());
            if (rest == "files") continue;
            if (rest.starts_with("param.") && rest.size() > 6) spec.params[rest.substr(6)] = value;
            else throw Error(errc::InvalidPlan, "plans may only override parameters ('" + key + "')");
        }
        plan.subjobs.push_back(std::move(spec));
    }
    return plan;
}

KvDocument plan_to_kv(const SplitPlan& plan) {
    KvDocument doc;
    for (std::size_t i = 0; i < plan.subjobs.size(); ++i) {
        auto base = "subjob." + std::to_string(i) + ".";
        doc.set(base + "files", join(plan.subjobs[i].files, ", "));
        for (const auto& [k, v] : plan.subjobs[i].params) doc.set(base + "param." + k, v);
    }
    return doc;
}

SplitPlan plan_by_input_files(const std::vector<std::string>& files, int max_files) {
    if (max_files < 1) throw Error(errc::ValidationError, "max files per subjob must be >= 1");
    SplitPlan plan;
    for (std::size_t i = 0; i < files.size(); i += static_cast<std::size_t>(max_files)) {
        SubjobSpec spec;
        auto end = std::min(files.size(), i + static_cast<std::size_t>(max_files));
        spec.files.assign(files.begin() + static_cast<std::ptrdiff_t>(i), files.begin() + static_cast<std::ptrdiff_t>(end));
        plan.subjobs.push_back(std::move(spec));
    }
    return plan;
}

void validate_plan(const SplitPlan& plan, const std::vector<std::string>& parent_files) {
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < parent_files.size(); ++i) position[parent_files[i]] = i;
    std::set<std::string> seen;
    for (std::size_t s = 0; s < plan.subjobs.size(); ++s) {
        const auto& files = plan.subjobs[s].files;
        if (files.empty()) throw Error(errc::InvalidPlan, "subjob " + std::to_string(s) + " is empty");
        std::size_t last = 0;
        for (std::size_t k = 0; k < files.size(); ++k) {
            auto it = position.find(files[k]);
            if (it == position.end()) throw Error(errc::InvalidPlan, "unknown file '" + files[k] + "'");
            if (!seen.insert(files[k]).second) throw Error(errc::InvalidPlan, "not disjoint");
            if (k > 0 && it->second < last) throw Error(errc::InvalidPlan, "not order-preserving");
            last = it->second;
        }
    }
    if (seen.size() != parent_files.size()) throw Error(errc::InvalidPlan, "not covering");
}

fs::path job_output_dir(const Store& store, const Job& job) {
    fs::path out = job.output_dir.empty() ? fs::path("output") : fs::path(job.output_dir);
    return out.is_absolute() ? out : store.job_dir(job.id) / out;
}

namespace {

Scalar infer_scalar(const std::string& text) {
    std::int64_t i = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
    if (!text.empty() && ec == std::errc() && ptr == text.data() + text.size()) return i;
    if (auto d = to_double(text)) return *d;
    return text;
}

Scalar override_value(const Scalar& current, const std::string& text) {
    ValueKind kind = std::holds_alternative<bool>(current)           ? ValueKind::Boolean
                     : std::holds_alternative<std::int64_t>(current) ? ValueKind::Integer
                     : std::holds_alternative<double>(current)       ? ValueKind::Real
                                                                     : ValueKind::String;
    try {
        return parse_scalar(kind, text);
    } catch (const Error& e) {
        throw Error(errc::InvalidPlan, "parameter override: " + e.detail());
    }
}

Job make_subjob(const Job& parent, const SubjobSpec& spec, std::size_t index) {
    Job sub = parent;
    sub.id.clear();
    sub.name = parent.name + "." + std::to_string(index + 1);
    sub.subjob_ids.clear();
    sub.parent_id = parent.id;
    sub.status = JobStatus::InPreparation;
    sub.output_dir = "output";
    sub.ticket.clear();
    sub.transfer.clear();
    sub.status_reason.clear();
    std::set<std::string> keep(spec.files.begin(), spec.files.end());
    std::erase_if(sub.workflow.elements, [&](const WorkflowElement& el) {
        auto* in = std::get_if<InputFile>(&el);
        return in && !keep.count(in->name);
    });
    std::erase_if(sub.application.input_files, [&](const InputFile& f) { return !keep.count(f.name); });
    for (const auto& [name, text] : spec.params) {
        bool found = false;
        for (auto& el : sub.workflow.elements) {
            if (auto* p = std::get_if<Parameter>(&el); p && p->name == name) {
                p->value = override_value(p->value, text);
                found = true;
            }
        }
        for (auto& p : sub.application.parameters) {
            if (p.name == name) {
                p.value = override_value(p.value, text);
                found = true;
            }
        }
        if (!found) sub.application.parameters.push_back({name, infer_scalar(text)});
    }
    return sub;
}

std::vector<std::string> input_names(const Job& job) {
    std::vector<std::string> out;
    for (const auto& in : job.declared_inputs()) out.push_back(in.name);
    return out;
}

Job splittable(Store& store, const std::string& parent_id) {
    Job parent = store.load(parent_id);
    if (is_active(parent.status)) throw Error(errc::JobActive, parent_id + " is " + std::string(to_string(parent.status)));
    if (parent.status != JobStatus::InPreparation)
        throw Error(errc::IllegalTransition, parent_id + " is " + std::string(to_string(parent.status)));
    if (!parent.subjob_ids.empty()) throw Error(errc::InvalidPlan, parent_id + " is already split");
    if (parent.parent_id) throw Error(errc::InvalidPlan, parent_id + " is itself a subjob");
    if (parent.declared_inputs().empty()) throw Error(errc::NoInputFiles, parent_id);
    return parent;
}

}  // namespace

std::vector<Job> apply_plan(Store& store, const std::string& parent_id, const SplitPlan& plan, std::int64_t now) {
    std::lock_guard lock(store.writer());
    Job parent = splittable(store, parent_id);
    validate_plan(plan, input_names(parent));
    std::vector<Job> subs;
    for (std::size_t i = 0; i < plan.subjobs.size(); ++i) {
        Job sub = make_subjob(parent, plan.subjobs[i], i);
        sub.validate();
        subs.push_back(std::move(sub));
    }
    for (auto& sub : subs) {
        sub.id = store.allocate_id();
        sub.created_at = sub.updated_at = now;
        store.save(sub);
        // Hand-placed inputs travel with the subjob.
        for (const auto& in : sub.declared_inputs()) {
            auto src = store.job_dir(parent.id) / "input" / in.name;
            if (in.location.empty() && fs::exists(src)) copy_file_over(src, store.job_dir(sub.id) / "input" / in.name);
        }
        parent.subjob_ids.push_back(sub.id);
    }
    parent.updated_at = now;
    store.save(parent);
    return subs;
}

std::vector<Job> split_by_input_files(Store& store, const std::string& parent_id, int max_files, std::int64_t now) {
    std::lock_guard lock(store.writer());
    Job parent = splittable(store, parent_id);
    return apply_plan(store, parent_id, plan_by_input_files(input_names(parent), max_files), now);
}

std::vector<Job> split_by_script(Store& store, const std::string& parent_id, const fs::path& script,
                                 const std::map<std::string, std::string>& options, std::int64_t now) {
    std::lock_guard lock(store.writer());
    Job parent = splittable(store, parent_id);
    if (!fs::exists(script)) throw Error(errc::ScriptFailure, "no splitter script " + script.string());
    auto dir = store.job_dir(parent_id);
    auto plan_path = dir / "split.plan";
    fs::remove(plan_path);
    std::vector<std::string> argv{"sh", fs::absolute(script).string(), plan_path.string()};
    for (const auto& name : input_names(parent)) argv.push_back(name);
    ProcessEnv env;
    for (const auto& [k, v] : options) env.set["FORGE_SPLIT_" + to_upper(k)] = v;
    auto r = run_sync(dir, argv, env);
    if (r.exit_code != 0) throw Error(errc::ScriptFailure, "exit " + std::to_string(r.exit_code) + ": " + std::string(trim(r.err)));
    if (!fs::exists(plan_path)) throw Error(errc::InvalidPlan, "splitter wrote no plan");
    KvDocument doc;
    try {
        doc = KvDocument::load(plan_path);
    } catch (const Error& e) {
        throw Error(errc::InvalidPlan, e.detail());
    }
    return apply_plan(store, parent_id, parse_plan(doc), now);
}

MergeReport collect_outputs(Store& store, const std::string& parent_id) {
    std::lock_guard lock(store.writer());
    Job parent = store.load(parent_id);
    if (parent.subjob_ids.empty()) throw Error(errc::InvalidPlan, parent_id + " has no subjobs");
    std::vector<Job> subs;
    for (const auto& id : parent.subjob_ids) {
        Job sub = store.load(id);
        if (!is_terminal(sub.status)) throw Error(errc::SubjobsActive, id + " is " + std::string(to_string(sub.status)));
        subs.push_back(std::move(sub));
    }
    auto dest = job_output_dir(store, parent);
    fs::create_directories(dest);
    MergeReport report;
    for (const auto& out : parent.declared_outputs()) {
        std::vector<std::pair<std::string, fs::path>> present;
        for (const auto& sub : subs) {
            auto path = job_output_dir(store, sub) / out.name;
            if (sub.status == JobStatus::Completed && fs::exists(path)) present.emplace_back(sub.id, path);
            else report.missing.push_back(sub.id + "/" + out.name);
        }
        if (present.empty()) continue;
        if (out.name.ends_with(".hist")) {
            std::vector<Histogram> hs;
            for (const auto& [id, path] : present) hs.push_back(parse_histogram(read_file(path)));
            write_file_atomic(dest / out.name, format_histogram(merge_histograms(hs)));
            report.merged.push_back(out.name);
        } else if (out.name.ends_with(".tsv")) {
            std::vector<Table> ts;
            for (const auto& [id, path] : present) ts.push_back(parse_table(read_file(path)));
            write_file_atomic(dest / out.name, format_table(merge_tables(ts)));
            report.merged.push_back(out.name);
        } else {
            for (const auto& [id, path] : present) {
                auto name = out.name + "." + id;
                copy_file_over(path, dest / name);
                report.copied.push_back(name);
            }
        }
    }
    report.partial = !report.missing.empty();
    return report;
}

}  // namespace forge
