#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "forge/error.hpp"
#include "forge/kv.hpp"
#include "forge/service.hpp"
#include "forge/strings.hpp"
#include "forge_tools/cli.hpp"
#include "oracles/counting.hpp"
#include "oracles/matcher.hpp"
#include "oracles/reachability.hpp"
#include "support/test_support.hpp"

namespace forge::acceptance {

using testing::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome fail(std::string why) { return {false, std::move(why)}; }

template <class F>
Outcome guarded(F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        return fail(std::string("exception: ") + e.what());
    }
}

/// count-demo overrides: the template's element.1 input becomes files[0],
/// the rest follow after its output element.
Overrides count_inputs(const std::vector<fs::path>& files) {
    Overrides o{{"element.1.name", files[0].filename().string()}, {"element.1.location", files[0].string()}};
    for (std::size_t i = 1; i < files.size(); ++i) {
        auto p = "element." + std::to_string(2 + i);
        o[p + ".kind"] = "input";
        o[p + ".name"] = files[i].filename().string();
        o[p + ".location"] = files[i].string();
    }
    return o;
}

}  // namespace

Outcome end_to_end_local() {
    return guarded([]() -> Outcome {
        auto start = Clock::now();
        TempDir dir;
        Service svc(testing::service_options(dir / "store"));
        auto job = svc.create("generic-exec", {{"name", "hello"}, {"element.0.arg.0", "hello from forge"}});
        svc.configure(job.id);
        if (!fs::exists(svc.store().job_dir(job.id) / "script.sh")) return fail("configure wrote no script.sh");
        svc.submit(job.id);
        auto deadline = Clock::now() + std::chrono::duration<double>(kLocalFlowSeconds);
        while (!is_terminal(svc.get(job.id).status) && Clock::now() < deadline) {
            svc.poll();
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        auto final_job = svc.get(job.id);
        if (final_job.status != JobStatus::Completed)
            return fail("status " + std::string(to_string(final_job.status)) + " " + final_job.status_reason);
        svc.fetch(job.id);
        auto out = job_output_dir(svc.store(), final_job) / "stdout.txt";
        auto text = read_file(out);
        double took = seconds_since(start);
        if (text != "hello from forge\n") return fail("stdout.txt holds '" + text + "'");
        if (took >= kLocalFlowSeconds) return fail("took " + std::to_string(took) + " s");
        std::ostringstream d;
        d << "completed in " << took << " s";
        return {true, d.str()};
    });
}

Outcome split_merge_oracle(const std::vector<int>& max_files, int files) {
    return guarded([&]() -> Outcome {
        auto start = Clock::now();
        TempDir dir;
        auto store = dir / "store";
        fs::create_directories(store);
        // batchsim in real mode with a single two-slot queue.
        write_file(store / "backends.meta",
                   "batchsim.mode = real\nbatchsim.tick_seconds = 1\nqueue.0.name = short\nqueue.0.limit_ticks = 60\n"
                   "queue.0.slots = 2\n");
        Service svc(testing::service_options(store));

        std::mt19937 rng(1234);
        std::vector<fs::path> inputs;
        std::vector<long> expected_counts;
        const std::string pattern = "event";
        for (int i = 0; i < files; ++i) {
            std::string text;
            int lines = std::uniform_int_distribution<int>(0, 45)(rng);
            for (int l = 0; l < lines; ++l) {
                int kind = std::uniform_int_distribution<int>(0, 3)(rng);
                text += kind == 0 ? "noise line\n" : kind == 1 ? "event\n" : kind == 2 ? "an event and event\n" : "evenT\n";
            }
            auto path = dir / ("in" + std::to_string(i) + ".txt");
            write_file(path, text);
            inputs.push_back(path);
            expected_counts.push_back(oracle::count_occurrences(text, pattern));
        }
        auto oracle_bins = oracle::bin_counts(expected_counts, 10, 0, 100);

        Overrides base = count_inputs(inputs);
        base["backend"] = "batchsim";

        auto run_to_end = [&](const std::string& id) {
            svc.submit(id);
            auto deadline = Clock::now() + std::chrono::duration<double>(kSplitMergeSeconds);
            while (!is_terminal(svc.get(id).status) && Clock::now() < deadline) {
                svc.poll();
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
            return svc.get(id);
        };
        auto histogram_of = [&](const Job& j) { return parse_histogram(read_file(job_output_dir(svc.store(), j) / "counts.hist")); };

        auto whole = svc.create("count-demo", base);
        auto whole_done = run_to_end(whole.id);
        if (whole_done.status != JobStatus::Completed) return fail("unsplit job ended " + std::string(to_string(whole_done.status)));
        auto reference = histogram_of(whole_done);
        for (int b = 0; b < 10; ++b)
            if (reference.counts[static_cast<std::size_t>(b)] != static_cast<double>(oracle_bins[static_cast<std::size_t>(b)]))
                return fail("unsplit histogram disagrees with the counting oracle at bin " + std::to_string(b));

        std::ostringstream d;
        for (int max : max_files) {
            auto job = svc.create("count-demo", base);
            auto subs = svc.split(job.id, max);
            std::size_t want = static_cast<std::size_t>((files + max - 1) / max);
            if (subs.size() != want) return fail("max " + std::to_string(max) + ": " + std::to_string(subs.size()) + " subjobs");
            auto parent = run_to_end(job.id);
            if (parent.status != JobStatus::Completed)
                return fail("max " + std::to_string(max) + ": parent ended " + std::string(to_string(parent.status)));
            auto report = svc.merge(job.id);
            if (report.partial) return fail("max " + std::to_string(max) + ": partial merge");
            auto merged = histogram_of(svc.get(job.id));
            if (merged.counts != reference.counts) return fail("max " + std::to_string(max) + ": merged histogram differs");
            d << "max=" << max << " ok (" << subs.size() << " subjobs); ";
        }
        double took = seconds_since(start);
        if (took >= kSplitMergeSeconds) return fail("took " + std::to_string(took) + " s");
        d << took << " s";
        return {true, d.str()};
    });
}

Outcome jdl_goldens() {
    return guarded([]() -> Outcome {
        TempDir dir;
        auto store = dir / "store";
        fs::create_directories(store / "templates");
        auto calib = dir / "calibration.txt";
        write_file(calib, "calibration\n");
        auto backends = read_file(testing::source_share_dir() / "backends.meta");
        write_file(store / "backends.meta", backends + "replica.0.lfn = calibration\nreplica.0.path = " + calib.string() + "\n");
        const std::vector<std::string> fixtures = {"sim", "echo-noreq", "two-numeric", "string-req", "quoted-args"};
        for (const auto& f : fixtures) fs::copy_file(testing::golden_dir() / (f + ".meta"), store / "templates" / (f + ".meta"));
        Service svc(testing::service_options(store));
        for (const auto& f : fixtures) {
            auto job = svc.configure(svc.create(f, {}).id);
            auto produced = read_file(svc.store().job_dir(job.id) / "jdl.txt");
            auto golden = read_file(testing::golden_dir() / (f + ".jdl"));
            if (produced != golden) return fail(f + ": jdl.txt differs from golden");
            auto doc = parse_jdl(produced);
            auto exe = job.workflow.executables().front();
            std::vector<std::string> in{"script.sh"}, out{"stdout.txt", "stderr.txt"};
            for (const auto& i : job.declared_inputs()) in.push_back(i.name);
            for (const auto& o : job.declared_outputs()) out.push_back(o.name);
            if (doc.executable != exe.name || doc.arguments != exe.args) return fail(f + ": executable lost in round trip");
            if (doc.input_sandbox != in || doc.output_sandbox != out) return fail(f + ": sandbox lost in round trip");
            if (!(doc.requirements == job.requirements)) return fail(f + ": requirements lost in round trip");
        }
        return {true, std::to_string(fixtures.size()) + " fixtures byte-identical and round-tripped"};
    });
}

Outcome matchmaking_exhaustive(int max_set_size) {
    return guarded([&]() -> Outcome {
        // Three attribute levels per CE, three free-slot levels.
        const double memory[] = {256, 512, 1024};
        const char* queue[] = {"short", "short", "long"};
        struct Pattern {
            std::vector<oracle::SimpleReq> simple;
            ResourceRequirements reqs;
        };
        std::vector<Pattern> patterns;
        auto add = [&](std::vector<oracle::SimpleReq> simple) {
            Pattern p;
            p.simple = simple;
            for (const auto& s : simple) {
                if (s.numeric) p.reqs.entries.push_back({s.attribute, s.number});
                else p.reqs.entries.push_back({s.attribute, s.text});
            }
            patterns.push_back(std::move(p));
        };
        add({});
        for (double m : {128.0, 256.0, 512.0, 768.0, 1024.0, 2048.0}) add({{"MinMemoryMB", true, m, {}}});
        add({{"Queue", false, 0, "short"}});
        add({{"Queue", false, 0, "long"}});
        add({{"MinMemoryMB", true, 512, {}}, {"Queue", false, 0, "long"}});
        add({{"MinMemoryMB", true, 300, {}}, {"Queue", false, 0, "short"}});

        long cases = 0;
        for (int size = 1; size <= max_set_size; ++size) {
            long combos = 1;
            for (int i = 0; i < size; ++i) combos *= 9;
            for (long code = 0; code < combos; ++code) {
                std::vector<oracle::SimpleCe> simple;
                std::vector<ComputingElement> ces;
                std::vector<int> free;
                long c = code;
                for (int i = 0; i < size; ++i) {
                    int level = static_cast<int>(c % 3);
                    int slots = static_cast<int>((c / 3) % 3);
                    c /= 9;
                    std::string name = "ce" + std::to_string(i);
                    simple.push_back({name, {{"MemoryMB", memory[level]}}, {{"Queue", queue[level]}}, slots});
                    ces.push_back({name, {{"MemoryMB", memory[level]}, {"Queue", std::string(queue[level])}}, 4});
                    free.push_back(slots);
                }
                for (const auto& p : patterns) {
                    ++cases;
                    auto want = oracle::brute_force_select(simple, p.simple);
                    auto got = select_ce(ces, free, p.reqs);
                    if (want != got) {
                        std::ostringstream d;
                        d << "disagreement at set size " << size << " code " << code;
                        return fail(d.str());
                    }
                }
            }
        }
        return {true, std::to_string(cases) + " instances, 100% agreement"};
    });
}

namespace {

/// Test component that records whether it is still alive.
struct Probe : bus::Component {
    Probe(std::string name, std::shared_ptr<std::map<std::string, bool>> alive) : name(std::move(name)), alive(std::move(alive)) {
        (*this->alive)[this->name] = true;
    }
    ~Probe() override { (*alive)[name] = false; }
    std::string call() const {
        if (!(*alive)[name]) throw std::logic_error("call reached destroyed instance " + name);
        return name;
    }
    std::string name;
    std::shared_ptr<std::map<std::string, bool>> alive;
};

struct Graph {
    std::vector<std::vector<int>> v1;  // dependencies of version 1
    std::vector<std::vector<int>> v2;  // dependencies of version 2
};

std::string node_name(int i, int version) { return "n" + std::to_string(i) + ".v" + std::to_string(version); }
int node_index(const std::string& actual) { return std::stoi(actual.substr(1, actual.find('.') - 1)); }

void register_graph(bus::Bus& bus, const Graph& g, const std::shared_ptr<std::map<std::string, bool>>& alive) {
    for (std::size_t i = 0; i < g.v1.size(); ++i) {
        for (int version : {1, 2}) {
            const auto& deps = version == 1 ? g.v1[i] : g.v2[i];
            bus::ComponentDescriptor d;
            d.actual_name = node_name(static_cast<int>(i), version);
            d.logical_name = "n" + std::to_string(i);
            d.functional_names = {"f" + std::to_string(i)};
            d.priority = version == 1 ? 10 : 0;
            for (int dep : deps) d.dependencies.push_back("f" + std::to_string(dep));
            auto name = d.actual_name;
            bus.register_component(d, [name, alive](bus::ConnectContext&) { return std::make_shared<Probe>(name, alive); });
        }
    }
}

std::vector<std::vector<int>> random_dag(std::mt19937& rng, int n, double density) {
    std::vector<std::vector<int>> deps(static_cast<std::size_t>(n));
    std::bernoulli_distribution edge(density);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (edge(rng)) deps[static_cast<std::size_t>(i)].push_back(j);
    return deps;
}

std::set<int> connected_indices(const bus::Bus& bus) {
    std::set<int> out;
    for (const auto& a : bus.connected()) out.insert(node_index(a));
    return out;
}

}  // namespace

Outcome bus_properties(int seeds, int max_nodes) {
    return guarded([&]() -> Outcome {
        long checks = 0;
        for (int seed = 0; seed < seeds; ++seed) {
            std::mt19937 rng(static_cast<unsigned>(seed));
            int n = std::uniform_int_distribution<int>(1, max_nodes)(rng);
            double density = std::uniform_real_distribution<double>(0.1, 0.6)(rng);
            Graph g{random_dag(rng, n, density), random_dag(rng, n, density)};
            auto alive = std::make_shared<std::map<std::string, bool>>();
            auto where = [&](const std::string& what) { return "seed " + std::to_string(seed) + ": " + what; };

            bus::Bus bus;
            register_graph(bus, g, alive);
            std::set<int> roots;
            std::vector<std::pair<int, bus::ComponentHandle>> handles;
            int root_count = std::uniform_int_distribution<int>(1, n)(rng);
            for (int k = 0; k < root_count; ++k) {
                int r = std::uniform_int_distribution<int>(0, n - 1)(rng);
                handles.emplace_back(r, bus.connect("n" + std::to_string(r)));
                roots.insert(r);
            }
            if (connected_indices(bus) != oracle::connected_from(g.v1, roots)) return fail(where("connect closure"));

            // Handles for every connected component, taken before the disconnect.
            for (int c : connected_indices(bus)) handles.emplace_back(c, bus.acquire("f" + std::to_string(c)));
            auto before = connected_indices(bus);
            std::vector<int> pool(before.begin(), before.end());
            int target = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
            auto removed = bus.disconnect("f" + std::to_string(target));
            auto expected = oracle::expected_after_disconnect(g.v1, roots, target);
            auto after = connected_indices(bus);
            ++checks;
            if (after != expected) return fail(where("disconnect propagation differs from reachability oracle"));
            std::set<int> removed_idx;
            for (const auto& r : removed) removed_idx.insert(node_index(r));
            std::set<int> diff;
            std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::inserter(diff, diff.end()));
            if (removed_idx != diff) return fail(where("returned set differs from the removed components"));
            for (const auto& [idx, h] : handles) {
                try {
                    auto name = h.call<Probe>([](const Probe& p) { return p.call(); });
                    if (!after.count(idx)) return fail(where("call through a removed component's handle succeeded"));
                    if (node_index(name) != idx) return fail(where("handle reached the wrong component"));
                } catch (const Error& e) {
                    if (e.name() != errc::DisconnectedComponent) return fail(where("unexpected " + e.name()));
                    if (after.count(idx)) return fail(where("live component unreachable through its handle"));
                }
            }
            for (int r : std::set<int>(roots))
                if (oracle::closure(g.v1)[static_cast<std::size_t>(r)][static_cast<std::size_t>(target)]) roots.erase(r);
            if (after.empty()) continue;

            // Replace a connected component by its version 2.
            std::vector<int> live(after.begin(), after.end());
            int victim = live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)];
            auto h = bus.acquire("f" + std::to_string(victim));
            auto gen = h.generation();
            auto functional = h.functional_names();
            bus.replace("f" + std::to_string(victim), node_name(victim, 2));
            ++checks;
            if (h.generation() != gen + 1) return fail(where("replace did not bump the generation"));
            if (h.functional_names() != functional) return fail(where("replace changed the functional names"));
            if (h.call<Probe>([](const Probe& p) { return p.call(); }) != node_name(victim, 2))
                return fail(where("handle does not dispatch to the replacement"));
            if ((*alive)[node_name(victim, 1)]) return fail(where("replaced instance still alive"));
            auto mixed = g.v1;
            mixed[static_cast<std::size_t>(victim)] = g.v2[static_cast<std::size_t>(victim)];
            auto want = oracle::connected_from(mixed, roots);
            if (connected_indices(bus) != want) return fail(where("dependencies after replace differ from the oracle"));
            for (const auto& [name, is_alive] : *alive) {
                bool connected = bus.is_connected(name);
                if (connected != is_alive) return fail(where("liveness of " + name + " disagrees with the bus"));
            }
        }
        return {true, std::to_string(seeds) + " seeds, " + std::to_string(checks) + " operations checked"};
    });
}

namespace {

fs::path virtual_store(const TempDir& dir, int limit, int slots) {
    auto store = dir / "store";
    fs::create_directories(store);
    write_file(store / "backends.meta", "batchsim.mode = virtual\nqueue.0.name = sim\nqueue.0.limit_ticks = " +
                                            std::to_string(limit) + "\nqueue.0.slots = " + std::to_string(slots) + "\n");
    return store;
}

Overrides costed_job(const std::string& name, int cost) {
    return {{"name", name},
            {"backend", "batchsim"},
            {"element.0.name", "true"},
            {"element.0.arg.0", ""},
            {"requirement.0.attribute", "Cost"},
            {"requirement.0.type", "number"},
            {"requirement.0.value", std::to_string(cost)}};
}

std::optional<std::int64_t> finish_of(Service& svc, const std::string& ticket) {
    std::optional<std::int64_t> out;
    svc.with_handler("batchsim", [&](JobHandler& h) { out = dynamic_cast<BatchSimHandler&>(h).finish_time(ticket); });
    return out;
}

}  // namespace

Outcome monitor_detection_bound(int jobs, int max_cost, unsigned seed) {
    return guarded([&]() -> Outcome {
        TempDir dir;
        auto clock = std::make_shared<ManualClock>(0);
        auto opts = testing::service_options(virtual_store(dir, 100, 4));
        opts.sim_clock = clock;
        Service svc(opts);
        std::mt19937 rng(seed);
        std::vector<std::string> ids;
        for (int i = 0; i < jobs; ++i) {
            int cost = std::uniform_int_distribution<int>(1, max_cost)(rng);
            auto job = svc.create("generic-exec", costed_job("j" + std::to_string(i), cost));
            svc.submit(job.id);
            ids.push_back(job.id);
        }
        std::map<std::string, std::int64_t> detected;
        for (std::int64_t t = 1; t < 100000 && detected.size() < ids.size(); ++t) {
            clock->set(t);
            svc.poll();
            for (const auto& id : ids)
                if (!detected.count(id) && is_terminal(svc.get(id).status)) detected[id] = t;
        }
        std::int64_t worst = 0;
        for (const auto& id : ids) {
            auto job = svc.get(id);
            if (!detected.count(id)) return fail(id + " never reached a terminal state");
            if (job.status != JobStatus::Completed) return fail(id + " ended " + std::string(to_string(job.status)));
            auto finished = finish_of(svc, job.ticket);
            if (!finished) return fail(id + ": simulator has no finish time");
            auto lag = detected[id] - *finished;
            worst = std::max(worst, lag);
            if (lag < 0 || lag > kDetectionTicks) return fail(id + " detected " + std::to_string(lag) + " ticks late");
        }
        return {true, std::to_string(jobs) + " jobs, worst lag " + std::to_string(worst) + " ticks"};
    });
}

Outcome walltime_enforcement() {
    return guarded([]() -> Outcome {
        TempDir dir;
        auto clock = std::make_shared<ManualClock>(0);
        auto opts = testing::service_options(virtual_store(dir, 1, 2));
        opts.sim_clock = clock;
        Service svc(opts);
        auto slow = svc.create("generic-exec", costed_job("slow", 2));
        auto fast = svc.create("generic-exec", costed_job("fast", 1));
        svc.submit(slow.id);
        svc.submit(fast.id);
        for (std::int64_t t = 1; t <= 10; ++t) {
            clock->set(t);
            svc.poll();
        }
        auto s = svc.get(slow.id);
        auto f = svc.get(fast.id);
        if (s.status != JobStatus::Failed || s.status_reason != "walltime")
            return fail("cost 2 in limit 1 ended " + std::string(to_string(s.status)) + " '" + s.status_reason + "'");
        if (f.status != JobStatus::Completed) return fail("cost 1 in limit 1 ended " + std::string(to_string(f.status)));
        return {true, "cost 2 -> failed(walltime), cost 1 -> completed"};
    });
}

namespace {

std::string random_text(std::mt19937& rng) {
    static const std::string alphabet = "abcXYZ019 _-\"\\,;={}#.";
    int len = std::uniform_int_distribution<int>(0, 8)(rng);
    std::string s;
    for (int i = 0; i < len; ++i) s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    return s;
}

Scalar random_scalar(std::mt19937& rng, ValueKind kind, const std::optional<Range>& range, const ValueType& type) {
    switch (kind) {
        case ValueKind::Boolean: return std::bernoulli_distribution(0.5)(rng);
        case ValueKind::Integer: {
            auto lo = range ? static_cast<std::int64_t>(range->min) : -1000;
            auto hi = range ? static_cast<std::int64_t>(std::min(range->max, 1e6)) : 1000;
            return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
        }
        case ValueKind::Real: {
            double lo = range ? range->min : -1000;
            double hi = range ? range->max : 1000;
            // Multiples of 1/8 print exactly.
            auto steps = static_cast<std::int64_t>((hi - lo) * 8);
            return lo + static_cast<double>(std::uniform_int_distribution<std::int64_t>(0, steps)(rng)) / 8.0;
        }
        case ValueKind::Enum: return type.choices[std::uniform_int_distribution<std::size_t>(0, type.choices.size() - 1)(rng)];
        default: return random_text(rng);
    }
}

/// What a render/parse cycle can preserve: enabled sequence entries and
/// values that differ from the defaults.
OptionSet visible_part(const OptionSet& set, const OptionSchema& schema) {
    OptionSet out;
    for (const auto& spec : schema.options) {
        auto key = spec.key();
        if (auto it = set.sequences.find(key); it != set.sequences.end()) {
            std::vector<SequenceEntry> enabled;
            std::vector<Scalar> names;
            for (const auto& e : it->second)
                if (e.enabled) {
                    enabled.push_back(e);
                    names.push_back(e.entry);
                }
            if (!(Value(names) == spec.default_value)) out.sequences[key] = enabled;
        } else if (auto a = set.assignments.find(key); a != set.assignments.end()) {
            if (!(a->second == spec.default_value)) out.assignments[key] = a->second;
        }
    }
    return out;
}

}  // namespace

Outcome options_round_trip(int sets, unsigned seed) {
    return guarded([&]() -> Outcome {
        auto schema = OptionSchema::load(testing::source_share_dir() / "schemas" / "demo.schema");
        std::mt19937 rng(seed);
        long rejected = 0;
        for (int n = 0; n < sets; ++n) {
            OptionSet set;
            for (const auto& spec : schema.options) {
                if (!std::bernoulli_distribution(0.6)(rng)) continue;
                if (spec.type.kind == ValueKind::Sequence) {
                    static const char* algs[] = {"Reader", "Counter", "Writer", "Filter", "Histogrammer"};
                    std::vector<SequenceEntry> entries;
                    int len = std::uniform_int_distribution<int>(0, 5)(rng);
                    for (int i = 0; i < len; ++i)
                        entries.push_back({algs[std::uniform_int_distribution<int>(0, 4)(rng)], std::bernoulli_distribution(0.8)(rng)});
                    define_sequence(set, schema, spec.key(), entries);
                } else if (spec.type.kind == ValueKind::List) {
                    std::vector<Scalar> items;
                    int len = std::uniform_int_distribution<int>(0, 4)(rng);
                    for (int i = 0; i < len; ++i) items.push_back(random_scalar(rng, spec.type.element, spec.range, spec.type));
                    set_option(set, schema, spec.owner, spec.name, Value(items));
                } else {
                    auto s = random_scalar(rng, spec.type.kind, spec.range, spec.type);
                    set_option(set, schema, spec.owner, spec.name, std::visit([](auto&& x) -> Value { return x; }, s));
                }
            }
            auto text = render_options(set, schema, OptionFormat::OptionsText);
            auto parsed = parse_options(text, schema);
            if (!(parsed == visible_part(set, schema))) return fail("set " + std::to_string(n) + " changed in render/parse");

            // Out-of-range attempts leave the set untouched.
            for (const auto& spec : schema.options) {
                if (!spec.range) continue;
                auto snapshot = set;
                Value bad;
                if (spec.type.kind == ValueKind::Integer) bad = static_cast<std::int64_t>(spec.range->max) + 1;
                else if (spec.type.kind == ValueKind::Real) bad = spec.range->max + 0.5;
                else if (spec.type.kind == ValueKind::List) bad = std::vector<Scalar>{spec.range->min - 1.0};
                else continue;
                try {
                    set_option(set, schema, spec.owner, spec.name, bad);
                    return fail(spec.key() + ": out-of-range value accepted");
                } catch (const Error& e) {
                    if (e.name() != errc::OutOfRange) return fail(spec.key() + ": rejected with " + e.name());
                }
                if (!(set == snapshot)) return fail(spec.key() + ": rejected assignment modified the set");
                ++rejected;
            }
        }

        // Presentation selector, one case per value type.
        const std::vector<std::pair<std::string, Presentation>> cases = {
            {"boolean", Presentation::Checkbox},     {"enum", Presentation::Dropdown},
            {"integer", Presentation::TextEntry},    {"real", Presentation::TextEntry},
            {"string", Presentation::TextEntry},     {"list:string", Presentation::ListAppend},
            {"sequence", Presentation::SequenceArranger}};
        for (const auto& [type, want] : cases) {
            OptionSpec spec;
            spec.name = "X";
            spec.type = ValueType::parse(type);
            if (presentation_for(spec).kind != want) return fail("presentation for " + type);
        }
        return {true, std::to_string(sets) + " sets round-tripped, " + std::to_string(rejected) + " out-of-range attempts rejected"};
    });
}

namespace {

struct Crash : std::runtime_error {
    Crash() : std::runtime_error("simulated crash") {}
};

}  // namespace

Outcome registry_crash_safety(int trials, unsigned seed) {
    return guarded([&]() -> Outcome {
        std::mt19937 rng(seed);
        for (int trial = 0; trial < trials; ++trial) {
            TempDir dir;
            std::map<std::string, std::pair<Job, Job>> versions;  // id -> (prior, attempted)
            {
                Store store(dir.path());
                for (int i = 0; i < 3; ++i) {
                    Job j;
                    j.id = store.allocate_id();
                    j.name = "job" + std::to_string(i);
                    j.workflow.elements.emplace_back(Executable{"echo", {"v1"}});
                    j.application.name = "generic";
                    j.application.version = "1.0";
                    j.output_dir = "output";
                    j.created_at = j.updated_at = 100;
                    store.save(j);
                    versions[j.id].first = j;
                }
                // Crash at a random rename while updating one job; the
                // temporary file may hold a truncated write.
                auto target = "j00000" + std::to_string(std::uniform_int_distribution<int>(1, 3)(rng));
                int crash_at = std::uniform_int_distribution<int>(1, 2)(rng);
                bool truncate = std::bernoulli_distribution(0.5)(rng);
                int renames = 0;
                store.set_rename_hook([&](const fs::path& tmp, const fs::path&) {
                    if (++renames != crash_at) return;
                    if (truncate) fs::resize_file(tmp, fs::file_size(tmp) / 2);
                    throw Crash();
                });
                Job updated = store.load(target);
                updated.name = "renamed";
                updated.status = JobStatus::Submitted;
                updated.updated_at = 200;
                versions[target].second = updated;
                try {
                    store.save(updated);
                    return fail("trial " + std::to_string(trial) + ": hook never fired");
                } catch (const Crash&) {
                }
            }
            try {
                Store reopened(dir.path());
                for (const auto& [id, v] : versions) {
                    auto loaded = reopened.load(id);
                    bool prior = loaded == v.first;
                    bool attempted = !v.second.id.empty() && loaded == v.second;
                    if (!prior && !attempted) return fail("trial " + std::to_string(trial) + ": " + id + " holds neither version");
                }
                if (reopened.list().size() != versions.size()) return fail("trial " + std::to_string(trial) + ": catalogue lost jobs");
            } catch (const Error& e) {
                return fail("trial " + std::to_string(trial) + ": " + e.what());
            }
        }
        return {true, std::to_string(trials) + " crash trials, prior versions always readable"};
    });
}

Outcome session_replay() {
    return guarded([]() -> Outcome {
        TempDir dir;
        auto a = dir / "a";
        auto b = dir / "b";
        tools::CliConfig config;
        config.share_dir = testing::source_share_dir();
        config.path_prepend = {testing::tool_bin_dir().string()};
        const std::vector<std::vector<std::string>> session = {
            {"create", "--template", "generic-exec", "--name", "alpha", "--set", "element.0.name=sleep", "--set", "element.0.arg.0=30"},
            {"create", "--template", "count-demo", "--name", "beta", "--set", "element.3.kind=input", "--set", "element.3.name=more.txt"},
            {"copy", "j000001", "--name", "gamma"},
            {"rename", "j000003", "delta"},
            {"edit", "j000002", "--set", "application.param.0.value=signal"},
            {"split", "j000002", "--max", "1"},
            {"configure", "j000001"},
            {"submit", "j000001"},
            {"kill", "j000001"},
            {"create", "--template", "generic-exec", "--name", "scratch"},
            {"delete", "j000006"},
            {"options", "save", "quick", "--set", "ApplicationMgr.EvtMax=10"},
        };
        std::ostringstream out, err;
        for (const auto& cmd : session) {
            auto args = cmd;
            args.insert(args.begin(), {"--store", a.string()});
            if (int rc = tools::run_cli(args, out, err, config); rc != 0)
                return fail("'" + join(cmd, " ") + "' exited " + std::to_string(rc) + ": " + err.str());
            // Spread the commands over distinct seconds so timestamps matter.
            if (&cmd == &session[3] || &cmd == &session[7]) std::this_thread::sleep_for(std::chrono::milliseconds(1100));
        }
        auto log = read_file(a / "session.log");
        auto lines = std::count(log.begin(), log.end(), '\n');
        if (lines != static_cast<long>(session.size())) return fail("session.log has " + std::to_string(lines) + " lines");
        if (int rc = tools::run_cli({"--store", b.string(), "replay", (a / "session.log").string()}, out, err, config); rc != 0)
            return fail("replay exited " + std::to_string(rc) + ": " + err.str());
        if (read_file(a / "catalogue.meta") != read_file(b / "catalogue.meta")) return fail("catalogue.meta differs after replay");
        return {true, std::to_string(session.size()) + " commands replayed, catalogue.meta byte-identical"};
    });
}

}  // namespace forge::acceptance
