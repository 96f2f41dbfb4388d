#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forge/bus.hpp"
#include "forge/clock.hpp"
#include "forge/job.hpp"
#include "forge/kv.hpp"
#include "forge/process.hpp"
#include "forge/scriptgen.hpp"
#include "forge/transfer.hpp"

namespace forge {

struct PollResult {
    JobStatus status = JobStatus::Submitted;
    std::string reason;
};

/// What a handler needs from the rest of the system.
struct BackendEnv {
    fs::path store_root;
    /// Prepended to the payload's PATH.
    std::vector<std::string> path_prepend;
    /// Throws UnresolvedLogicalName.
    std::function<std::string(const std::string& lfn)> resolve_lfn;
    std::function<void(TransferMethod, const std::string& src, const std::string& dst, const fs::path& sandbox)> transfer;
};

/// Env backed by concrete catalogue/transfer objects (tests, tools).
BackendEnv make_backend_env(fs::path store_root, std::shared_ptr<const ReplicaCatalogue> replicas,
                            std::shared_ptr<const FileTransfer> transfer, std::vector<std::string> path_prepend = {});

/// Contract every computing-system adapter implements. Registered on the
/// bus under the functional name "job-handler".
class JobHandler : public bus::Component {
public:
    virtual std::string id() const = 0;
    virtual Dialect dialect() const = 0;

    /// Writes script.sh (and jdl.txt for JDL backends) into the job dir,
    /// resolves logical input names and records the transfer method in
    /// `job.transfer`. The caller persists the job.
    /// Throws InvalidWorkflow, UnresolvedLogicalName, IllegalTransition.
    virtual void configure_job(Job& job) = 0;
    /// Stages inputs and launches or enqueues the payload; returns the
    /// ticket. Throws NotConfigured, BackendUnavailable, MatchFailure, SourceMissing.
    virtual std::string submit(Job& job) = 0;
    /// Backend-observed status; never changes the stored job. Throws UnknownTicket.
    virtual PollResult poll(const Job& job) = 0;
    /// Throws AlreadyTerminal.
    virtual void kill(const Job& job) = 0;
    /// Places stdout.txt, stderr.txt and the declared outputs in the job's
    /// output directory (and any extra output location). Idempotent.
    /// Throws MissingOutput naming the first absent file.
    virtual std::vector<fs::path> fetch_output(const Job& job) = 0;
};

/// Shared configure/staging/fetch logic.
class HandlerBase : public JobHandler {
public:
    explicit HandlerBase(BackendEnv env) : env_(std::move(env)) {}

    void configure_job(Job& job) override;
    std::vector<fs::path> fetch_output(const Job& job) override;

    fs::path job_dir(const Job& job) const { return env_.store_root / "jobs" / job.id; }
    fs::path output_dir(const Job& job) const;

protected:
    virtual TransferMethod choose_transfer(const Job& job) const;
    /// Where the payload leaves its output/ directory.
    virtual fs::path execution_dir(const Job& job) const { return job_dir(job); }
    void require_configured(const Job& job) const;
    /// Copies each declared input into `dest_input_dir/<name>`.
    void stage_inputs(const Job& job, const fs::path& dest_input_dir) const;
    void check_killable(const Job& job) const;
    ProcessEnv payload_env() const { return {{}, env_.path_prepend}; }

    BackendEnv env_;
};

/// Exit status left by the exit-capturing wrapper in `dir`, if any.
std::optional<int> read_exit_file(const fs::path& dir);
PollResult status_from_exit(int code);

/// Runs the payload as a detached local process. Ticket = pid.
class LocalHandler final : public HandlerBase {
public:
    using HandlerBase::HandlerBase;
    std::string id() const override { return "local"; }
    Dialect dialect() const override { return Dialect::Plain; }
    std::string submit(Job& job) override;
    PollResult poll(const Job& job) override;
    void kill(const Job& job) override;
};

struct QueueSpec {
    std::string name;
    std::int64_t limit_ticks = 1;
    int slots = 1;
};

struct BatchSimConfig {
    std::vector<QueueSpec> queues;
    /// Virtual mode: time is the virtual clock in ticks, payload cost comes
    /// from `#BS cost=`, and the payload runs when its cost has elapsed.
    /// Real mode: payloads run as processes; wall time limit is
    /// limit_ticks * tick_seconds.
    bool virtual_mode = false;
    double tick_seconds = 1.0;
    /// Persisted queue state (shared by every process using the store); empty = in memory.
    fs::path state_path;
};

/// Simulated batch system with FIFO queues, slots and wall-time limits.
class BatchSimHandler final : public HandlerBase {
public:
    /// `clock` is required in virtual mode.
    BatchSimHandler(BackendEnv env, BatchSimConfig config, std::shared_ptr<const Clock> clock = nullptr);

    std::string id() const override { return "batchsim"; }
    Dialect dialect() const override { return Dialect::BatchSim; }
    std::string submit(Job& job) override;
    PollResult poll(const Job& job) override;
    void kill(const Job& job) override;

    /// Brings the simulation up to the current time without polling a job.
    void advance();

    struct SlotSample {
        std::int64_t time;
        std::string queue;
        int running;
    };
    /// Test hooks.
    std::vector<SlotSample> slot_samples() const;
    /// Tickets per queue in start order / submission order.
    std::vector<std::string> start_order(const std::string& queue) const;
    std::vector<std::string> submit_order(const std::string& queue) const;
    /// Finish time of a ticket, when finished.
    std::optional<std::int64_t> finish_time(const std::string& ticket) const;
    const BatchSimConfig& config() const { return config_; }

private:
    enum class State { Queued, Running, Done };
    struct Entry {
        std::string ticket;
        std::string job_id;
        std::string queue;
        fs::path dir;
        std::int64_t cost = 1;
        std::int64_t submitted = 0;
        std::int64_t started = -1;
        std::int64_t finished = -1;
        State state = State::Queued;
        JobStatus result = JobStatus::Submitted;
        std::string reason;
        pid_t pid = 0;
    };

    std::int64_t now() const;
    const QueueSpec& queue(const std::string& name) const;
    void load_locked();
    void save_locked() const;
    void catch_up_locked(std::int64_t now);
    void step_locked(std::int64_t t);
    void finish(Entry& e, std::int64_t t, JobStatus status, std::string reason);
    Entry& entry_locked(const std::string& ticket);

    BatchSimConfig config_;
    std::shared_ptr<const Clock> clock_;
    mutable std::mutex mu_;
    std::map<std::string, Entry> entries_;  // by ticket
    std::vector<std::string> order_;        // submission order
    std::int64_t seq_ = 0;
    std::int64_t last_time_ = -1;
    std::vector<SlotSample> samples_;
    std::map<std::string, std::vector<std::string>> started_;
};

struct ComputingElement {
    std::string name;
    std::map<std::string, RequirementValue> attributes;
    int slots = 1;
    bool operator==(const ComputingElement&) const = default;
};

/// Numeric `MinX` needs CE attribute X >= value (other numeric attributes
/// compare against the same name); strings need equality. A missing
/// attribute never satisfies.
bool satisfies(const ComputingElement& ce, const ResourceRequirements& reqs);

/// Among satisfying CEs: most free slots, then lexicographic name.
std::optional<std::size_t> select_ce(const std::vector<ComputingElement>& ces, const std::vector<int>& free_slots,
                                     const ResourceRequirements& reqs);

/// Grid stand-in: parses jdl.txt, matchmakes against its computing
/// elements and runs the payload at `<store>/grid/<ce>/<job id>/`.
/// Inputs and outputs travel through the job's sandbox/ directory.
class MockGridHandler final : public HandlerBase {
public:
    MockGridHandler(BackendEnv env, std::vector<ComputingElement> ces);

    std::string id() const override { return "mockgrid"; }
    Dialect dialect() const override { return Dialect::Jdl; }
    std::string submit(Job& job) override;
    PollResult poll(const Job& job) override;
    void kill(const Job& job) override;

    fs::path site_dir(const std::string& ce, const std::string& job_id) const;
    std::vector<int> free_slots() const;
    const std::vector<ComputingElement>& elements() const { return ces_; }

protected:
    TransferMethod choose_transfer(const Job&) const override { return TransferMethod::Sandbox; }
    fs::path execution_dir(const Job& job) const override;

private:
    std::vector<ComputingElement> ces_;
    mutable std::mutex mu_;
};

/// Contents of backends.meta.
struct BackendConfig {
    std::vector<QueueSpec> queues;
    bool batchsim_virtual = false;
    double tick_seconds = 1.0;
    std::vector<ComputingElement> ces;
    ReplicaCatalogue replicas;

    /// Throws ParseError.
    static BackendConfig from_kv(const KvDocument& doc);
};

}  // namespace forge
