#include <random>

#include "forge/job.hpp"
#include "forge/status.hpp"
#include "unit_support.hpp"

namespace forge {
namespace {

// Independent table of the legal edges.
bool oracle_legal(JobStatus from, JobStatus to) {
    using S = JobStatus;
    switch (from) {
        case S::InPreparation: return to == S::Submitted;
        case S::Submitted: return to == S::Running || to == S::Failed || to == S::Killed;
        case S::Running: return to == S::Completed || to == S::Failed || to == S::Killed;
        default: return false;
    }
}

TEST(Status, WireNames) {
    for (auto s : kAllStatuses) EXPECT_EQ(parse_status(to_string(s)), s);
    EXPECT_EQ(to_string(JobStatus::InPreparation), "in-preparation");
    EXPECT_EQ(parse_status("COMPLETED"), JobStatus::Completed);
    EXPECT_FORGE_ERROR(parse_status("done"), errc::ValidationError);
}

TEST(Status, EdgeTableMatchesOracle) {
    for (auto a : kAllStatuses)
        for (auto b : kAllStatuses) EXPECT_EQ(is_legal_transition(a, b), oracle_legal(a, b));
}

TEST(Status, TransitionExamples) {
    Job j;
    auto e = transition(j, JobStatus::Submitted, 10);
    EXPECT_EQ(e.old_status, JobStatus::InPreparation);
    EXPECT_EQ(e.new_status, JobStatus::Submitted);
    EXPECT_EQ(j.updated_at, 10);
    transition(j, JobStatus::Running, 11);
    transition(j, JobStatus::Killed, 12);
    Job done;
    done.status = JobStatus::Completed;
    EXPECT_FORGE_ERROR(transition(done, JobStatus::Running, 1), errc::IllegalTransition);
    EXPECT_EQ(done.status, JobStatus::Completed);
}

TEST(Status, RandomWalkOnlyLegalEdgesSucceed) {
    std::mt19937 rng(99);
    Job j;
    long accepted = 0;
    for (long i = 0; i < 100000; ++i) {
        auto to = kAllStatuses[std::uniform_int_distribution<int>(0, 5)(rng)];
        auto from = j.status;
        bool legal = oracle_legal(from, to);
        try {
            transition(j, to, i);
            ASSERT_TRUE(legal) << to_string(from) << " -> " << to_string(to);
            ++accepted;
        } catch (const Error& e) {
            ASSERT_FALSE(legal);
            ASSERT_EQ(e.name(), errc::IllegalTransition);
            ASSERT_EQ(j.status, from);
        }
        if (is_terminal(j.status) && std::uniform_int_distribution<int>(0, 3)(rng) == 0) j = Job{};
    }
    EXPECT_GT(accepted, 0);
}

TEST(Status, LegalPathIsShortest) {
    EXPECT_TRUE(legal_path(JobStatus::Running, JobStatus::Running).empty());
    EXPECT_EQ(legal_path(JobStatus::InPreparation, JobStatus::Completed),
              (std::vector<JobStatus>{JobStatus::Submitted, JobStatus::Running, JobStatus::Completed}));
    EXPECT_EQ(legal_path(JobStatus::Submitted, JobStatus::Failed), std::vector<JobStatus>{JobStatus::Failed});
    EXPECT_TRUE(legal_path(JobStatus::Completed, JobStatus::Running).empty());
}

// Parent derivation against an independent reading of the rule, over
// every multiset of up to four subjob states.
JobStatus oracle_parent(const std::vector<JobStatus>& subs) {
    auto any = [&](JobStatus s) { return std::find(subs.begin(), subs.end(), s) != subs.end(); };
    if (any(JobStatus::Submitted) || any(JobStatus::Running)) return JobStatus::Running;
    if (any(JobStatus::Failed)) return JobStatus::Failed;
    if (any(JobStatus::Killed)) return JobStatus::Killed;
    if (!subs.empty() && std::all_of(subs.begin(), subs.end(), [](JobStatus s) { return s == JobStatus::Completed; }))
        return JobStatus::Completed;
    return JobStatus::InPreparation;
}

TEST(Status, ParentDerivationExhaustive) {
    for (int n = 0; n <= 4; ++n) {
        int total = 1;
        for (int i = 0; i < n; ++i) total *= 6;
        for (int code = 0; code < total; ++code) {
            std::vector<JobStatus> subs;
            for (int c = code, i = 0; i < n; ++i, c /= 6) subs.push_back(kAllStatuses[c % 6]);
            ASSERT_EQ(derive_parent_status(subs), oracle_parent(subs));
        }
    }
}

TEST(Events, FormatAndParse) {
    JobEvent e{"j000001", JobStatus::InPreparation, JobStatus::Submitted, 1700000000, ""};
    EXPECT_EQ(format_event(e), "EVT j000001 in-preparation submitted 1700000000");
    EXPECT_EQ(parse_event(format_event(e)), e);
    JobEvent d{"j000002", JobStatus::Running, JobStatus::Running, 5, "poll-error"};
    EXPECT_TRUE(d.is_diagnostic());
    EXPECT_EQ(parse_event(format_event(d)), d);
    EXPECT_FORGE_ERROR(parse_event("EVT j1 nowhere submitted 1"), errc::ParseError);
}

}  // namespace
}  // namespace forge
