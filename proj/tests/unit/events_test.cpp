#include "forge/events.hpp"
#include "unit_support.hpp"

namespace forge {
namespace {

using namespace std::chrono_literals;

JobEvent ev(int n) { return {"j" + std::to_string(n), JobStatus::Submitted, JobStatus::Running, n, ""}; }

std::vector<JobEvent> drain(Subscription& s) {
    std::vector<JobEvent> out;
    while (auto item = s.next(10ms)) {
        if (item->overflow()) break;
        out.push_back(*item->event);
    }
    return out;
}

TEST(EventHub, TwoSubscribersSeeTheSameSequence) {
    EventHub hub;
    auto a = hub.subscribe();
    auto b = hub.subscribe();
    for (int i = 0; i < 50; ++i) hub.publish(ev(i));
    auto sa = drain(*a);
    EXPECT_EQ(sa.size(), 50u);
    EXPECT_EQ(sa, drain(*b));
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sa[static_cast<std::size_t>(i)].timestamp, i);
}

TEST(EventHub, LateSubscriberMissesEarlierEvents) {
    EventHub hub;
    hub.publish(ev(1));
    auto s = hub.subscribe();
    hub.publish(ev(2));
    auto got = drain(*s);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].job_id, "j2");
}

TEST(EventHub, OverflowMarkerThenClosed) {
    EventHub hub;
    auto s = hub.subscribe(3);
    for (int i = 0; i < 5; ++i) hub.publish(ev(i));
    int events = 0;
    bool marker = false;
    while (auto item = s->next(10ms)) {
        if (item->overflow()) {
            marker = true;
            continue;
        }
        EXPECT_FALSE(marker) << "event after the overflow marker";
        ++events;
    }
    EXPECT_TRUE(marker);
    EXPECT_EQ(events, 3);
    EXPECT_TRUE(s->closed());
}

TEST(EventHub, SinksAreSynchronous) {
    EventHub hub;
    std::vector<std::string> seen;
    hub.add_sink([&](const JobEvent& e) { seen.push_back(e.job_id); });
    hub.publish(std::vector<JobEvent>{ev(1), ev(2)});
    EXPECT_EQ(seen, (std::vector<std::string>{"j1", "j2"}));
}

TEST(EventHub, NextTimesOut) {
    EventHub hub;
    auto s = hub.subscribe();
    EXPECT_FALSE(s->next(5ms));
    EXPECT_FALSE(s->closed());
    hub.close_all();
    EXPECT_TRUE(s->closed());
}

}  // namespace
}  // namespace forge
