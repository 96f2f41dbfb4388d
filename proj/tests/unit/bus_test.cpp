#include <atomic>
#include <thread>

#include "forge/bus.hpp"
#include "unit_support.hpp"

namespace forge::bus {
namespace {

struct Named : Component {
    explicit Named(std::string n) : name(std::move(n)) {}
    std::string name;
    ParamValues seen;
    void on_configure(const ParamValues& p) override { seen = p; }
};

struct Other : Component {};

ComponentDescriptor desc(std::string actual, std::string logical, std::set<std::string> functional, int priority = 0,
                         std::vector<std::string> deps = {}) {
    ComponentDescriptor d;
    d.actual_name = std::move(actual);
    d.logical_name = std::move(logical);
    d.functional_names = std::move(functional);
    d.priority = priority;
    d.dependencies = std::move(deps);
    return d;
}

Factory named() {
    return [](ConnectContext& ctx) { return std::make_shared<Named>(ctx.descriptor.actual_name); };
}

std::string who(const ComponentHandle& h) {
    return h.call<Named>([](Named& n) { return n.name; });
}

TEST(Bus, RegisterAndLookupByFunctionalName) {
    Bus bus;
    bus.register_component(desc("batchsim.v1", "batchsim", {"job-handler"}, 10), named());
    auto listed = bus.list_components("job-handler");
    ASSERT_EQ(listed.size(), 1u);
    EXPECT_EQ(listed[0].descriptor.actual_name, "batchsim.v1");
    EXPECT_FALSE(listed[0].connected);
}

TEST(Bus, DuplicateActualNameRejected) {
    Bus bus;
    bus.register_component(desc("a", "x", {}), named());
    EXPECT_FORGE_ERROR(bus.register_component(desc("a", "y", {}), named()), errc::DuplicateActualName);
}

TEST(Bus, SharedLogicalNameListsBoth) {
    Bus bus;
    bus.register_component(desc("one", "backend", {}), named());
    bus.register_component(desc("two", "backend", {}), named());
    int count = 0;
    for (const auto& c : bus.list_components())
        if (c.descriptor.logical_name == "backend") ++count;
    EXPECT_EQ(count, 2);
}

TEST(Bus, HighestPriorityWins) {
    Bus bus;
    bus.register_component(desc("low", "low", {"job-handler"}, 10), named());
    bus.register_component(desc("high", "high", {"job-handler"}, 20), named());
    EXPECT_EQ(who(bus.connect("job-handler")), "high");
}

TEST(Bus, AliasIsBound) {
    Bus bus;
    bus.register_component(desc("batchsim.v1", "batchsim", {"job-handler"}), named());
    auto h = bus.connect("batchsim", "bs");
    EXPECT_EQ(h.alias(), "bs");
    EXPECT_EQ(bus.aliases().at("bs"), "batchsim.v1");
    ASSERT_TRUE(bus.handle("bs"));
    EXPECT_EQ(who(*bus.handle("bs")), "batchsim.v1");
}

TEST(Bus, DependencyConnectedFirstAndRecorded) {
    Bus bus;
    std::vector<std::string> order;
    auto recording = [&](ConnectContext& ctx) {
        order.push_back(ctx.descriptor.actual_name);
        return std::make_shared<Named>(ctx.descriptor.actual_name);
    };
    bus.register_component(desc("xfer.v1", "xfer", {"file-transfer"}), recording);
    bus.register_component(desc("handler.v1", "handler", {"job-handler"}, 0, {"file-transfer"}), recording);
    bus.connect("job-handler");
    EXPECT_EQ(order, (std::vector<std::string>{"xfer.v1", "handler.v1"}));
    EXPECT_EQ(bus.dependency_graph(), "handler.v1 -> xfer.v1\n");
    EXPECT_EQ(bus.bookmarks("handler.v1"), std::vector<std::string>{"xfer.v1"});
}

TEST(Bus, UnknownNameAndCycle) {
    Bus bus;
    EXPECT_FORGE_ERROR(bus.connect("nothing"), errc::UnknownName);
    bus.register_component(desc("a", "a", {"fa"}, 0, {"fb"}), named());
    bus.register_component(desc("b", "b", {"fb"}, 0, {"fa"}), named());
    EXPECT_FORGE_ERROR(bus.connect("a"), errc::DependencyCycle);
    EXPECT_TRUE(bus.connected().empty());
}

TEST(Bus, FactoryFailureRollsBack) {
    Bus bus;
    bus.register_component(desc("dep", "dep", {"fdep"}), named());
    bus.register_component(desc("bad", "bad", {}, 0, {"fdep"}),
                           [](ConnectContext&) -> std::shared_ptr<Component> { throw std::runtime_error("boom"); });
    EXPECT_FORGE_ERROR(bus.connect("bad"), errc::FactoryFailure);
    EXPECT_TRUE(bus.connected().empty());
}

TEST(Bus, UnregisteredComponentOnlyByActualName) {
    Bus bus;
    bus.provide("plugin.so", named());
    EXPECT_EQ(who(bus.connect("plugin.so")), "plugin.so");
    bus.register_component(desc("user", "user", {}, 0, {"plugin"}), named());
    EXPECT_FORGE_ERROR(bus.connect("user"), errc::UnknownName);
    bus.register_component(desc("user2", "user2", {}, 0, {"plugin.so"}), named());
    EXPECT_NO_THROW(bus.connect("user2"));
    for (const auto& c : bus.list_components())
        if (c.descriptor.actual_name == "plugin.so") EXPECT_TRUE(c.descriptor.functional_names.empty());
}

TEST(Bus, DisconnectPropagatesToExclusiveDependencies) {
    Bus bus;
    bus.register_component(desc("B", "B", {"fb"}), named());
    bus.register_component(desc("A", "A", {"fa"}, 0, {"fb"}), named());
    bus.connect("A");
    EXPECT_EQ(bus.disconnect("A"), (std::set<std::string>{"A", "B"}));
    EXPECT_TRUE(bus.connected().empty());
}

TEST(Bus, SharedDependencyStays) {
    Bus bus;
    bus.register_component(desc("B", "B", {"fb"}), named());
    bus.register_component(desc("A", "A", {"fa"}, 0, {"fb"}), named());
    bus.register_component(desc("C", "C", {"fc"}, 0, {"fb"}), named());
    bus.connect("A");
    bus.connect("C");
    EXPECT_EQ(bus.disconnect("A"), std::set<std::string>{"A"});
    EXPECT_TRUE(bus.is_connected("B"));
}

TEST(Bus, DisconnectingDependencyTakesDependents) {
    Bus bus;
    bus.register_component(desc("B", "B", {"fb"}), named());
    bus.register_component(desc("A", "A", {"fa"}, 0, {"fb"}), named());
    auto a = bus.connect("A");
    EXPECT_EQ(bus.disconnect("B"), (std::set<std::string>{"A", "B"}));
    EXPECT_FORGE_ERROR(who(a), errc::DisconnectedComponent);
    EXPECT_FORGE_ERROR(bus.disconnect("A"), errc::NotConnected);
}

TEST(Bus, ReplaceRebindsHandles) {
    Bus bus;
    bus.register_component(desc("batchsim.v1", "batchsim", {"job-handler"}, 10), named());
    bus.register_component(desc("batchsim.v2", "batchsim", {"job-handler"}, 0), named());
    auto h = bus.connect("job-handler");
    EXPECT_EQ(h.generation(), 0u);
    bus.replace("job-handler", "batchsim.v2");
    EXPECT_EQ(h.generation(), 1u);
    EXPECT_EQ(who(h), "batchsim.v2");
    EXPECT_EQ(h.actual_name(), "batchsim.v2");
    EXPECT_FALSE(bus.is_connected("batchsim.v1"));
}

TEST(Bus, ReplaceRequiresFunctionalNames) {
    Bus bus;
    bus.register_component(desc("batchsim.v1", "batchsim", {"job-handler"}), named());
    bus.register_component(desc("thing", "thing", {"something-else"}), named());
    auto h = bus.connect("job-handler");
    EXPECT_FORGE_ERROR(bus.replace("job-handler", "thing"), errc::ContractMismatch);
    EXPECT_EQ(who(h), "batchsim.v1");
    EXPECT_EQ(h.generation(), 0u);
}

TEST(Bus, ReplaceSwapsExclusiveDependencies) {
    Bus bus;
    bus.register_component(desc("old-dep", "old-dep", {"fold"}), named());
    bus.register_component(desc("new-dep", "new-dep", {"fnew"}), named());
    bus.register_component(desc("svc.v1", "svc", {"svc"}, 10, {"fold"}), named());
    bus.register_component(desc("svc.v2", "svc", {"svc"}, 0, {"fnew"}), named());
    bus.connect("svc");
    EXPECT_EQ(bus.dependency_graph(), "svc.v1 -> old-dep\n");
    bus.replace("svc", "svc.v2");
    EXPECT_EQ(bus.dependency_graph(), "svc.v2 -> new-dep\n");
    EXPECT_EQ(bus.connected(), (std::set<std::string>{"new-dep", "svc.v2"}));
}

TEST(Bus, ReplaceErrors) {
    Bus bus;
    bus.register_component(desc("a", "a", {"f"}), named());
    bus.register_component(desc("b", "b", {"f"}), named());
    EXPECT_FORGE_ERROR(bus.replace("a", "b"), errc::NotConnected);
    bus.connect("a");
    EXPECT_FORGE_ERROR(bus.replace("a", "zzz"), errc::UnknownName);
    bus.connect("b");
    EXPECT_FORGE_ERROR(bus.replace("a", "b"), errc::AlreadyConnected);
}

TEST(Bus, ConfigureChecksTypesAndRanges) {
    Bus bus;
    auto d = desc("monitor.v1", "monitor", {"monitor"});
    d.config_params.push_back({"poll_interval_s", ValueType::parse("integer"), std::int64_t{5}, Range{1, 60}, ""});
    d.config_params.push_back({"verbose", ValueType::parse("boolean"), false, std::nullopt, ""});
    bus.register_component(d, named());
    auto h = bus.connect("monitor");
    bus.configure("monitor", {{"poll_interval_s", std::int64_t{7}}});
    EXPECT_EQ(std::get<std::int64_t>(bus.params("monitor").at("poll_interval_s")), 7);
    EXPECT_EQ(h.call<Named>([](Named& n) { return std::get<std::int64_t>(n.seen.at("poll_interval_s")); }), 7);
    EXPECT_FORGE_ERROR(bus.configure("monitor", {{"verbose", std::int64_t{3}}}), errc::TypeMismatch);
    EXPECT_FORGE_ERROR(bus.configure("monitor", {{"poll_interval_s", std::int64_t{0}}}), errc::OutOfRange);
    EXPECT_FORGE_ERROR(bus.configure("monitor", {{"nope", std::int64_t{1}}}), errc::UnknownParam);
    // All-or-nothing: a bad entry leaves the good one unapplied.
    EXPECT_FORGE_ERROR(bus.configure("monitor", {{"poll_interval_s", std::int64_t{9}}, {"verbose", std::string("x")}}),
                       errc::TypeMismatch);
    EXPECT_EQ(std::get<std::int64_t>(bus.params("monitor").at("poll_interval_s")), 7);
}

TEST(Bus, InvalidDefaultRejected) {
    Bus bus;
    auto d = desc("m", "m", {});
    d.config_params.push_back({"n", ValueType::parse("integer"), std::int64_t{100}, Range{1, 60}, ""});
    EXPECT_FORGE_ERROR(bus.register_component(d, named()), errc::InvalidSpec);
}

TEST(Bus, ListIsSortedAndReflectsConnection) {
    Bus bus;
    EXPECT_TRUE(bus.list_components().empty());
    bus.register_component(desc("zeta", "z", {"f"}), named());
    bus.register_component(desc("alpha", "a", {"g"}), named());
    bus.connect("zeta");
    auto all = bus.list_components();
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].descriptor.actual_name, "alpha");
    EXPECT_FALSE(all[0].connected);
    EXPECT_TRUE(all[1].connected);
    EXPECT_EQ(bus.list_components("g").size(), 1u);
}

TEST(Bus, PinOverridesPriority) {
    Bus bus;
    bus.register_component(desc("low", "low", {"job-handler"}, 10), named());
    bus.register_component(desc("high", "high", {"job-handler"}, 20), named());
    bus.pin("job-handler", "low");
    EXPECT_EQ(bus.select("job-handler"), "low");
    bus.unpin("job-handler");
    EXPECT_EQ(bus.select("job-handler"), "high");
}

TEST(Bus, WrongInterfaceIsContractMismatch) {
    Bus bus;
    bus.register_component(desc("a", "a", {}), named());
    auto h = bus.connect("a");
    EXPECT_FORGE_ERROR(h.call<Other>([](Other&) { return 0; }), errc::ContractMismatch);
}

// Calls racing replace/disconnect must land on a live instance or fail cleanly.
TEST(Bus, HandleSafetyUnderConcurrency) {
    struct Guarded : Component {
        explicit Guarded(std::string n) : name(std::move(n)) {}
        ~Guarded() override { alive = false; }
        std::atomic<bool> alive{true};
        std::string name;
    };
    Bus bus;
    auto factory = [](ConnectContext& ctx) { return std::make_shared<Guarded>(ctx.descriptor.actual_name); };
    bus.register_component(desc("s.v1", "s", {"svc"}, 10), factory);
    bus.register_component(desc("s.v2", "s", {"svc"}, 0), factory);
    auto h = bus.connect("svc");
    std::atomic<bool> stop{false};
    std::atomic<int> bad{0}, ok{0}, gone{0};
    std::thread caller([&] {
        while (!stop) {
            try {
                if (h.call<Guarded>([](Guarded& g) { return g.alive.load(); })) ++ok;
                else ++bad;
            } catch (const Error& e) {
                if (e.name() == errc::DisconnectedComponent) ++gone;
                else ++bad;
            }
        }
    });
    while (ok.load() == 0) std::this_thread::yield();
    for (int i = 0; i < 200; ++i) {
        bus.replace("svc", i % 2 ? "s.v1" : "s.v2");
        if (i % 20 == 0) std::this_thread::yield();
    }
    bus.disconnect("svc");
    stop = true;
    caller.join();
    EXPECT_EQ(bad.load(), 0);
    EXPECT_GT(ok.load(), 0);
    EXPECT_EQ(h.generation(), 200u);
}

}  // namespace
}  // namespace forge::bus
