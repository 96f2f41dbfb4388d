#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "forge/error.hpp"
#include "forge/value.hpp"

namespace forge::bus {

/// A configurable parameter a component advertises.
struct ParamSpec {
    std::string name;
    ValueType type;
    Value default_value;
    std::optional<Range> range;
    std::string doc;

    /// Throws Error(InvalidSpec) when the default violates range or choices.
    void validate() const;
};

struct ComponentDescriptor {
    std::string actual_name;   // unique
    std::string logical_name;  // may be shared
    std::set<std::string> functional_names;
    int priority = 0;
    std::vector<ParamSpec> config_params;
    std::vector<std::string> dependencies;  // functional, logical or actual names
};

using ParamValues = std::map<std::string, Value>;

/// Base of everything the bus can own.
class Component {
public:
    virtual ~Component() = default;
    /// Receives the full parameter map after construction and after every
    /// successful configure().
    virtual void on_configure(const ParamValues&) {}
};

namespace detail {
struct Slot {
    mutable std::shared_mutex mu;
    std::shared_ptr<Component> instance;
    std::string actual;
    std::set<std::string> functional;
    std::uint64_t generation = 0;
};
}  // namespace detail

/// Indirection clients hold to a connected component. Calls are routed
/// through the slot, so replace() rebinds every outstanding handle and
/// disconnect() turns every call into Error(DisconnectedComponent).
class ComponentHandle {
public:
    ComponentHandle() = default;
    ComponentHandle(std::shared_ptr<detail::Slot> slot, std::string alias)
        : slot_(std::move(slot)), alias_(std::move(alias)) {}

    const std::string& alias() const { return alias_; }
    bool valid() const;
    std::uint64_t generation() const;
    std::string actual_name() const;
    std::set<std::string> functional_names() const;

    /// Invokes `f(T&)` on the live instance while holding the slot's read
    /// lock. Throws DisconnectedComponent, or ContractMismatch when the
    /// instance is not a T.
    template <class T, class F>
    decltype(auto) call(F&& f) const {
        if (!slot_) throw Error(errc::DisconnectedComponent, alias_ + " (empty handle)");
        std::shared_lock lock(slot_->mu);
        if (!slot_->instance) throw Error(errc::DisconnectedComponent, alias_);
        auto* target = dynamic_cast<T*>(slot_->instance.get());
        if (!target) throw Error(errc::ContractMismatch, alias_ + " does not implement the requested interface");
        return std::invoke(std::forward<F>(f), *target);
    }

private:
    std::shared_ptr<detail::Slot> slot_;
    std::string alias_;
};

/// What a factory sees while its component is being constructed.
struct ConnectContext {
    const ComponentDescriptor& descriptor;
    const ParamValues& params;
    /// Handles to the resolved dependencies, keyed by the dependency name as
    /// written in the descriptor.
    std::map<std::string, ComponentHandle> dependencies;
};

using Factory = std::function<std::shared_ptr<Component>(ConnectContext&)>;

struct ComponentInfo {
    ComponentDescriptor descriptor;
    bool connected = false;
};

/// Component kernel. All mutating operations are serialized; handle calls
/// run concurrently with each other and are linearized against
/// replace/disconnect by the per-slot lock.
class Bus {
public:
    Bus() = default;
    Bus(const Bus&) = delete;
    Bus& operator=(const Bus&) = delete;
    ~Bus();

    /// Throws DuplicateActualName or InvalidSpec.
    void register_component(ComponentDescriptor descriptor, Factory factory);

    /// Makes a component known by actual name only (an unregistered module):
    /// no logical/functional names, no parameters, no dependencies.
    void provide(const std::string& actual_name, Factory factory);

    /// Direct user choice: `name` resolves to `actual_name` from now on.
    void pin(const std::string& name, const std::string& actual_name);
    void unpin(const std::string& name);
    std::map<std::string, std::string> pins() const;

    /// Throws UnknownName, DependencyCycle, FactoryFailure.
    ComponentHandle connect(const std::string& name, std::optional<std::string> alias = std::nullopt);

    /// Returns the actual names removed. Throws NotConnected.
    std::set<std::string> disconnect(const std::string& name);

    /// Throws NotConnected, UnknownName, ContractMismatch, AlreadyConnected,
    /// DependencyCycle, FactoryFailure. On failure the original is untouched.
    void replace(const std::string& name, const std::string& replacement);

    /// All-or-nothing. Throws UnknownName, UnknownParam, TypeMismatch,
    /// OutOfRange, NotAChoice.
    void configure(const std::string& name, const ParamValues& assignments);
    ParamValues params(const std::string& name) const;

    std::vector<ComponentInfo> list_components(const std::optional<std::string>& functional = std::nullopt) const;

    /// Handle for an alias bound by an earlier connect.
    std::optional<ComponentHandle> handle(const std::string& alias) const;
    /// Handle for a name if a matching component is connected, otherwise connects it.
    ComponentHandle acquire(const std::string& name);

    bool is_connected(const std::string& actual_name) const;
    std::set<std::string> connected() const;
    std::map<std::string, std::string> aliases() const;
    /// Components newly connected as a side effect of connecting `actual_name`.
    std::vector<std::string> bookmarks(const std::string& actual_name) const;
    /// One `A -> B` edge per line (A depends on B), sorted.
    std::string dependency_graph() const;

    /// The descriptor the bus would select for `name` right now.
    std::string select(const std::string& name) const;

private:
    struct Known {
        ComponentDescriptor descriptor;
        Factory factory;
        bool registered = true;
    };
    struct Live {
        std::shared_ptr<detail::Slot> slot;
        bool root = false;
        std::set<std::string> deps;  // actual names
        std::vector<std::string> bookmarks;
    };

    std::string select_locked(const std::string& name) const;
    std::optional<std::string> resolve_connected_locked(const std::string& name) const;
    ParamValues effective_params_locked(const std::string& actual) const;
    void ensure_connected_locked(const std::string& actual, std::vector<std::string>& stack,
                                 std::vector<std::string>& created);
    std::shared_ptr<Component> construct_locked(const Known& known, std::set<std::string>& deps_out,
                                                std::vector<std::string>& stack, std::vector<std::string>& created);
    std::set<std::string> dependents_locked(const std::string& actual) const;
    std::set<std::string> remove_locked(std::set<std::string> seeds);

    mutable std::recursive_mutex mu_;
    std::map<std::string, Known> known_;
    std::map<std::string, Live> live_;
    std::map<std::string, std::string> aliases_;
    std::map<std::string, std::string> pins_;
    std::map<std::string, ParamValues> overrides_;
};

}  // namespace forge::bus
