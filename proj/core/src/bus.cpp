#include "forge/bus.hpp"

#include <algorithm>

#include "forge/strings.hpp"

namespace forge::bus {

void ParamSpec::validate() const {
    try {
        check_value(type, default_value, range);
    } catch (const Error& e) {
        throw Error(errc::InvalidSpec, "parameter '" + name + "' default: " + e.detail());
    }
}

bool ComponentHandle::valid() const {
    if (!slot_) return false;
    std::shared_lock lock(slot_->mu);
    return slot_->instance != nullptr;
}

std::uint64_t ComponentHandle::generation() const {
    if (!slot_) return 0;
    std::shared_lock lock(slot_->mu);
    return slot_->generation;
}

std::string ComponentHandle::actual_name() const {
    if (!slot_) return {};
    std::shared_lock lock(slot_->mu);
    return slot_->actual;
}

std::set<std::string> ComponentHandle::functional_names() const {
    if (!slot_) return {};
    std::shared_lock lock(slot_->mu);
    return slot_->functional;
}

Bus::~Bus() {
    // Invalidate outstanding handles before instances go away.
    for (auto& [name, live] : live_) {
        std::unique_lock lock(live.slot->mu);
        live.slot->instance.reset();
    }
}

void Bus::register_component(ComponentDescriptor descriptor, Factory factory) {
    std::lock_guard lock(mu_);
    if (descriptor.actual_name.empty()) throw Error(errc::InvalidSpec, "empty actual name");
    auto it = known_.find(descriptor.actual_name);
    if (it != known_.end()) throw Error(errc::DuplicateActualName, descriptor.actual_name);
    std::set<std::string> seen;
    for (const auto& p : descriptor.config_params) {
        if (!seen.insert(p.name).second) throw Error(errc::InvalidSpec, "duplicate parameter '" + p.name + "'");
        p.validate();
    }
    if (descriptor.logical_name.empty()) descriptor.logical_name = descriptor.actual_name;
    std::string key = descriptor.actual_name;
    known_.emplace(std::move(key), Known{std::move(descriptor), std::move(factory), true});
}

void Bus::provide(const std::string& actual_name, Factory factory) {
    std::lock_guard lock(mu_);
    if (known_.count(actual_name)) throw Error(errc::DuplicateActualName, actual_name);
    ComponentDescriptor d;
    d.actual_name = actual_name;
    d.logical_name = actual_name;
    known_.emplace(actual_name, Known{std::move(d), std::move(factory), false});
}

void Bus::pin(const std::string& name, const std::string& actual_name) {
    std::lock_guard lock(mu_);
    if (!known_.count(actual_name)) throw Error(errc::UnknownName, actual_name);
    pins_[name] = actual_name;
}

void Bus::unpin(const std::string& name) {
    std::lock_guard lock(mu_);
    pins_.erase(name);
}

std::map<std::string, std::string> Bus::pins() const {
    std::lock_guard lock(mu_);
    return pins_;
}

std::string Bus::select(const std::string& name) const {
    std::lock_guard lock(mu_);
    return select_locked(name);
}

std::string Bus::select_locked(const std::string& name) const {
    if (auto it = known_.find(name); it != known_.end()) return name;
    std::vector<const Known*> candidates;
    for (const auto& [actual, k] : known_) {
        if (!k.registered) continue;
        if (k.descriptor.logical_name == name || k.descriptor.functional_names.count(name)) candidates.push_back(&k);
    }
    if (candidates.empty()) throw Error(errc::UnknownName, name);
    if (auto pin = pins_.find(name); pin != pins_.end()) {
        for (const auto* c : candidates)
            if (c->descriptor.actual_name == pin->second) return pin->second;
    }
    // known_ iterates in ascending actual_name order, so the first maximum wins ties.
    const Known* best = candidates.front();
    for (const auto* c : candidates)
        if (c->descriptor.priority > best->descriptor.priority) best = c;
    return best->descriptor.actual_name;
}

std::optional<std::string> Bus::resolve_connected_locked(const std::string& name) const {
    if (auto a = aliases_.find(name); a != aliases_.end() && live_.count(a->second)) return a->second;
    if (live_.count(name)) return name;
    std::vector<std::string> candidates;
    for (const auto& [actual, live] : live_) {
        const auto& d = known_.at(actual).descriptor;
        if (!known_.at(actual).registered) continue;
        if (d.logical_name == name || d.functional_names.count(name)) candidates.push_back(actual);
    }
    if (candidates.empty()) return std::nullopt;
    if (auto pin = pins_.find(name); pin != pins_.end()) {
        if (std::find(candidates.begin(), candidates.end(), pin->second) != candidates.end()) return pin->second;
    }
    std::string best = candidates.front();
    for (const auto& c : candidates)
        if (known_.at(c).descriptor.priority > known_.at(best).descriptor.priority) best = c;
    return best;
}

ParamValues Bus::effective_params_locked(const std::string& actual) const {
    ParamValues values;
    for (const auto& p : known_.at(actual).descriptor.config_params) values[p.name] = p.default_value;
    if (auto it = overrides_.find(actual); it != overrides_.end())
        for (const auto& [k, v] : it->second) values[k] = v;
    return values;
}

std::shared_ptr<Component> Bus::construct_locked(const Known& known, std::set<std::string>& deps_out,
                                                 std::vector<std::string>& stack,
                                                 std::vector<std::string>& created) {
    const auto& desc = known.descriptor;
    stack.push_back(desc.actual_name);
    std::map<std::string, ComponentHandle> dep_handles;
    for (const auto& dep_name : desc.dependencies) {
        auto live_dep = resolve_connected_locked(dep_name);
        std::string dep = live_dep ? *live_dep : select_locked(dep_name);
        if (std::find(stack.begin(), stack.end(), dep) != stack.end()) {
            throw Error(errc::DependencyCycle, join(stack, " -> ") + " -> " + dep);
        }
        ensure_connected_locked(dep, stack, created);
        deps_out.insert(dep);
        dep_handles.emplace(dep_name, ComponentHandle(live_.at(dep).slot, dep_name));
    }
    stack.pop_back();
    ParamValues params = effective_params_locked(desc.actual_name);
    ConnectContext ctx{desc, params, std::move(dep_handles)};
    std::shared_ptr<Component> instance;
    try {
        instance = known.factory ? known.factory(ctx) : nullptr;
    } catch (const std::exception& e) {
        throw Error(errc::FactoryFailure, desc.actual_name + ": " + e.what());
    }
    if (!instance) throw Error(errc::FactoryFailure, desc.actual_name + ": factory returned no instance");
    instance->on_configure(params);
    return instance;
}

void Bus::ensure_connected_locked(const std::string& actual, std::vector<std::string>& stack,
                                  std::vector<std::string>& created) {
    if (live_.count(actual)) return;
    const Known& known = known_.at(actual);
    std::set<std::string> deps;
    auto instance = construct_locked(known, deps, stack, created);
    Live live;
    live.slot = std::make_shared<detail::Slot>();
    live.slot->instance = std::move(instance);
    live.slot->actual = actual;
    live.slot->functional = known.descriptor.functional_names;
    live.deps = std::move(deps);
    live_.emplace(actual, std::move(live));
    created.push_back(actual);
}

ComponentHandle Bus::connect(const std::string& name, std::optional<std::string> alias) {
    std::lock_guard lock(mu_);
    std::string actual = select_locked(name);
    std::vector<std::string> stack;
    std::vector<std::string> created;
    try {
        ensure_connected_locked(actual, stack, created);
    } catch (...) {
        // Roll back whatever this call managed to connect.
        std::set<std::string> seeds(created.begin(), created.end());
        if (!seeds.empty()) remove_locked(seeds);
        throw;
    }
    auto& live = live_.at(actual);
    live.root = true;
    for (const auto& c : created)
        if (c != actual) live.bookmarks.push_back(c);
    std::string bound = alias.value_or(known_.at(actual).descriptor.logical_name);
    aliases_[bound] = actual;
    return ComponentHandle(live.slot, bound);
}

ComponentHandle Bus::acquire(const std::string& name) {
    std::lock_guard lock(mu_);
    if (auto actual = resolve_connected_locked(name)) return ComponentHandle(live_.at(*actual).slot, name);
    return connect(name);
}

std::set<std::string> Bus::dependents_locked(const std::string& actual) const {
    std::set<std::string> out;
    for (const auto& [name, live] : live_)
        if (live.deps.count(actual)) out.insert(name);
    return out;
}

std::set<std::string> Bus::remove_locked(std::set<std::string> seeds) {
    // Anything that depends on a removed component cannot keep working.
    std::set<std::string> removed;
    std::vector<std::string> work(seeds.begin(), seeds.end());
    while (!work.empty()) {
        std::string cur = work.back();
        work.pop_back();
        if (!live_.count(cur) || !removed.insert(cur).second) continue;
        for (const auto& d : dependents_locked(cur)) work.push_back(d);
    }
    // Then release dependencies nobody else needs.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [name, live] : live_) {
            if (removed.count(name) || live.root) continue;
            bool needed = false;
            for (const auto& d : dependents_locked(name)) needed = needed || !removed.count(d);
            if (!needed) {
                removed.insert(name);
                changed = true;
            }
        }
    }
    std::vector<std::shared_ptr<Component>> graveyard;
    for (const auto& name : removed) {
        auto& slot = *live_.at(name).slot;
        std::unique_lock lock(slot.mu);
        graveyard.push_back(std::move(slot.instance));
    }
    for (const auto& name : removed) live_.erase(name);
    for (auto it = aliases_.begin(); it != aliases_.end();) {
        it = removed.count(it->second) ? aliases_.erase(it) : std::next(it);
    }
    graveyard.clear();
    return removed;
}

std::set<std::string> Bus::disconnect(const std::string& name) {
    std::lock_guard lock(mu_);
    auto actual = resolve_connected_locked(name);
    if (!actual) throw Error(errc::NotConnected, name);
    return remove_locked({*actual});
}

void Bus::replace(const std::string& name, const std::string& replacement) {
    std::lock_guard lock(mu_);
    auto target = resolve_connected_locked(name);
    if (!target) throw Error(errc::NotConnected, name);
    auto kit = known_.find(replacement);
    if (kit == known_.end()) throw Error(errc::UnknownName, replacement);
    const Known& repl = kit->second;
    const auto& old_functional = known_.at(*target).descriptor.functional_names;
    for (const auto& f : old_functional) {
        if (!repl.descriptor.functional_names.count(f))
            throw Error(errc::ContractMismatch, replacement + " does not advertise '" + f + "'");
    }
    if (replacement != *target && live_.count(replacement)) throw Error(errc::AlreadyConnected, replacement);

    std::vector<std::string> stack{*target};
    std::vector<std::string> created;
    std::set<std::string> new_deps;
    std::shared_ptr<Component> instance;
    try {
        instance = construct_locked(repl, new_deps, stack, created);
    } catch (...) {
        std::set<std::string> seeds(created.begin(), created.end());
        if (!seeds.empty()) remove_locked(seeds);
        throw;
    }

    Live old = std::move(live_.at(*target));
    live_.erase(*target);
    std::shared_ptr<Component> previous;
    {
        std::unique_lock slot_lock(old.slot->mu);
        previous = std::move(old.slot->instance);
        old.slot->instance = std::move(instance);
        old.slot->actual = replacement;
        old.slot->functional = repl.descriptor.functional_names;
        ++old.slot->generation;
    }
    std::set<std::string> old_deps = std::move(old.deps);
    old.deps = new_deps;
    old.bookmarks = created;
    live_.emplace(replacement, std::move(old));
    for (auto& [n, live] : live_) {
        if (live.deps.erase(*target)) live.deps.insert(replacement);
    }
    for (auto& [alias, actual] : aliases_)
        if (actual == *target) actual = replacement;

    // Release old dependencies that are no longer needed by anyone.
    std::set<std::string> orphans;
    for (const auto& d : old_deps) {
        if (!live_.count(d) || live_.at(d).root || new_deps.count(d)) continue;
        if (dependents_locked(d).empty()) orphans.insert(d);
    }
    if (!orphans.empty()) remove_locked(orphans);
    previous.reset();
}

void Bus::configure(const std::string& name, const ParamValues& assignments) {
    std::lock_guard lock(mu_);
    std::string actual;
    if (auto c = resolve_connected_locked(name)) actual = *c;
    else actual = select_locked(name);
    const auto& desc = known_.at(actual).descriptor;
    ParamValues staged;
    for (const auto& [key, value] : assignments) {
        auto spec = std::find_if(desc.config_params.begin(), desc.config_params.end(),
                                 [&](const ParamSpec& p) { return p.name == key; });
        if (spec == desc.config_params.end()) throw Error(errc::UnknownParam, actual + "." + key);
        Value coerced;
        try {
            coerced = coerce(spec->type, value);
            check_value(spec->type, coerced, spec->range);
        } catch (const Error& e) {
            throw Error(e.name(), actual + "." + key + ": " + e.detail());
        }
        staged[key] = std::move(coerced);
    }
    for (auto& [k, v] : staged) overrides_[actual][k] = std::move(v);
    if (auto it = live_.find(actual); it != live_.end()) {
        auto params = effective_params_locked(actual);
        std::unique_lock slot_lock(it->second.slot->mu);
        if (it->second.slot->instance) it->second.slot->instance->on_configure(params);
    }
}

ParamValues Bus::params(const std::string& name) const {
    std::lock_guard lock(mu_);
    std::string actual;
    if (auto c = resolve_connected_locked(name)) actual = *c;
    else actual = select_locked(name);
    return effective_params_locked(actual);
}

std::vector<ComponentInfo> Bus::list_components(const std::optional<std::string>& functional) const {
    std::lock_guard lock(mu_);
    std::vector<ComponentInfo> out;
    for (const auto& [actual, k] : known_) {
        bool live = live_.count(actual) > 0;
        if (!k.registered && !live) continue;
        if (functional && !k.descriptor.functional_names.count(*functional)) continue;
        out.push_back({k.descriptor, live});
    }
    return out;
}

std::optional<ComponentHandle> Bus::handle(const std::string& alias) const {
    std::lock_guard lock(mu_);
    auto it = aliases_.find(alias);
    if (it == aliases_.end() || !live_.count(it->second)) return std::nullopt;
    return ComponentHandle(live_.at(it->second).slot, alias);
}

bool Bus::is_connected(const std::string& actual_name) const {
    std::lock_guard lock(mu_);
    return live_.count(actual_name) > 0;
}

std::set<std::string> Bus::connected() const {
    std::lock_guard lock(mu_);
    std::set<std::string> out;
    for (const auto& [name, live] : live_) out.insert(name);
    return out;
}

std::map<std::string, std::string> Bus::aliases() const {
    std::lock_guard lock(mu_);
    return aliases_;
}

std::vector<std::string> Bus::bookmarks(const std::string& actual_name) const {
    std::lock_guard lock(mu_);
    auto it = live_.find(actual_name);
    return it == live_.end() ? std::vector<std::string>{} : it->second.bookmarks;
}

std::string Bus::dependency_graph() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> lines;
    for (const auto& [name, live] : live_)
        for (const auto& d : live.deps) lines.push_back(name + " -> " + d);
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

}  // namespace forge::bus
