#include "mcastsim/pim.hpp"

#include "mcastsim/errors.hpp"

#include <algorithm>

namespace mcastsim {

std::set<IfId> PimGroupState::downstream_ifaces() const {
    std::set<IfId> out;
    for (const auto& [iface, entry] : downstream) out.insert(iface);
    return out;
}

PimRouter::PimRouter(EventLoop& loop, const RibTable& rib, PimTimers timers, Callbacks callbacks)
    : loop_(loop), rib_(rib), timers_(timers), cb_(std::move(callbacks)) {}

void PimRouter::log(const std::string& kind, const std::string& detail) const {
    if (cb_.log) cb_.log(kind, detail);
}

void PimRouter::notify_state_changed() {
    if (cb_.state_changed) cb_.state_changed();
}

void PimRouter::enable_iface(const IfId& iface, Addr addr) {
    auto [it, inserted] = ifaces_.try_emplace(iface);
    it->second.addr = addr;
    if (inserted) it->second.hello_timer = std::make_unique<RearmableTimer>(loop_);
}

void PimRouter::start() {
    for (auto& [iface, state] : ifaces_) send_hello(iface);
}

void PimRouter::send_hello(const IfId& iface) {
    PimMessage hello;
    hello.kind = PimKind::Hello;
    hello.holdtime = timers_.hello_holdtime();
    if (cb_.send_local) cb_.send_local(iface, hello);
    ifaces_.at(iface).hello_timer->arm(loop_.now() + timers_.hello_period,
                                       [this, iface]() { send_hello(iface); });
}

void PimRouter::set_static_rp(const RpMapping& mapping) {
    if (mapping.group_prefix.length() < 4 ||
        !Prefix::make(Addr(0xE0000000u), 4)->contains(mapping.group_prefix.network())) {
        throw SimError("rp group prefix " + mapping.group_prefix.str() + " is not multicast");
    }
    if (is_multicast(mapping.rp)) {
        throw SimError("rp address " + mapping.rp.str() + " must be unicast");
    }
    if (!cb_.owns_addr || !cb_.owns_addr(mapping.rp)) {
        if (!rib_.lookup(mapping.rp)) {
            throw RpUnreachable("no route to rp " + mapping.rp.str());
        }
    }
    // Replace an existing mapping for the same prefix.
    auto same = std::find_if(rp_mappings_.begin(), rp_mappings_.end(), [&](const RpMapping& m) {
        return m.group_prefix == mapping.group_prefix;
    });
    if (same != rp_mappings_.end()) {
        *same = mapping;
    } else {
        rp_mappings_.push_back(mapping);
    }
}

std::optional<Addr> PimRouter::rp_for(GroupAddr group) const {
    const RpMapping* best = nullptr;
    for (const auto& m : rp_mappings_) {
        if (!m.group_prefix.contains(group.addr())) continue;
        if (!best || m.group_prefix.length() > best->group_prefix.length()) best = &m;
    }
    if (!best) return std::nullopt;
    return best->rp;
}

bool PimRouter::is_rp(GroupAddr group) const {
    auto rp = rp_for(group);
    return rp && cb_.owns_addr && cb_.owns_addr(*rp);
}

PimGroupState* PimRouter::find_star_g(GroupAddr group) {
    auto it = states_.find(StateKey{group, std::nullopt});
    return it == states_.end() ? nullptr : &it->second;
}

PimGroupState& PimRouter::get_or_create_star_g(GroupAddr group) {
    auto it = states_.find(StateKey{group, std::nullopt});
    if (it != states_.end()) return it->second;

    auto rp = rp_for(group);
    if (!rp) throw NoRpForGroup("no rp mapping covers " + group.str());

    PimGroupState state;
    state.group = group;
    state.source = std::nullopt;
    if (!cb_.owns_addr(*rp)) {
        auto rpf = rib_.rpf_lookup(*rp);
        if (!rpf) throw RpUnreachable("no route to rp " + rp->str());
        state.upstream_iface = rpf->iface;
        state.upstream_neighbor = rpf->upstream ? *rpf->upstream : *rp;
    }
    state.refresh_timer = std::make_unique<RearmableTimer>(loop_);
    auto [pos, ok] = states_.emplace(StateKey{group, std::nullopt}, std::move(state));
    return pos->second;
}

void PimRouter::send_join_prune(PimGroupState& state, bool join) {
    if (!state.upstream_neighbor) return; // tree root: nothing upstream
    auto rp = rp_for(state.group);
    if (!rp) return;
    PimMessage msg;
    msg.kind = PimKind::JoinPrune;
    msg.holdtime = timers_.join_prune_holdtime;
    msg.upstream_neighbor = *state.upstream_neighbor;
    JoinPruneEntry entry{state.group, state.source, *rp};
    if (join) {
        msg.joins.push_back(entry);
    } else {
        msg.prunes.push_back(entry);
    }
    log("pim", std::string(join ? "join" : "prune") + " group=" + state.group.str() +
                   " iface=" + state.upstream_iface + " upstream=" +
                   state.upstream_neighbor->str());
    if (cb_.send_local) cb_.send_local(state.upstream_iface, msg);
}

void PimRouter::schedule_refresh(PimGroupState& state) {
    GroupAddr group = state.group;
    std::optional<Addr> source = state.source;
    state.refresh_timer->arm(loop_.now() + timers_.join_prune_period, [this, group, source]() {
        auto it = states_.find(StateKey{group, source});
        if (it == states_.end() || !it->second.joined_upstream) return;
        send_join_prune(it->second, true);
        schedule_refresh(it->second);
    });
}

void PimRouter::evaluate_upstream(PimGroupState& state) {
    bool wanted = state.wanted();
    if (wanted == state.joined_upstream) return;
    state.joined_upstream = wanted;
    if (!state.upstream_neighbor) return; // RP or first-hop root: no upstream messages
    if (wanted) {
        send_join_prune(state, true);
        schedule_refresh(state);
    } else {
        send_join_prune(state, false);
        state.refresh_timer->cancel();
    }
}

void PimRouter::on_membership_change(const MembershipChange& change) {
    if (change.joined) {
        PimGroupState& state = get_or_create_star_g(change.group);
        state.local_members.insert(change.iface);
        evaluate_upstream(state);
    } else {
        PimGroupState* state = find_star_g(change.group);
        if (!state) return;
        state->local_members.erase(change.iface);
        evaluate_upstream(*state);
    }
    notify_state_changed();
}

void PimRouter::on_hello(const IfId& from_iface, Addr from, const PimMessage& msg) {
    if (!iface_enabled(from_iface)) {
        ++ignored_messages_;
        return;
    }
    auto& table = neighbors_[from_iface];
    auto [it, inserted] = table.try_emplace(from);
    if (inserted) {
        it->second.timer = std::make_unique<RearmableTimer>(loop_);
        log("pim", "neighbor-up iface=" + from_iface + " addr=" + from.str());
    }
    it->second.expiry = loop_.now() + msg.holdtime;
    it->second.timer->arm(it->second.expiry,
                          [this, from_iface, from]() { neighbor_expired(from_iface, from); });
}

void PimRouter::neighbor_expired(const IfId& iface, Addr addr) {
    auto table = neighbors_.find(iface);
    if (table == neighbors_.end()) return;
    auto it = table->second.find(addr);
    if (it == table->second.end() || it->second.expiry > loop_.now()) return;
    table->second.erase(it);
    if (table->second.empty()) neighbors_.erase(table);
    log("pim", "neighbor-expire iface=" + iface + " addr=" + addr.str());
    // Point-to-point segments: downstream joins on that interface came from
    // the expired neighbor and die with it.
    bool changed = false;
    for (auto& [key, state] : states_) {
        if (state.downstream.erase(iface) > 0) {
            evaluate_upstream(state);
            changed = true;
        }
    }
    if (changed) notify_state_changed();
}

void PimRouter::on_join_prune(const IfId& from_iface, Addr from, const PimMessage& msg) {
    auto table = neighbors_.find(from_iface);
    if (table == neighbors_.end() || !table->second.count(from)) {
        ++ignored_messages_;
        log("pim", "ignored join-prune iface=" + from_iface + " from=" + from.str() +
                       " reason=unknown-neighbor");
        return;
    }
    const IfaceState& ifs = ifaces_.at(from_iface);
    if (msg.upstream_neighbor != ifs.addr) {
        ++ignored_messages_;
        return;
    }
    bool changed = false;
    for (const auto& entry : msg.joins) {
        PimGroupState& state = get_or_create_star_g(entry.group);
        if (from_iface == state.upstream_iface) {
            // A join on the RPF interface would make the iif an oif.
            ++ignored_messages_;
            log("pim", "ignored join iface=" + from_iface + " reason=rpf-iface");
            continue;
        }
        auto [it, inserted] = state.downstream.try_emplace(from_iface);
        if (inserted) it->second.timer = std::make_unique<RearmableTimer>(loop_);
        it->second.join_expiry = loop_.now() + msg.holdtime;
        StateKey key{entry.group, std::nullopt};
        IfId iface = from_iface;
        it->second.timer->arm(it->second.join_expiry,
                              [this, key, iface]() { downstream_expired(key, iface); });
        evaluate_upstream(state);
        changed = true;
    }
    for (const auto& entry : msg.prunes) {
        PimGroupState* state = find_star_g(entry.group);
        if (!state) continue;
        if (state->downstream.erase(from_iface) > 0) {
            evaluate_upstream(*state);
            changed = true;
        }
    }
    if (changed) notify_state_changed();
}

void PimRouter::downstream_expired(const StateKey& key, const IfId& iface) {
    auto it = states_.find(key);
    if (it == states_.end()) return;
    auto ds = it->second.downstream.find(iface);
    if (ds == it->second.downstream.end() || ds->second.join_expiry > loop_.now()) return;
    it->second.downstream.erase(ds);
    log("pim", "downstream-expire group=" + it->second.group.str() + " iface=" + iface);
    evaluate_upstream(it->second);
    notify_state_changed();
}

void PimRouter::on_source_data(const Packet& pkt, const IfId& iif) {
    auto group = GroupAddr::make(pkt.dst);
    if (!group) return;
    auto rp = rp_for(*group);
    if (!rp) {
        log("pim", "no-rp group=" + group->str());
        return;
    }
    if (cb_.owns_addr(*rp)) {
        // At the RP the connected source feeds the shared tree directly.
        StateKey key{*group, pkt.src};
        if (!states_.count(key)) {
            auto rpf = rib_.rpf_lookup(pkt.src);
            PimGroupState state;
            state.group = *group;
            state.source = pkt.src;
            state.upstream_iface = rpf ? rpf->iface : iif;
            state.upstream_neighbor = std::nullopt;
            state.refresh_timer = std::make_unique<RearmableTimer>(loop_);
            states_.emplace(key, std::move(state));
            log("pim", "source group=" + group->str() + " src=" + pkt.src.str() + " iif=" + iif);
            notify_state_changed();
        }
        return;
    }
    // Non-RP first hop: tunnel data to the RP unless suppressed.
    StateKey key{*group, pkt.src};
    auto it = states_.find(key);
    if (it == states_.end()) {
        auto rpf = rib_.rpf_lookup(pkt.src);
        PimGroupState state;
        state.group = *group;
        state.source = pkt.src;
        state.upstream_iface = rpf ? rpf->iface : iif;
        state.upstream_neighbor = std::nullopt;
        state.refresh_timer = std::make_unique<RearmableTimer>(loop_);
        it = states_.emplace(key, std::move(state)).first;
        notify_state_changed();
    }
    if (it->second.register_suppressed_until > loop_.now()) return;
    PimMessage reg;
    reg.kind = PimKind::Register;
    reg.inner_packet = pkt.serialize();
    log("pim", "register group=" + group->str() + " src=" + pkt.src.str() + " rp=" + rp->str());
    if (cb_.send_unicast) cb_.send_unicast(*rp, reg);
}

void PimRouter::on_register(Addr from, const PimMessage& msg) {
    auto inner = Packet::deserialize(msg.inner_packet);
    if (!inner) {
        ++ignored_messages_;
        return;
    }
    auto group = GroupAddr::make(inner->dst);
    if (!group) {
        ++ignored_messages_;
        return;
    }
    PimGroupState* star = find_star_g(*group);
    std::set<IfId> oifs;
    if (star) {
        oifs = star->downstream_ifaces();
        for (const auto& iface : star->local_members) oifs.insert(iface);
    }
    if (oifs.empty()) {
        PimMessage stop;
        stop.kind = PimKind::RegisterStop;
        stop.stop_group = *group;
        stop.stop_source = inner->src;
        log("pim", "register-stop group=" + group->str() + " src=" + inner->src.str() +
                       " dr=" + from.str());
        if (cb_.send_unicast) cb_.send_unicast(from, stop);
        return;
    }
    log("pim", "register-decap group=" + group->str() + " src=" + inner->src.str());
    if (cb_.forward_decap) cb_.forward_decap(*inner, oifs);
}

void PimRouter::on_register_stop(const PimMessage& msg) {
    if (!msg.stop_group) return;
    auto it = states_.find(StateKey{*msg.stop_group, msg.stop_source});
    if (it == states_.end()) return;
    it->second.register_suppressed_until = loop_.now() + timers_.register_suppression;
    log("pim", "register-suppress group=" + msg.stop_group->str() + " src=" +
                   msg.stop_source.str());
}

std::vector<MfibEntry> PimRouter::derive_mfib() const {
    std::vector<MfibEntry> out;
    for (const auto& [key, state] : states_) {
        std::set<IfId> oifs = state.downstream_ifaces();
        for (const auto& iface : state.local_members) oifs.insert(iface);
        if (state.source) {
            // (S,G) inherits the shared tree's receivers.
            auto star = states_.find(StateKey{state.group, std::nullopt});
            if (star != states_.end()) {
                for (const auto& iface : star->second.downstream_ifaces()) oifs.insert(iface);
                for (const auto& iface : star->second.local_members) oifs.insert(iface);
            }
        } else if (state.upstream_iface.empty()) {
            // (*,G) at the RP has no incoming interface; data arrives via
            // connected sources ((S,G) states) or register decapsulation.
            continue;
        }
        oifs.erase(state.upstream_iface);
        if (oifs.empty()) continue;
        MfibEntry entry;
        entry.source = state.source;
        entry.group = state.group;
        entry.iif = state.upstream_iface;
        entry.oifs = std::move(oifs);
        out.push_back(std::move(entry));
    }
    return out;
}

bool PimRouter::invariants_hold() const {
    for (const auto& [key, state] : states_) {
        if (state.joined_upstream != state.wanted()) return false;
        if (!state.upstream_iface.empty() && state.downstream.count(state.upstream_iface)) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> PimRouter::render_neighbors() const {
    std::vector<std::string> lines;
    for (const auto& [iface, table] : neighbors_) {
        for (const auto& [addr, entry] : table) {
            lines.push_back(iface + " " + addr.str() + " " +
                            std::to_string(entry.expiry - loop_.now()));
        }
    }
    return lines;
}

std::vector<std::string> PimRouter::render_join() const {
    std::vector<std::string> lines;
    for (const auto& [key, state] : states_) {
        std::set<IfId> oifs = state.downstream_ifaces();
        for (const auto& iface : state.local_members) oifs.insert(iface);
        oifs.erase(state.upstream_iface);
        std::string oifs_text = "{";
        bool first = true;
        for (const auto& oif : oifs) {
            if (!first) oifs_text += ",";
            oifs_text += oif;
            first = false;
        }
        oifs_text += "}";
        std::string line = "(";
        line += state.source ? state.source->str() : "*";
        line += "," + state.group.str() + ") iif=";
        line += state.upstream_iface.empty() ? "-" : state.upstream_iface;
        line += " oifs=" + oifs_text + " upstream=";
        line += state.upstream_neighbor ? state.upstream_neighbor->str() : "-";
        lines.push_back(line);
    }
    return lines;
}

} // namespace mcastsim
