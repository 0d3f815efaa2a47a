#pragma once

#include "mcastsim/addr.hpp"
#include "mcastsim/codecs.hpp"
#include "mcastsim/event_loop.hpp"
#include "mcastsim/igmp.hpp"
#include "mcastsim/mfib.hpp"
#include "mcastsim/net.hpp"
#include "mcastsim/rib.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mcastsim {

struct PimTimers {
    SimTime hello_period = 30'000;
    SimTime join_prune_period = 60'000;
    SimTime join_prune_holdtime = 210'000;
    SimTime register_suppression = 60'000;

    SimTime hello_holdtime() const { return hello_period * 7 / 2; } // 105 s
};

/// Static rendezvous-point mapping; longest group-prefix match wins.
struct RpMapping {
    Prefix group_prefix; // within 224.0.0.0/4
    Addr rp;
};

/// Per-(source?, group) tree state. source=nullopt is the shared (*,G)
/// entry; (S,G) state exists only where the source is directly connected
/// (first hop / RP).
struct PimGroupState {
    GroupAddr group;
    std::optional<Addr> source;
    IfId upstream_iface;                   // empty at the tree root
    std::optional<Addr> upstream_neighbor; // nullopt at the tree root
    std::set<IfId> local_members;
    bool joined_upstream = false;
    SimTime register_suppressed_until = 0; // first-hop register state

    struct Downstream {
        SimTime join_expiry = 0;
        std::unique_ptr<RearmableTimer> timer;
    };
    std::map<IfId, Downstream> downstream;
    std::unique_ptr<RearmableTimer> refresh_timer;

    bool wanted() const { return !downstream.empty() || !local_members.empty(); }
    std::set<IfId> downstream_ifaces() const;
};

/// PIM-SM control plane for one router: hellos and neighbors, static RP,
/// (*,G) join/prune propagation toward the RP, the register path at a
/// source's first hop, and MFIB derivation.
class PimRouter {
public:
    struct Callbacks {
        // Link-local control message out one interface.
        std::function<void(const IfId&, const PimMessage&)> send_local;
        // Unicast control message routed toward dst (register path).
        std::function<void(Addr dst, const PimMessage&)> send_unicast;
        // Data decapsulated from a register, to be sent out the given oifs.
        std::function<void(const Packet&, const std::set<IfId>&)> forward_decap;
        // Control state changed; the owner re-derives the MFIB.
        std::function<void()> state_changed;
        std::function<void(const std::string& kind, const std::string& detail)> log;
        std::function<bool(Addr)> owns_addr;
    };

    PimRouter(EventLoop& loop, const RibTable& rib, PimTimers timers, Callbacks callbacks);

    void enable_iface(const IfId& iface, Addr addr);
    bool iface_enabled(const IfId& iface) const { return ifaces_.count(iface) > 0; }

    /// Starts the hello schedule on every enabled interface.
    void start();

    /// Registers a static RP. Throws RpUnreachable when the RIB cannot
    /// resolve the RP address, and SimError for a non-multicast prefix.
    void set_static_rp(const RpMapping& mapping);

    std::optional<Addr> rp_for(GroupAddr group) const;
    bool is_rp(GroupAddr group) const;

    /// IGMP edge from the same node. Throws NoRpForGroup when no mapping
    /// covers the group.
    void on_membership_change(const MembershipChange& change);

    void on_hello(const IfId& from_iface, Addr from, const PimMessage& msg);
    void on_join_prune(const IfId& from_iface, Addr from, const PimMessage& msg);
    void on_register(Addr from, const PimMessage& msg);
    void on_register_stop(const PimMessage& msg);

    /// First-hop hook: called for multicast data whose source is on a
    /// connected segment of this router. May emit a register (non-RP
    /// first hop) or create (S,G) state (at the RP).
    void on_source_data(const Packet& pkt, const IfId& iif);

    /// Forwarding entries implied by current control state. States whose
    /// oif set is empty yield no entry.
    std::vector<MfibEntry> derive_mfib() const;

    struct Neighbor {
        SimTime expiry = 0;
        std::unique_ptr<RearmableTimer> timer;
    };

    const std::map<IfId, std::map<Addr, Neighbor>>& neighbors() const { return neighbors_; }

    using StateKey = std::pair<GroupAddr, std::optional<Addr>>;
    const std::map<StateKey, PimGroupState>& states() const { return states_; }

    uint64_t ignored_messages() const { return ignored_messages_; }

    /// joined_upstream ⇔ (downstream ∪ local members) ≠ ∅, for every state.
    bool invariants_hold() const;

    /// `show pim neighbors`: `<iface> <addr> <expiry-ms>` (remaining ms).
    std::vector<std::string> render_neighbors() const;
    /// `show pim join`: `(<*|S>,G) iif=<iface> oifs={…} upstream=<addr>`.
    std::vector<std::string> render_join() const;

private:
    struct IfaceState {
        Addr addr;
        std::unique_ptr<RearmableTimer> hello_timer;
    };

    PimGroupState& get_or_create_star_g(GroupAddr group);
    PimGroupState* find_star_g(GroupAddr group);
    void evaluate_upstream(PimGroupState& state);
    void send_join_prune(PimGroupState& state, bool join);
    void schedule_refresh(PimGroupState& state);
    void send_hello(const IfId& iface);
    void neighbor_expired(const IfId& iface, Addr addr);
    void downstream_expired(const StateKey& key, const IfId& iface);
    void notify_state_changed();
    void log(const std::string& kind, const std::string& detail) const;

    EventLoop& loop_;
    const RibTable& rib_;
    PimTimers timers_;
    Callbacks cb_;
    std::map<IfId, IfaceState> ifaces_;
    std::vector<RpMapping> rp_mappings_;
    std::map<IfId, std::map<Addr, Neighbor>> neighbors_;
    std::map<StateKey, PimGroupState> states_;
    uint64_t ignored_messages_ = 0;
};

} // namespace mcastsim
