#pragma once

#include "mcastsim/addr.hpp"
#include "mcastsim/net.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mcastsim {

/// Multicast forwarding entry: (S,G) or wildcard-source (*,G).
struct MfibEntry {
    std::optional<Addr> source; // nullopt = wildcard
    GroupAddr group;
    IfId iif;
    std::set<IfId> oifs; // never contains iif
    uint64_t pkt_count = 0;
    uint64_t byte_count = 0;

    std::string str() const;
};

enum class ForwardOutcome { Forwarded, RpfDrop, TtlDrop, NoEntry };

const char* forward_outcome_name(ForwardOutcome outcome);

struct ForwardResult {
    ForwardOutcome outcome = ForwardOutcome::NoEntry;
    // Copies to put on the wire, ttl already decremented.
    std::vector<std::pair<IfId, Packet>> copies;
};

/// Per-group data-plane accounting. Every packet handed to forward() lands
/// in exactly one of forwarded/rpf_drops/ttl_drops/no_entry_drops.
struct GroupAccounting {
    uint64_t packets_in = 0;
    uint64_t forwarded = 0;
    uint64_t copies_out = 0;
    uint64_t rpf_drops = 0;
    uint64_t ttl_drops = 0;
    uint64_t no_entry_drops = 0;

    bool balanced() const {
        return packets_in == forwarded + rpf_drops + ttl_drops + no_entry_drops;
    }
};

/// Multicast forwarding cache with RPF discipline.
class Mfib {
public:
    /// Re-installing the same (source, group) key updates iif/oifs in
    /// place and preserves counters.
    void install(const MfibEntry& entry);
    void remove(const std::optional<Addr>& source, GroupAddr group);

    /// Replaces the cache contents with `derived`, preserving counters of
    /// entries whose key survives.
    void reconcile(const std::vector<MfibEntry>& derived);

    /// RPF check plus fan-out. (S,G) beats (*,G). Drops are outcomes, not
    /// errors. The copies carry ttl-1; a packet whose ttl would reach 0 is
    /// suppressed and counted.
    ForwardResult forward(const Packet& pkt, const IfId& arrived_on);

    /// Called on an RPF failure with the arrival interface; inert hook for
    /// control-plane reactions.
    std::function<void(const Packet&, const IfId&)> rpf_drop_hook;

    using Key = std::pair<GroupAddr, std::optional<Addr>>;
    const std::map<Key, MfibEntry>& entries() const { return entries_; }
    const MfibEntry* find(const std::optional<Addr>& source, GroupAddr group) const;

    const std::map<GroupAddr, GroupAccounting>& accounting() const { return accounting_; }

    /// `show mfib`: `(<S|*>,G) iif=<iface> oifs={…} pkts=<n> bytes=<n>`.
    std::vector<std::string> render() const;

private:
    std::map<Key, MfibEntry> entries_;
    std::map<GroupAddr, GroupAccounting> accounting_;
};

} // namespace mcastsim
