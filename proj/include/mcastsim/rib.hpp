#pragma once

#include "mcastsim/addr.hpp"
#include "mcastsim/net.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mcastsim {

/// Unicast routing entry. A connected route has no next hop; a static
/// route's next hop must lie inside some connected prefix.
struct RouteEntry {
    Prefix prefix;
    std::optional<Addr> next_hop; // nullopt = connected
    IfId out_iface;

    bool connected() const { return !next_hop.has_value(); }
    bool operator==(const RouteEntry&) const = default;
};

struct LookupResult {
    Addr next_hop; // for connected routes this is the destination itself
    IfId out_iface;

    bool operator==(const LookupResult&) const = default;
};

struct RpfResult {
    IfId iface;
    std::optional<Addr> upstream; // nullopt when the source is on a connected segment

    bool operator==(const RpfResult&) const = default;
};

/// Static unicast RIB with longest-prefix match. One entry per exact
/// prefix; re-adding replaces.
class RibTable {
public:
    /// Throws UnreachableNextHop when a static entry's next hop is not
    /// covered by any connected prefix already in the table.
    void add_route(const RouteEntry& entry);

    void remove_route(const Prefix& prefix);

    std::optional<LookupResult> lookup(Addr dst) const;

    /// Interface and next hop toward src; the only legal incoming
    /// interface for (src, G) data. Throws NotMulticast for group
    /// addresses.
    std::optional<RpfResult> rpf_lookup(Addr src) const;

    const std::map<Prefix, RouteEntry>& entries() const { return entries_; }

    /// One line per entry, `<prefix> via <next_hop> dev <iface>`,
    /// sorted by prefix.
    std::vector<std::string> render() const;

private:
    const RouteEntry* match(Addr dst) const;

    std::map<Prefix, RouteEntry> entries_;
};

} // namespace mcastsim
