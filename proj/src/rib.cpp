#include "mcastsim/rib.hpp"

#include "mcastsim/errors.hpp"

namespace mcastsim {

void RibTable::add_route(const RouteEntry& entry) {
    if (entry.next_hop) {
        bool reachable = false;
        for (const auto& [prefix, e] : entries_) {
            if (e.connected() && prefix.contains(*entry.next_hop)) {
                reachable = true;
                break;
            }
        }
        if (!reachable) {
            throw UnreachableNextHop("next hop " + entry.next_hop->str() +
                                     " is in no connected prefix");
        }
    }
    entries_.insert_or_assign(entry.prefix, entry);
}

void RibTable::remove_route(const Prefix& prefix) {
    entries_.erase(prefix);
}

const RouteEntry* RibTable::match(Addr dst) const {
    const RouteEntry* best = nullptr;
    for (const auto& [prefix, entry] : entries_) {
        if (!prefix.contains(dst)) continue;
        if (!best || prefix.length() > best->prefix.length()) best = &entry;
    }
    return best;
}

std::optional<LookupResult> RibTable::lookup(Addr dst) const {
    const RouteEntry* best = match(dst);
    if (!best) return std::nullopt;
    return LookupResult{best->connected() ? dst : *best->next_hop, best->out_iface};
}

std::optional<RpfResult> RibTable::rpf_lookup(Addr src) const {
    if (is_multicast(src)) {
        throw NotMulticast("rpf lookup of multicast address " + src.str());
    }
    const RouteEntry* best = match(src);
    if (!best) return std::nullopt;
    return RpfResult{best->out_iface, best->next_hop};
}

std::vector<std::string> RibTable::render() const {
    std::vector<std::string> lines;
    lines.reserve(entries_.size());
    for (const auto& [prefix, entry] : entries_) {
        std::string via = entry.connected() ? "connected" : entry.next_hop->str();
        lines.push_back(prefix.str() + " via " + via + " dev " + entry.out_iface);
    }
    return lines;
}

} // namespace mcastsim
