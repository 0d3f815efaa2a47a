#include "mcastsim/mfib.hpp"

#include "mcastsim/errors.hpp"

namespace mcastsim {

namespace {

std::string oifs_str(const std::set<IfId>& oifs) {
    std::string out = "{";
    bool first = true;
    for (const auto& oif : oifs) {
        if (!first) out += ",";
        out += oif;
        first = false;
    }
    out += "}";
    return out;
}

} // namespace

std::string MfibEntry::str() const {
    std::string s = "(";
    s += source ? source->str() : "*";
    s += ",";
    s += group.str();
    s += ") iif=" + iif + " oifs=" + oifs_str(oifs);
    s += " pkts=" + std::to_string(pkt_count) + " bytes=" + std::to_string(byte_count);
    return s;
}

const char* forward_outcome_name(ForwardOutcome outcome) {
    switch (outcome) {
        case ForwardOutcome::Forwarded: return "forwarded";
        case ForwardOutcome::RpfDrop: return "rpf";
        case ForwardOutcome::TtlDrop: return "ttl";
        case ForwardOutcome::NoEntry: return "no-entry";
    }
    return "?";
}

void Mfib::install(const MfibEntry& entry) {
    if (entry.oifs.count(entry.iif)) {
        throw SimError("mfib entry for " + entry.group.str() + " lists iif in oifs");
    }
    Key key{entry.group, entry.source};
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        entries_.emplace(key, entry);
        return;
    }
    // Preserve counters; adopt the new forwarding shape.
    it->second.iif = entry.iif;
    it->second.oifs = entry.oifs;
}

void Mfib::remove(const std::optional<Addr>& source, GroupAddr group) {
    entries_.erase(Key{group, source});
}

void Mfib::reconcile(const std::vector<MfibEntry>& derived) {
    std::set<Key> keep;
    for (const auto& entry : derived) {
        keep.insert(Key{entry.group, entry.source});
        install(entry);
    }
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (keep.count(it->first)) {
            ++it;
        } else {
            it = entries_.erase(it);
        }
    }
}

const MfibEntry* Mfib::find(const std::optional<Addr>& source, GroupAddr group) const {
    auto it = entries_.find(Key{group, source});
    return it == entries_.end() ? nullptr : &it->second;
}

ForwardResult Mfib::forward(const Packet& pkt, const IfId& arrived_on) {
    auto group = GroupAddr::make(pkt.dst);
    if (!group) throw NotMulticast("mfib forward of unicast dst " + pkt.dst.str());

    GroupAccounting& acct = accounting_[*group];
    ++acct.packets_in;

    ForwardResult result;
    // (S,G) exact match beats (*,G).
    auto it = entries_.find(Key{*group, pkt.src});
    if (it == entries_.end()) it = entries_.find(Key{*group, std::nullopt});
    if (it == entries_.end()) {
        ++acct.no_entry_drops;
        result.outcome = ForwardOutcome::NoEntry;
        return result;
    }

    MfibEntry& entry = it->second;
    if (arrived_on != entry.iif) {
        ++acct.rpf_drops;
        result.outcome = ForwardOutcome::RpfDrop;
        if (rpf_drop_hook) rpf_drop_hook(pkt, arrived_on);
        return result;
    }

    if (pkt.ttl - 1 <= 0) {
        ++acct.ttl_drops;
        result.outcome = ForwardOutcome::TtlDrop;
        return result;
    }

    entry.pkt_count += 1;
    entry.byte_count += pkt.payload_len;
    ++acct.forwarded;
    result.outcome = ForwardOutcome::Forwarded;
    for (const auto& oif : entry.oifs) {
        Packet copy = pkt;
        copy.ttl -= 1;
        result.copies.emplace_back(oif, std::move(copy));
        ++acct.copies_out;
    }
    return result;
}

std::vector<std::string> Mfib::render() const {
    std::vector<std::string> lines;
    lines.reserve(entries_.size());
    for (const auto& [key, entry] : entries_) lines.push_back(entry.str());
    return lines;
}

} // namespace mcastsim
