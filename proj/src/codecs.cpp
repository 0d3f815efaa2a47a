#include "mcastsim/codecs.hpp"

#include "mcastsim/errors.hpp"

#include <set>

namespace mcastsim {

// Canonical kind bytes. IGMP reuses the conventional type codes; PIM gets a
// disjoint 0x3x family so one decoder entry point can tell them apart.
namespace wire {
constexpr uint8_t kIgmpQuery = 0x11;
constexpr uint8_t kIgmpV3Report = 0x22;
constexpr uint8_t kIgmpLeave = 0x17;
constexpr uint8_t kPimHello = 0x30;
constexpr uint8_t kPimJoinPrune = 0x31;
constexpr uint8_t kPimRegister = 0x32;
constexpr uint8_t kPimRegisterStop = 0x33;
constexpr size_t kChecksumOffset = 2;
} // namespace wire

const char* record_type_name(RecordType type) {
    switch (type) {
        case RecordType::ModeIsInclude: return "MODE_IS_INCLUDE";
        case RecordType::ModeIsExclude: return "MODE_IS_EXCLUDE";
        case RecordType::ChangeToInclude: return "CHANGE_TO_INCLUDE";
        case RecordType::ChangeToExclude: return "CHANGE_TO_EXCLUDE";
    }
    return "?";
}

const char* decode_error_name(DecodeError err) {
    switch (err) {
        case DecodeError::BadChecksum: return "BadChecksum";
        case DecodeError::TruncatedMessage: return "TruncatedMessage";
        case DecodeError::UnknownKind: return "UnknownKind";
    }
    return "?";
}

uint16_t internet_checksum(std::span<const uint8_t> bytes) {
    uint32_t sum = 0;
    size_t i = 0;
    for (; i + 1 < bytes.size(); i += 2) {
        sum += uint32_t(bytes[i]) << 8 | bytes[i + 1];
    }
    if (i < bytes.size()) sum += uint32_t(bytes[i]) << 8; // odd length: pad with zero
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return uint16_t(~sum);
}

namespace {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v & 0xFF));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

void put_addr(std::vector<uint8_t>& out, Addr a) { put_u32(out, a.value()); }

uint16_t seconds_field(SimTime ms) { return uint16_t(ms / 1000); }

void finish(std::vector<uint8_t>& out) {
    uint16_t sum = internet_checksum(out);
    out[wire::kChecksumOffset] = uint8_t(sum >> 8);
    out[wire::kChecksumOffset + 1] = uint8_t(sum & 0xFF);
}

/// Cursor with truncation tracking over the undecoded tail.
struct Reader {
    std::span<const uint8_t> bytes;
    size_t pos = 0;
    bool truncated = false;

    uint8_t u8() {
        if (pos + 1 > bytes.size()) {
            truncated = true;
            return 0;
        }
        return bytes[pos++];
    }
    uint16_t u16() {
        uint16_t hi = u8(), lo = u8();
        return uint16_t(hi << 8 | lo);
    }
    uint32_t u32() {
        uint32_t hi = u16(), lo = u16();
        return hi << 16 | lo;
    }
    Addr addr() { return Addr(u32()); }
    std::vector<uint8_t> rest() {
        std::vector<uint8_t> out(bytes.begin() + pos, bytes.end());
        pos = bytes.size();
        return out;
    }
    bool done() const { return pos == bytes.size(); }
};

void check_join_prune_disjoint(const PimMessage& msg) {
    std::set<std::pair<std::optional<Addr>, Addr>> joined;
    for (const auto& e : msg.joins) joined.insert({e.source, e.group.addr()});
    for (const auto& e : msg.prunes) {
        if (joined.count({e.source, e.group.addr()})) {
            throw SimError("join/prune lists overlap for " + e.group.str());
        }
    }
}

void put_join_prune_entry(std::vector<uint8_t>& out, const JoinPruneEntry& e) {
    put_addr(out, e.group.addr());
    put_addr(out, e.source.value_or(Addr(0)));
    put_addr(out, e.rp);
}

std::optional<JoinPruneEntry> read_join_prune_entry(Reader& r) {
    Addr group = r.addr();
    Addr source = r.addr();
    Addr rp = r.addr();
    if (r.truncated) return std::nullopt;
    auto g = GroupAddr::make(group);
    if (!g) return std::nullopt;
    JoinPruneEntry e{*g, source == Addr(0) ? std::nullopt : std::optional<Addr>(source), rp};
    return e;
}

} // namespace

std::vector<uint8_t> encode(const IgmpMessage& msg) {
    std::vector<uint8_t> out;
    switch (msg.kind) {
        case IgmpKind::MembershipQuery:
            out.push_back(wire::kIgmpQuery);
            out.push_back(uint8_t(seconds_field(msg.max_resp_time)));
            put_u16(out, 0); // checksum
            put_addr(out, msg.group);
            break;
        case IgmpKind::V3MembershipReport: {
            if (msg.records.empty()) throw SimError("v3 report must carry at least one record");
            out.push_back(wire::kIgmpV3Report);
            out.push_back(0);
            put_u16(out, 0); // checksum
            put_u16(out, 0); // reserved
            put_u16(out, uint16_t(msg.records.size()));
            for (const auto& rec : msg.records) {
                out.push_back(uint8_t(rec.type));
                out.push_back(0);
                put_u16(out, uint16_t(rec.sources.size()));
                put_addr(out, rec.group.addr());
                for (Addr src : rec.sources) put_addr(out, src);
            }
            break;
        }
        case IgmpKind::LeaveGroup:
            out.push_back(wire::kIgmpLeave);
            out.push_back(0);
            put_u16(out, 0); // checksum
            put_addr(out, msg.group);
            break;
    }
    finish(out);
    return out;
}

std::vector<uint8_t> encode(const PimMessage& msg) {
    std::vector<uint8_t> out;
    switch (msg.kind) {
        case PimKind::Hello:
            out.push_back(wire::kPimHello);
            out.push_back(0);
            put_u16(out, 0); // checksum
            put_u16(out, seconds_field(msg.holdtime));
            break;
        case PimKind::JoinPrune:
            check_join_prune_disjoint(msg);
            out.push_back(wire::kPimJoinPrune);
            out.push_back(0);
            put_u16(out, 0); // checksum
            put_addr(out, msg.upstream_neighbor);
            put_u16(out, seconds_field(msg.holdtime));
            put_u16(out, uint16_t(msg.joins.size()));
            put_u16(out, uint16_t(msg.prunes.size()));
            for (const auto& e : msg.joins) put_join_prune_entry(out, e);
            for (const auto& e : msg.prunes) put_join_prune_entry(out, e);
            break;
        case PimKind::Register:
            out.push_back(wire::kPimRegister);
            out.push_back(0);
            put_u16(out, 0); // checksum
            out.insert(out.end(), msg.inner_packet.begin(), msg.inner_packet.end());
            break;
        case PimKind::RegisterStop:
            if (!msg.stop_group) throw SimError("register-stop needs a group");
            out.push_back(wire::kPimRegisterStop);
            out.push_back(0);
            put_u16(out, 0); // checksum
            put_addr(out, msg.stop_group->addr());
            put_addr(out, msg.stop_source);
            break;
    }
    finish(out);
    return out;
}

std::vector<uint8_t> encode(const Message& msg) {
    if (std::holds_alternative<IgmpMessage>(msg)) return encode(std::get<IgmpMessage>(msg));
    return encode(std::get<PimMessage>(msg));
}

DecodeResult decode(std::span<const uint8_t> bytes) {
    if (bytes.size() < 4) return DecodeError::TruncatedMessage;
    if (internet_checksum(bytes) != 0) return DecodeError::BadChecksum;

    Reader r{bytes};
    uint8_t kind = r.u8();
    switch (kind) {
        case wire::kIgmpQuery: {
            IgmpMessage msg;
            msg.kind = IgmpKind::MembershipQuery;
            msg.max_resp_time = SimTime(r.u8()) * 1000;
            r.u16(); // checksum
            msg.group = r.addr();
            if (r.truncated || !r.done()) return DecodeError::TruncatedMessage;
            return Message(msg);
        }
        case wire::kIgmpLeave: {
            IgmpMessage msg;
            msg.kind = IgmpKind::LeaveGroup;
            r.u8();
            r.u16(); // checksum
            msg.group = r.addr();
            if (r.truncated || !r.done()) return DecodeError::TruncatedMessage;
            return Message(msg);
        }
        case wire::kIgmpV3Report: {
            IgmpMessage msg;
            msg.kind = IgmpKind::V3MembershipReport;
            r.u8();
            r.u16(); // checksum
            r.u16(); // reserved
            uint16_t nrecords = r.u16();
            if (nrecords == 0) return DecodeError::TruncatedMessage;
            for (uint16_t i = 0; i < nrecords; ++i) {
                uint8_t rtype = r.u8();
                r.u8();
                uint16_t nsrc = r.u16();
                Addr group = r.addr();
                if (r.truncated) return DecodeError::TruncatedMessage;
                if (rtype < uint8_t(RecordType::ModeIsInclude) ||
                    rtype > uint8_t(RecordType::ChangeToExclude)) {
                    return DecodeError::UnknownKind;
                }
                auto g = GroupAddr::make(group);
                if (!g) return DecodeError::UnknownKind;
                GroupRecord rec{RecordType(rtype), *g, {}};
                for (uint16_t s = 0; s < nsrc; ++s) rec.sources.push_back(r.addr());
                if (r.truncated) return DecodeError::TruncatedMessage;
                msg.records.push_back(std::move(rec));
            }
            if (!r.done()) return DecodeError::TruncatedMessage;
            return Message(msg);
        }
        case wire::kPimHello: {
            PimMessage msg;
            msg.kind = PimKind::Hello;
            r.u8();
            r.u16(); // checksum
            msg.holdtime = SimTime(r.u16()) * 1000;
            if (r.truncated || !r.done()) return DecodeError::TruncatedMessage;
            return Message(msg);
        }
        case wire::kPimJoinPrune: {
            PimMessage msg;
            msg.kind = PimKind::JoinPrune;
            r.u8();
            r.u16(); // checksum
            msg.upstream_neighbor = r.addr();
            msg.holdtime = SimTime(r.u16()) * 1000;
            uint16_t njoins = r.u16();
            uint16_t nprunes = r.u16();
            if (r.truncated) return DecodeError::TruncatedMessage;
            for (uint16_t i = 0; i < njoins; ++i) {
                auto e = read_join_prune_entry(r);
                if (!e) return r.truncated ? DecodeError::TruncatedMessage : DecodeError::UnknownKind;
                msg.joins.push_back(*e);
            }
            for (uint16_t i = 0; i < nprunes; ++i) {
                auto e = read_join_prune_entry(r);
                if (!e) return r.truncated ? DecodeError::TruncatedMessage : DecodeError::UnknownKind;
                msg.prunes.push_back(*e);
            }
            if (!r.done()) return DecodeError::TruncatedMessage;
            return Message(msg);
        }
        case wire::kPimRegister: {
            PimMessage msg;
            msg.kind = PimKind::Register;
            r.u8();
            r.u16(); // checksum
            msg.inner_packet = r.rest();
            return Message(msg);
        }
        case wire::kPimRegisterStop: {
            PimMessage msg;
            msg.kind = PimKind::RegisterStop;
            r.u8();
            r.u16(); // checksum
            Addr group = r.addr();
            msg.stop_source = r.addr();
            if (r.truncated || !r.done()) return DecodeError::TruncatedMessage;
            auto g = GroupAddr::make(group);
            if (!g) return DecodeError::UnknownKind;
            msg.stop_group = *g;
            return Message(msg);
        }
        default:
            return DecodeError::UnknownKind;
    }
}

} // namespace mcastsim
