#pragma once

#include "mcastsim/addr.hpp"
#include "mcastsim/event_loop.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace mcastsim {

enum class IgmpKind : uint8_t { MembershipQuery, V3MembershipReport, LeaveGroup };

enum class RecordType : uint8_t {
    ModeIsInclude = 1,
    ModeIsExclude = 2,
    ChangeToInclude = 3,
    ChangeToExclude = 4,
};

const char* record_type_name(RecordType type);

struct GroupRecord {
    RecordType type = RecordType::ModeIsInclude;
    GroupAddr group;
    std::vector<Addr> sources;

    bool operator==(const GroupRecord&) const = default;
};

struct IgmpMessage {
    IgmpKind kind = IgmpKind::MembershipQuery;
    // Query or leave group; 0.0.0.0 means a general query.
    Addr group;
    // Queries only; encoded at seconds granularity.
    SimTime max_resp_time = 0;
    // V3MembershipReport only; must be non-empty there.
    std::vector<GroupRecord> records;

    bool operator==(const IgmpMessage&) const = default;
};

enum class PimKind : uint8_t { Hello, JoinPrune, Register, RegisterStop };

/// Join or prune row: wildcard source is encoded as 0.0.0.0.
struct JoinPruneEntry {
    GroupAddr group;
    std::optional<Addr> source; // nullopt = wildcard (*,G)
    Addr rp;

    bool operator==(const JoinPruneEntry&) const = default;
};

struct PimMessage {
    PimKind kind = PimKind::Hello;
    SimTime holdtime = 0;         // Hello, JoinPrune; seconds granularity on the wire
    Addr upstream_neighbor;       // JoinPrune
    std::vector<JoinPruneEntry> joins;
    std::vector<JoinPruneEntry> prunes;
    std::optional<GroupAddr> stop_group;  // RegisterStop
    Addr stop_source;                     // RegisterStop
    std::vector<uint8_t> inner_packet;    // Register

    bool operator==(const PimMessage&) const = default;
};

using Message = std::variant<IgmpMessage, PimMessage>;

enum class DecodeError { BadChecksum, TruncatedMessage, UnknownKind };

const char* decode_error_name(DecodeError err);

using DecodeResult = std::variant<Message, DecodeError>;

/// 16-bit ones-complement of the ones-complement sum; odd-length input is
/// padded with one zero byte. Empty input yields 0xFFFF.
uint16_t internet_checksum(std::span<const uint8_t> bytes);

/// Canonical byte encoding with the checksum field populated.
/// Layouts are documented in docs/formats.md and frozen by the golden
/// vectors under tests/golden/.
std::vector<uint8_t> encode(const IgmpMessage& msg);
std::vector<uint8_t> encode(const PimMessage& msg);
std::vector<uint8_t> encode(const Message& msg);

/// Checksum is verified before any structural parsing.
DecodeResult decode(std::span<const uint8_t> bytes);

} // namespace mcastsim
