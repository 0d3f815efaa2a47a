#pragma once

#include "mcastsim/addr.hpp"
#include "mcastsim/event_loop.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mcastsim {

using NodeId = std::string;
using IfId = std::string;

enum class Proto : uint8_t { DataUdp = 0, Igmp = 1, Pim = 2 };

const char* proto_name(Proto proto);

/// Simulated datagram. Payload bytes are opaque; data packets usually carry
/// none and account for their size via payload_len alone.
struct Packet {
    Addr src;
    Addr dst;
    int ttl = 0;
    Proto proto = Proto::DataUdp;
    uint16_t dst_port = 0;
    uint32_t payload_len = 0;
    std::vector<uint8_t> payload;

    std::vector<uint8_t> serialize() const;
    static std::optional<Packet> deserialize(const std::vector<uint8_t>& bytes);

    bool operator==(const Packet&) const = default;
};

/// Per-direction wire counters; never decrease. tx counts are taken when a
/// packet is put on the link, rx counts when the peer receives it.
struct DirectionCounters {
    uint64_t data_packets = 0;
    uint64_t control_packets = 0;
    uint64_t bytes = 0;
    uint64_t data_packets_rx = 0;
    uint64_t control_packets_rx = 0;
    uint64_t bytes_rx = 0;

    bool operator==(const DirectionCounters&) const = default;
};

struct CounterSnapshot {
    DirectionCounters dir[2]; // dir[i]: transmitted by endpoint i

    bool operator==(const CounterSnapshot&) const = default;
};

class Node;

/// Point-to-point link between two (node, iface) endpoints.
class Link {
public:
    struct End {
        Node* node = nullptr;
        IfId iface;
    };

    Link(End a, End b, SimTime delay) : ends_{std::move(a), std::move(b)}, delay_(delay) {}

    const End& end(int i) const { return ends_[i]; }
    SimTime delay() const { return delay_; }

    /// Index of the endpoint owned by (node, iface), or -1.
    int end_index(const Node* node, const IfId& iface) const;

    CounterSnapshot counters() const { return counters_; }

    void count_tx(int from_end, const Packet& pkt);
    void count_rx(int from_end, const Packet& pkt);

private:
    End ends_[2];
    SimTime delay_;
    CounterSnapshot counters_;
};

struct IfAddr {
    Addr addr;
    Prefix prefix;
};

struct Interface {
    IfId name;
    bool enabled = true;
    std::vector<IfAddr> addrs;
    Link* link = nullptr;
    int link_end = -1;
};

/// A simulated device: owns interfaces and reacts to delivered packets.
class Node {
public:
    Node(NodeId name, EventLoop& loop) : name_(std::move(name)), loop_(&loop) {}
    virtual ~Node() = default;

    const NodeId& name() const { return name_; }
    EventLoop& loop() { return *loop_; }
    SimTime now() const { return loop_->now(); }

    Interface& add_interface(const IfId& iface);
    Interface* find_interface(const IfId& iface);
    const Interface* find_interface(const IfId& iface) const;
    const std::map<IfId, Interface>& interfaces() const { return ifaces_; }
    std::map<IfId, Interface>& interfaces() { return ifaces_; }

    /// True iff addr is assigned to one of this node's interfaces.
    bool owns_addr(Addr addr) const;

    /// Interface whose connected prefix covers addr, if any.
    const Interface* connected_iface_for(Addr addr) const;

    /// Puts pkt on the wire attached to iface. Throws IfaceDown when the
    /// interface is administratively disabled; no-link interfaces drop
    /// silently (counted in the log).
    void transmit(const IfId& iface, const Packet& pkt);

    virtual void receive(const IfId& iface, const Packet& pkt) = 0;

    void log(const std::string& kind, const std::string& detail) {
        loop_->log().append(loop_->now(), name_, kind, detail);
    }

private:
    NodeId name_;
    EventLoop* loop_;
    std::map<IfId, Interface> ifaces_;
};

/// Owns the event loop, nodes and links of one simulation.
class Network {
public:
    EventLoop& loop() { return loop_; }
    const EventLoop& loop() const { return loop_; }

    template <typename T, typename... Args>
    T& add_node(Args&&... args) {
        auto node = std::make_unique<T>(std::forward<Args>(args)..., loop_);
        T& ref = *node;
        nodes_.emplace(ref.name(), std::move(node));
        return ref;
    }

    Node* find_node(const NodeId& name);
    const std::map<NodeId, std::unique_ptr<Node>>& nodes() const { return nodes_; }

    /// Connects two node interfaces with a point-to-point link.
    Link& connect(Node& a, const IfId& ifa, Node& b, const IfId& ifb, SimTime delay = 1);

    const std::vector<std::unique_ptr<Link>>& links() const { return links_; }

    /// Link between the named nodes; nullptr when absent or ambiguous.
    Link* find_link(const NodeId& a, const NodeId& b);

private:
    EventLoop loop_;
    std::map<NodeId, std::unique_ptr<Node>> nodes_;
    std::vector<std::unique_ptr<Link>> links_;
};

} // namespace mcastsim
