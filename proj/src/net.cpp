#include "mcastsim/net.hpp"

#include "mcastsim/errors.hpp"

namespace mcastsim {

const char* proto_name(Proto proto) {
    switch (proto) {
        case Proto::DataUdp: return "data";
        case Proto::Igmp: return "igmp";
        case Proto::Pim: return "pim";
    }
    return "?";
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

} // namespace

std::vector<uint8_t> Packet::serialize() const {
    std::vector<uint8_t> out;
    out.reserve(16 + payload.size());
    put_u32(out, src.value());
    put_u32(out, dst.value());
    out.push_back(uint8_t(ttl));
    out.push_back(uint8_t(proto));
    put_u16(out, dst_port);
    put_u32(out, payload_len);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::optional<Packet> Packet::deserialize(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 16) return std::nullopt;
    auto u32 = [&](size_t at) {
        return (uint32_t(bytes[at]) << 24) | (uint32_t(bytes[at + 1]) << 16) |
               (uint32_t(bytes[at + 2]) << 8) | uint32_t(bytes[at + 3]);
    };
    Packet pkt;
    pkt.src = Addr(u32(0));
    pkt.dst = Addr(u32(4));
    pkt.ttl = bytes[8];
    if (bytes[9] > uint8_t(Proto::Pim)) return std::nullopt;
    pkt.proto = Proto(bytes[9]);
    pkt.dst_port = uint16_t((bytes[10] << 8) | bytes[11]);
    pkt.payload_len = u32(12);
    pkt.payload.assign(bytes.begin() + 16, bytes.end());
    return pkt;
}

int Link::end_index(const Node* node, const IfId& iface) const {
    for (int i = 0; i < 2; ++i) {
        if (ends_[i].node == node && ends_[i].iface == iface) return i;
    }
    return -1;
}

void Link::count_tx(int from_end, const Packet& pkt) {
    auto& c = counters_.dir[from_end];
    if (pkt.proto == Proto::DataUdp) {
        ++c.data_packets;
    } else {
        ++c.control_packets;
    }
    c.bytes += pkt.payload_len;
}

void Link::count_rx(int from_end, const Packet& pkt) {
    auto& c = counters_.dir[from_end];
    if (pkt.proto == Proto::DataUdp) {
        ++c.data_packets_rx;
    } else {
        ++c.control_packets_rx;
    }
    c.bytes_rx += pkt.payload_len;
}

Interface& Node::add_interface(const IfId& iface) {
    auto [it, inserted] = ifaces_.try_emplace(iface);
    if (inserted) it->second.name = iface;
    return it->second;
}

Interface* Node::find_interface(const IfId& iface) {
    auto it = ifaces_.find(iface);
    return it == ifaces_.end() ? nullptr : &it->second;
}

const Interface* Node::find_interface(const IfId& iface) const {
    auto it = ifaces_.find(iface);
    return it == ifaces_.end() ? nullptr : &it->second;
}

bool Node::owns_addr(Addr addr) const {
    for (const auto& [name, iface] : ifaces_) {
        for (const auto& ia : iface.addrs) {
            if (ia.addr == addr) return true;
        }
    }
    return false;
}

const Interface* Node::connected_iface_for(Addr addr) const {
    for (const auto& [name, iface] : ifaces_) {
        if (!iface.enabled) continue;
        for (const auto& ia : iface.addrs) {
            if (ia.prefix.contains(addr)) return &iface;
        }
    }
    return nullptr;
}

void Node::transmit(const IfId& iface, const Packet& pkt) {
    Interface* ifp = find_interface(iface);
    if (!ifp) throw SimError(name_ + ": transmit on unknown interface " + iface);
    if (!ifp->enabled) throw IfaceDown(name_ + ": interface " + iface + " is disabled");
    if (pkt.ttl < 1) throw SimError(name_ + ": refusing to transmit ttl 0 packet");
    if (!ifp->link) {
        log("drop", "iface=" + iface + " reason=no-link");
        return;
    }
    Link* link = ifp->link;
    int from = ifp->link_end;
    link->count_tx(from, pkt);
    log("tx", "iface=" + iface + " proto=" + proto_name(pkt.proto) + " src=" + pkt.src.str() +
                  " dst=" + pkt.dst.str() + " len=" + std::to_string(pkt.payload_len));
    const Link::End& peer = link->end(1 - from);
    Node* peer_node = peer.node;
    IfId peer_iface = peer.iface;
    Packet copy = pkt;
    loop_->schedule(loop_->now() + link->delay(), [link, from, peer_node, peer_iface, copy]() {
        const Interface* pif = peer_node->find_interface(peer_iface);
        if (pif && !pif->enabled) {
            peer_node->log("drop", "iface=" + peer_iface + " reason=iface-down");
            return;
        }
        link->count_rx(from, copy);
        peer_node->log("rx", "iface=" + peer_iface + " proto=" + std::string(proto_name(copy.proto)) +
                                 " src=" + copy.src.str() + " dst=" + copy.dst.str() +
                                 " len=" + std::to_string(copy.payload_len));
        peer_node->receive(peer_iface, copy);
    });
}

Node* Network::find_node(const NodeId& name) {
    auto it = nodes_.find(name);
    return it == nodes_.end() ? nullptr : it->second.get();
}

Link& Network::connect(Node& a, const IfId& ifa, Node& b, const IfId& ifb, SimTime delay) {
    auto link = std::make_unique<Link>(Link::End{&a, ifa}, Link::End{&b, ifb}, delay);
    Link& ref = *link;
    links_.push_back(std::move(link));
    Interface& ia = a.add_interface(ifa);
    ia.link = &ref;
    ia.link_end = 0;
    Interface& ib = b.add_interface(ifb);
    ib.link = &ref;
    ib.link_end = 1;
    return ref;
}

Link* Network::find_link(const NodeId& a, const NodeId& b) {
    Link* found = nullptr;
    for (auto& link : links_) {
        const NodeId& n0 = link->end(0).node->name();
        const NodeId& n1 = link->end(1).node->name();
        if ((n0 == a && n1 == b) || (n0 == b && n1 == a)) {
            if (found) return nullptr; // ambiguous
            found = link.get();
        }
    }
    return found;
}

} // namespace mcastsim
