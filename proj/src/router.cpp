#include "mcastsim/router.hpp"

#include "mcastsim/errors.hpp"

namespace mcastsim {

Router::Router(NodeId name, EventLoop& loop) : Node(std::move(name), loop) {
    PimRouter::Callbacks cb;
    cb.send_local = [this](const IfId& iface, const PimMessage& msg) {
        Packet pkt;
        pkt.src = iface_addr(iface);
        pkt.dst = mcast_groups::kAllPimRouters;
        pkt.ttl = 1;
        pkt.proto = Proto::Pim;
        pkt.payload = encode(msg);
        pkt.payload_len = uint32_t(pkt.payload.size());
        transmit(iface, pkt);
    };
    cb.send_unicast = [this](Addr dst, const PimMessage& msg) {
        auto route = rib_.lookup(dst);
        if (!route) {
            log("drop", "proto=pim dst=" + dst.str() + " reason=no-route");
            return;
        }
        Packet pkt;
        pkt.src = iface_addr(route->out_iface);
        pkt.dst = dst;
        pkt.ttl = 64;
        pkt.proto = Proto::Pim;
        pkt.payload = encode(msg);
        pkt.payload_len = uint32_t(pkt.payload.size());
        transmit(route->out_iface, pkt);
    };
    cb.forward_decap = [this](const Packet& inner, const std::set<IfId>& oifs) {
        if (inner.ttl - 1 <= 0) {
            log("drop", "proto=data reason=ttl group=" + inner.dst.str());
            return;
        }
        Packet copy = inner;
        copy.ttl -= 1;
        for (const auto& oif : oifs) transmit(oif, copy);
    };
    cb.state_changed = [this]() { sync_mfib(); };
    cb.log = [this](const std::string& kind, const std::string& detail) { log(kind, detail); };
    cb.owns_addr = [this](Addr addr) { return owns_addr(addr); };
    pim_ = std::make_unique<PimRouter>(loop, rib_, pim_timers, std::move(cb));
}

Addr Router::iface_addr(const IfId& iface) const {
    const Interface* ifp = find_interface(iface);
    if (!ifp || ifp->addrs.empty()) return Addr(0);
    return ifp->addrs.front().addr;
}

void Router::add_address(const IfId& iface, Addr addr, Prefix prefix) {
    Interface& ifp = add_interface(iface);
    ifp.addrs.push_back(IfAddr{addr, prefix});
    rib_.add_route(RouteEntry{prefix, std::nullopt, iface});
}

void Router::enable_igmp(const IfId& iface) {
    if (igmp_ifs_.count(iface)) return;
    auto transmit_fn = [this, iface](const IgmpMessage& msg) { send_igmp(iface, msg); };
    auto change_fn = [this](const MembershipChange& change) {
        try {
            pim_->on_membership_change(change);
        } catch (const NoRpForGroup&) {
            log("pim", "no-rp group=" + change.group.str());
        }
    };
    auto log_fn = [this](const std::string& kind, const std::string& detail) {
        log(kind, detail);
    };
    igmp_ifs_.emplace(iface, std::make_unique<IgmpRouterIf>(loop(), iface, igmp_timers,
                                                            transmit_fn, change_fn, log_fn));
}

void Router::enable_pim(const IfId& iface) {
    pim_->enable_iface(iface, iface_addr(iface));
}

IgmpRouterIf* Router::igmp_iface(const IfId& iface) {
    auto it = igmp_ifs_.find(iface);
    return it == igmp_ifs_.end() ? nullptr : it->second.get();
}

void Router::start() {
    for (auto& [iface, igmp] : igmp_ifs_) igmp->start();
    pim_->start();
}

void Router::send_igmp(const IfId& iface, const IgmpMessage& msg) {
    Packet pkt;
    pkt.src = iface_addr(iface);
    pkt.dst = msg.kind == IgmpKind::MembershipQuery
                  ? (msg.group == Addr(0) ? mcast_groups::kAllHosts : msg.group)
                  : mcast_groups::kV3Reports;
    pkt.ttl = 1;
    pkt.proto = Proto::Igmp;
    pkt.payload = encode(msg);
    pkt.payload_len = uint32_t(pkt.payload.size());
    transmit(iface, pkt);
}

void Router::sync_mfib() {
    mfib_.reconcile(pim_->derive_mfib());
}

void Router::receive(const IfId& iface, const Packet& pkt) {
    switch (pkt.proto) {
        case Proto::Igmp: handle_igmp(iface, pkt); return;
        case Proto::Pim: handle_pim(iface, pkt); return;
        case Proto::DataUdp: handle_data(iface, pkt); return;
    }
}

void Router::handle_igmp(const IfId& iface, const Packet& pkt) {
    auto decoded = decode(pkt.payload);
    if (std::holds_alternative<DecodeError>(decoded)) {
        log("drop", "proto=igmp iface=" + iface + " reason=" +
                        decode_error_name(std::get<DecodeError>(decoded)));
        return;
    }
    const auto& msg = std::get<Message>(decoded);
    if (!std::holds_alternative<IgmpMessage>(msg)) {
        log("drop", "proto=igmp iface=" + iface + " reason=not-igmp");
        return;
    }
    const IgmpMessage& igmp_msg = std::get<IgmpMessage>(msg);
    if (igmp_msg.kind == IgmpKind::MembershipQuery) return; // sole querier per segment
    IgmpRouterIf* state = igmp_iface(iface);
    if (!state) {
        log("drop", "proto=igmp iface=" + iface + " reason=igmp-disabled");
        return;
    }
    state->receive_report(igmp_msg);
}

void Router::handle_pim(const IfId& iface, const Packet& pkt) {
    auto decoded = decode(pkt.payload);
    if (std::holds_alternative<DecodeError>(decoded)) {
        log("drop", "proto=pim iface=" + iface + " reason=" +
                        decode_error_name(std::get<DecodeError>(decoded)));
        return;
    }
    const auto& msg = std::get<Message>(decoded);
    if (!std::holds_alternative<PimMessage>(msg)) {
        log("drop", "proto=pim iface=" + iface + " reason=not-pim");
        return;
    }
    const PimMessage& pim_msg = std::get<PimMessage>(msg);
    if (is_multicast(pkt.dst)) {
        switch (pim_msg.kind) {
            case PimKind::Hello: pim_->on_hello(iface, pkt.src, pim_msg); return;
            case PimKind::JoinPrune: pim_->on_join_prune(iface, pkt.src, pim_msg); return;
            default:
                log("drop", "proto=pim iface=" + iface + " reason=unexpected-kind");
                return;
        }
    }
    if (owns_addr(pkt.dst)) {
        switch (pim_msg.kind) {
            case PimKind::Register: pim_->on_register(pkt.src, pim_msg); return;
            case PimKind::RegisterStop: pim_->on_register_stop(pim_msg); return;
            default:
                log("drop", "proto=pim iface=" + iface + " reason=unexpected-kind");
                return;
        }
    }
    unicast_forward(pkt);
}

void Router::handle_data(const IfId& iface, const Packet& pkt) {
    if (is_multicast(pkt.dst)) {
        // First-hop check: connected source feeding this router directly.
        const Interface* ifp = find_interface(iface);
        if (ifp) {
            for (const auto& ia : ifp->addrs) {
                if (ia.prefix.contains(pkt.src)) {
                    pim_->on_source_data(pkt, iface);
                    break;
                }
            }
        }
        ForwardResult result = mfib_.forward(pkt, iface);
        if (result.outcome == ForwardOutcome::Forwarded) {
            for (const auto& [oif, copy] : result.copies) transmit(oif, copy);
        } else {
            log("drop", "proto=data group=" + pkt.dst.str() + " iface=" + iface +
                            " reason=" + forward_outcome_name(result.outcome));
        }
        return;
    }
    if (owns_addr(pkt.dst)) {
        log("deliver", "proto=data dst=" + pkt.dst.str() + " src=" + pkt.src.str());
        return;
    }
    unicast_forward(pkt);
}

void Router::unicast_forward(const Packet& pkt) {
    if (pkt.ttl - 1 <= 0) {
        log("drop", "proto=" + std::string(proto_name(pkt.proto)) + " dst=" + pkt.dst.str() +
                        " reason=ttl");
        return;
    }
    auto route = rib_.lookup(pkt.dst);
    if (!route) {
        log("drop", "proto=" + std::string(proto_name(pkt.proto)) + " dst=" + pkt.dst.str() +
                        " reason=no-route");
        return;
    }
    Packet copy = pkt;
    copy.ttl -= 1;
    transmit(route->out_iface, copy);
}

std::vector<std::string> Router::show_igmp_groups() const {
    std::vector<std::string> lines;
    for (const auto& [iface, igmp] : igmp_ifs_) {
        for (const auto& line : igmp->render()) lines.push_back(line);
    }
    return lines;
}

Host::Host(NodeId name, EventLoop& loop) : Node(std::move(name), loop) {}

void Host::configure(const IfId& iface, Addr addr, Prefix prefix, std::optional<Addr> gateway) {
    Interface& ifp = add_interface(iface);
    ifp.addrs.push_back(IfAddr{addr, prefix});
    iface_ = iface;
    addr_ = addr;
    gateway_ = gateway;
    igmp_ = std::make_unique<IgmpHost>(this->loop(), iface, [this](const IgmpMessage& msg) {
        Packet pkt;
        pkt.src = addr_;
        pkt.dst = msg.kind == IgmpKind::MembershipQuery ? mcast_groups::kAllHosts
                                                        : mcast_groups::kV3Reports;
        pkt.ttl = 1;
        pkt.proto = Proto::Igmp;
        pkt.payload = encode(msg);
        pkt.payload_len = uint32_t(pkt.payload.size());
        transmit(iface_, pkt);
    });
}

void Host::join(Addr group, std::set<Addr> sources) {
    if (!igmp_) throw SimError(name() + " has no configured interface");
    log("igmp", "join group=" + group.str());
    igmp_->join(group, std::move(sources));
}

void Host::leave(Addr group) {
    if (!igmp_) throw SimError(name() + " has no configured interface");
    log("igmp", "leave group=" + group.str());
    igmp_->leave(group);
}

void Host::start_stream(Addr group, uint16_t port, int rate_pps, uint32_t payload_bytes,
                        int ttl) {
    if (!igmp_) throw SimError(name() + " has no configured interface");
    if (rate_pps <= 0 || 1000 % rate_pps != 0) {
        throw SimError("stream rate must divide 1000 packets/s");
    }
    auto stream = std::make_unique<Stream>();
    stream->packet.src = addr_;
    stream->packet.dst = group;
    stream->packet.ttl = ttl;
    stream->packet.proto = Proto::DataUdp;
    stream->packet.dst_port = port;
    stream->packet.payload_len = payload_bytes;
    stream->period = 1000 / rate_pps;
    stream->timer = std::make_unique<RearmableTimer>(loop());
    Stream& ref = *stream;
    streams_.push_back(std::move(stream));
    log("scenario", "source-start group=" + group.str() + " port=" + std::to_string(port) +
                        " rate=" + std::to_string(rate_pps) + "pps len=" +
                        std::to_string(payload_bytes));
    emit(ref);
}

void Host::emit(Stream& stream) {
    transmit(iface_, stream.packet);
    stream.timer->arm(now() + stream.period, [this, &stream]() { emit(stream); });
}

void Host::receive(const IfId& /*iface*/, const Packet& pkt) {
    switch (pkt.proto) {
        case Proto::Igmp: {
            auto decoded = decode(pkt.payload);
            if (!std::holds_alternative<Message>(decoded)) return;
            const auto& msg = std::get<Message>(decoded);
            if (!std::holds_alternative<IgmpMessage>(msg)) return;
            const IgmpMessage& igmp_msg = std::get<IgmpMessage>(msg);
            if (igmp_msg.kind == IgmpKind::MembershipQuery && igmp_) igmp_->on_query(igmp_msg);
            return;
        }
        case Proto::Pim:
            return; // hosts do not speak PIM
        case Proto::DataUdp: {
            if (is_multicast(pkt.dst)) {
                auto group = GroupAddr::make(pkt.dst);
                if (!group || !igmp_ || !igmp_->member_of(*group)) {
                    log("drop", "proto=data group=" + pkt.dst.str() + " reason=not-joined");
                    return;
                }
                const auto& sources = igmp_->groups().at(*group);
                if (!sources.empty() && !sources.count(pkt.src)) {
                    log("drop", "proto=data group=" + pkt.dst.str() + " src=" + pkt.src.str() +
                                    " reason=source-filter");
                    return;
                }
                ++delivered_[*group];
                log("deliver", "group=" + pkt.dst.str() + " src=" + pkt.src.str() + " port=" +
                                   std::to_string(pkt.dst_port) + " len=" +
                                   std::to_string(pkt.payload_len));
                return;
            }
            if (pkt.dst == addr_) {
                log("deliver", "proto=data dst=" + pkt.dst.str() + " src=" + pkt.src.str());
            }
            return;
        }
    }
}

uint64_t Host::delivered(GroupAddr group) const {
    auto it = delivered_.find(group);
    return it == delivered_.end() ? 0 : it->second;
}

uint64_t Host::delivered_total() const {
    uint64_t total = 0;
    for (const auto& [group, count] : delivered_) total += count;
    return total;
}

} // namespace mcastsim
