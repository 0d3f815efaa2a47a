#pragma once

#include "mcastsim/addr.hpp"
#include "mcastsim/igmp.hpp"
#include "mcastsim/mfib.hpp"
#include "mcastsim/net.hpp"
#include "mcastsim/pim.hpp"
#include "mcastsim/rib.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

namespace mcastsim {

/// Well-known control destinations.
namespace mcast_groups {
inline const Addr kAllHosts{224, 0, 0, 1};
inline const Addr kV3Reports{224, 0, 0, 22};
inline const Addr kAllPimRouters{224, 0, 0, 13};
} // namespace mcast_groups

/// Virtual router: static RIB, per-interface IGMP querier, PIM-SM with
/// static RP, and an MFIB re-derived from PIM state after every control
/// event.
class Router : public Node {
public:
    Router(NodeId name, EventLoop& loop);

    RibTable& rib() { return rib_; }
    const RibTable& rib() const { return rib_; }
    Mfib& mfib() { return mfib_; }
    const Mfib& mfib() const { return mfib_; }
    PimRouter& pim() { return *pim_; }
    const PimRouter& pim() const { return *pim_; }

    /// Assigns an address and installs the connected route.
    void add_address(const IfId& iface, Addr addr, Prefix prefix);

    void enable_igmp(const IfId& iface);
    void enable_pim(const IfId& iface);

    IgmpRouterIf* igmp_iface(const IfId& iface);

    /// Kicks off queriers and hello schedules (run at load, t=0).
    void start();

    void receive(const IfId& iface, const Packet& pkt) override;

    /// Re-derives the MFIB from PIM state; called after control events.
    void sync_mfib();

    std::vector<std::string> show_route() const { return rib_.render(); }
    std::vector<std::string> show_mfib() const { return mfib_.render(); }
    std::vector<std::string> show_pim_join() const { return pim_->render_join(); }
    std::vector<std::string> show_pim_neighbors() const { return pim_->render_neighbors(); }
    std::vector<std::string> show_igmp_groups() const;

    IgmpTimers igmp_timers;
    PimTimers pim_timers;

private:
    void handle_igmp(const IfId& iface, const Packet& pkt);
    void handle_pim(const IfId& iface, const Packet& pkt);
    void handle_data(const IfId& iface, const Packet& pkt);
    void unicast_forward(const Packet& pkt);
    void send_igmp(const IfId& iface, const IgmpMessage& msg);
    Addr iface_addr(const IfId& iface) const;

    RibTable rib_;
    Mfib mfib_;
    std::unique_ptr<PimRouter> pim_;
    std::map<IfId, std::unique_ptr<IgmpRouterIf>> igmp_ifs_;
};

/// End host (or streaming source): one configured interface, IGMP host
/// side, delivery counters, optional constant-rate multicast emitters.
class Host : public Node {
public:
    Host(NodeId name, EventLoop& loop);

    void configure(const IfId& iface, Addr addr, Prefix prefix, std::optional<Addr> gateway);

    Addr addr() const { return addr_; }
    const IfId& iface() const { return iface_; }
    std::optional<Addr> gateway() const { return gateway_; }

    /// IGMP join; source-filtered delivery when `sources` is non-empty.
    void join(Addr group, std::set<Addr> sources = {});
    void leave(Addr group);

    /// Starts a constant-rate stream of `rate_pps` packets per second of
    /// `payload_bytes` each toward group:port. 1000 must be divisible by
    /// rate_pps so emissions stay on integer ticks.
    void start_stream(Addr group, uint16_t port, int rate_pps, uint32_t payload_bytes,
                      int ttl = 64);

    void receive(const IfId& iface, const Packet& pkt) override;

    uint64_t delivered(GroupAddr group) const;
    uint64_t delivered_total() const;

    IgmpHost* igmp() { return igmp_.get(); }

private:
    struct Stream {
        Packet packet;
        SimTime period = 0;
        std::unique_ptr<RearmableTimer> timer;
    };

    void emit(Stream& stream);

    IfId iface_;
    Addr addr_;
    std::optional<Addr> gateway_;
    std::unique_ptr<IgmpHost> igmp_;
    std::vector<std::unique_ptr<Stream>> streams_;
    std::map<GroupAddr, uint64_t> delivered_;
};

} // namespace mcastsim
