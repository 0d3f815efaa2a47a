#pragma once

#include "mcastsim/addr.hpp"
#include "mcastsim/codecs.hpp"
#include "mcastsim/event_loop.hpp"
#include "mcastsim/net.hpp"

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace mcastsim {

struct IgmpTimers {
    SimTime query_interval = 125'000;
    SimTime query_response_interval = 10'000;
    int robustness = 2;
    SimTime last_member_query_interval = 1'000;

    SimTime group_membership_interval() const {
        return robustness * query_interval + query_response_interval;
    }
    SimTime last_member_query_time() const {
        return robustness * last_member_query_interval;
    }
};

/// Edge-triggered membership transition handed to the PIM side.
struct MembershipChange {
    IfId iface;
    GroupAddr group;
    bool joined = false;
    std::set<Addr> sources;
};

enum class FilterMode { Include, Exclude };

const char* filter_mode_name(FilterMode mode);

/// Host-side membership: tracks joined groups and answers queries.
class IgmpHost {
public:
    using TransmitFn = std::function<void(const IgmpMessage&)>;

    IgmpHost(EventLoop& loop, IfId iface, TransmitFn transmit);

    /// Records membership and emits an unsolicited state-change report.
    /// Re-joining refreshes on the wire without changing local state.
    /// Throws NotMulticast for a non-group address.
    IgmpMessage join(Addr group, std::set<Addr> sources);

    /// Emits CHANGE_TO_INCLUDE({}) and forgets the group. Throws NotMember.
    IgmpMessage leave(Addr group);

    void on_query(const IgmpMessage& query);

    bool member_of(GroupAddr group) const { return groups_.count(group) > 0; }
    const std::map<GroupAddr, std::set<Addr>>& groups() const { return groups_; }

    /// Delay before answering a query; fixed so runs stay deterministic.
    SimTime query_response_delay = 100;

private:
    void send_current_state(std::optional<GroupAddr> only_group);

    EventLoop& loop_;
    IfId iface_;
    TransmitFn transmit_;
    std::map<GroupAddr, std::set<Addr>> groups_;
    RearmableTimer response_timer_;
};

/// Router-side querier and membership database for one interface.
class IgmpRouterIf {
public:
    using TransmitFn = std::function<void(const IgmpMessage&)>;
    using ChangeFn = std::function<void(const MembershipChange&)>;
    using LogFn = std::function<void(const std::string& kind, const std::string& detail)>;

    IgmpRouterIf(EventLoop& loop, IfId iface, IgmpTimers timers,
                 TransmitFn transmit, ChangeFn change, LogFn log);

    /// Starts the periodic general query schedule (first query immediately).
    void start();

    /// Applies a received report; returns the membership transitions it
    /// caused. The same transitions are also delivered through the change
    /// callback. Unknown or inapplicable records are ignored and counted.
    std::vector<MembershipChange> receive_report(const IgmpMessage& msg);

    struct GroupEntry {
        FilterMode mode = FilterMode::Exclude;
        std::set<Addr> sources;
        SimTime expiry = 0;
        std::unique_ptr<RearmableTimer> timer;
    };

    const std::map<GroupAddr, GroupEntry>& groups() const { return groups_; }
    const IfId& iface() const { return iface_; }
    uint64_t ignored_records() const { return ignored_records_; }

    /// `<iface> <group> <mode> <expiry-ms>` per group (remaining ms).
    std::vector<std::string> render() const;

private:
    void send_general_query();
    void lower_expiry_for_leave(GroupAddr group);
    void refresh(GroupAddr group, FilterMode mode, const std::set<Addr>& sources,
                 std::vector<MembershipChange>& out);
    void arm_expiry(GroupAddr group, SimTime at);
    void expire(GroupAddr group);
    void emit_change(const MembershipChange& change, std::vector<MembershipChange>* out);

    EventLoop& loop_;
    IfId iface_;
    IgmpTimers timers_;
    TransmitFn transmit_;
    ChangeFn change_;
    LogFn log_;
    std::map<GroupAddr, GroupEntry> groups_;
    RearmableTimer query_timer_;
    uint64_t ignored_records_ = 0;
};

} // namespace mcastsim
