#include "mcastsim/igmp.hpp"

#include "mcastsim/errors.hpp"

namespace mcastsim {

const char* filter_mode_name(FilterMode mode) {
    return mode == FilterMode::Include ? "INCLUDE" : "EXCLUDE";
}

IgmpHost::IgmpHost(EventLoop& loop, IfId iface, TransmitFn transmit)
    : loop_(loop), iface_(std::move(iface)), transmit_(std::move(transmit)),
      response_timer_(loop) {}

IgmpMessage IgmpHost::join(Addr group, std::set<Addr> sources) {
    auto g = GroupAddr::make(group);
    if (!g) throw NotMulticast(group.str() + " is not a multicast group");

    groups_[*g] = sources;

    GroupRecord rec;
    rec.group = *g;
    if (sources.empty()) {
        rec.type = RecordType::ChangeToExclude;
    } else {
        rec.type = RecordType::ChangeToInclude;
        rec.sources.assign(sources.begin(), sources.end());
    }
    IgmpMessage msg;
    msg.kind = IgmpKind::V3MembershipReport;
    msg.records.push_back(std::move(rec));
    transmit_(msg);
    return msg;
}

IgmpMessage IgmpHost::leave(Addr group) {
    auto g = GroupAddr::make(group);
    if (!g || groups_.erase(*g) == 0) {
        throw NotMember("not a member of " + group.str());
    }
    IgmpMessage msg;
    msg.kind = IgmpKind::V3MembershipReport;
    msg.records.push_back(GroupRecord{RecordType::ChangeToInclude, *g, {}});
    transmit_(msg);
    return msg;
}

void IgmpHost::on_query(const IgmpMessage& query) {
    std::optional<GroupAddr> only;
    if (query.group != Addr(0)) {
        auto g = GroupAddr::make(query.group);
        if (!g || !member_of(*g)) return;
        only = *g;
    } else if (groups_.empty()) {
        return;
    }
    response_timer_.arm(loop_.now() + query_response_delay,
                        [this, only]() { send_current_state(only); });
}

void IgmpHost::send_current_state(std::optional<GroupAddr> only_group) {
    IgmpMessage msg;
    msg.kind = IgmpKind::V3MembershipReport;
    for (const auto& [group, sources] : groups_) {
        if (only_group && group != *only_group) continue;
        GroupRecord rec;
        rec.group = group;
        if (sources.empty()) {
            rec.type = RecordType::ModeIsExclude;
        } else {
            rec.type = RecordType::ModeIsInclude;
            rec.sources.assign(sources.begin(), sources.end());
        }
        msg.records.push_back(std::move(rec));
    }
    if (!msg.records.empty()) transmit_(msg);
}

IgmpRouterIf::IgmpRouterIf(EventLoop& loop, IfId iface, IgmpTimers timers,
                           TransmitFn transmit, ChangeFn change, LogFn log)
    : loop_(loop), iface_(std::move(iface)), timers_(timers),
      transmit_(std::move(transmit)), change_(std::move(change)), log_(std::move(log)),
      query_timer_(loop) {}

void IgmpRouterIf::start() {
    send_general_query();
}

void IgmpRouterIf::send_general_query() {
    IgmpMessage query;
    query.kind = IgmpKind::MembershipQuery;
    query.group = Addr(0);
    query.max_resp_time = timers_.query_response_interval;
    transmit_(query);
    query_timer_.arm(loop_.now() + timers_.query_interval, [this]() { send_general_query(); });
}

void IgmpRouterIf::emit_change(const MembershipChange& change,
                               std::vector<MembershipChange>* out) {
    if (log_) {
        log_("igmp", std::string(change.joined ? "join" : "expire") + " iface=" + change.iface +
                         " group=" + change.group.str());
    }
    if (out) out->push_back(change);
    if (change_) change_(change);
}

void IgmpRouterIf::arm_expiry(GroupAddr group, SimTime at) {
    auto it = groups_.find(group);
    if (it == groups_.end()) return;
    it->second.expiry = at;
    it->second.timer->arm(at, [this, group]() { expire(group); });
}

void IgmpRouterIf::expire(GroupAddr group) {
    auto it = groups_.find(group);
    if (it == groups_.end()) return;
    if (it->second.expiry > loop_.now()) return; // refreshed since armed
    std::set<Addr> sources = it->second.sources;
    groups_.erase(it);
    MembershipChange change{iface_, group, false, std::move(sources)};
    emit_change(change, nullptr);
}

void IgmpRouterIf::refresh(GroupAddr group, FilterMode mode, const std::set<Addr>& sources,
                           std::vector<MembershipChange>& out) {
    auto [it, inserted] = groups_.try_emplace(group);
    if (inserted) it->second.timer = std::make_unique<RearmableTimer>(loop_);
    it->second.mode = mode;
    it->second.sources = sources;
    arm_expiry(group, loop_.now() + timers_.group_membership_interval());
    if (inserted) {
        emit_change(MembershipChange{iface_, group, true, sources}, &out);
    }
}

void IgmpRouterIf::lower_expiry_for_leave(GroupAddr group) {
    auto it = groups_.find(group);
    if (it == groups_.end()) {
        ++ignored_records_;
        return;
    }
    // Last-member check: group-specific query, then a short expiry window.
    IgmpMessage query;
    query.kind = IgmpKind::MembershipQuery;
    query.group = group.addr();
    query.max_resp_time = timers_.last_member_query_interval;
    transmit_(query);
    SimTime at = loop_.now() + timers_.last_member_query_time();
    if (at < it->second.expiry) arm_expiry(group, at);
}

std::vector<MembershipChange> IgmpRouterIf::receive_report(const IgmpMessage& msg) {
    std::vector<MembershipChange> out;
    if (msg.kind == IgmpKind::LeaveGroup) {
        if (auto g = GroupAddr::make(msg.group)) {
            lower_expiry_for_leave(*g);
        } else {
            ++ignored_records_;
        }
        return out;
    }
    if (msg.kind != IgmpKind::V3MembershipReport) {
        ++ignored_records_;
        return out;
    }
    for (const auto& rec : msg.records) {
        std::set<Addr> sources(rec.sources.begin(), rec.sources.end());
        switch (rec.type) {
            case RecordType::ChangeToInclude:
            case RecordType::ModeIsInclude:
                if (sources.empty()) {
                    // INCLUDE with no sources means no membership.
                    if (rec.type == RecordType::ChangeToInclude) {
                        lower_expiry_for_leave(rec.group);
                    } else {
                        ++ignored_records_;
                    }
                } else {
                    refresh(rec.group, FilterMode::Include, sources, out);
                }
                break;
            case RecordType::ChangeToExclude:
            case RecordType::ModeIsExclude:
                refresh(rec.group, FilterMode::Exclude, sources, out);
                break;
            default:
                ++ignored_records_;
                break;
        }
    }
    return out;
}

std::vector<std::string> IgmpRouterIf::render() const {
    std::vector<std::string> lines;
    for (const auto& [group, entry] : groups_) {
        lines.push_back(iface_ + " " + group.str() + " " + filter_mode_name(entry.mode) + " " +
                        std::to_string(entry.expiry - loop_.now()));
    }
    return lines;
}

} // namespace mcastsim
