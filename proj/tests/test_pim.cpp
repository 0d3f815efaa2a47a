#include "mcastsim/pim.hpp"

#include "mcastsim/errors.hpp"
#include "mcastsim/router.hpp"

#include <doctest.h>

using namespace mcastsim;

namespace {

Addr addr(const char* text) { return *Addr::parse(text); }
GroupAddr group(const char* text) { return *GroupAddr::parse(text); }
Prefix prefix(const char* text) { return *Prefix::parse(text); }

/// R2's control plane wired to capture callbacks.
struct PimRig {
    EventLoop loop;
    RibTable rib;
    PimTimers timers;
    std::vector<std::tuple<SimTime, IfId, PimMessage>> local;
    std::vector<std::tuple<SimTime, Addr, PimMessage>> unicast;
    bool self_is_rp = false;
    std::unique_ptr<PimRouter> pim;

    explicit PimRig(bool rp_self = false) : self_is_rp(rp_self) {
        rib.add_route(RouteEntry{prefix("172.16.1.0/24"), std::nullopt, "sis0"});
        rib.add_route(RouteEntry{prefix("172.16.2.0/24"), std::nullopt, "sis1"});
        rib.add_route(RouteEntry{prefix("172.16.3.0/24"), std::nullopt, "sis2"});
        rib.add_route(RouteEntry{prefix("172.16.0.0/24"), addr("172.16.2.245"), "sis1"});
        PimRouter::Callbacks cb;
        cb.send_local = [this](const IfId& iface, const PimMessage& msg) {
            local.emplace_back(loop.now(), iface, msg);
        };
        cb.send_unicast = [this](Addr dst, const PimMessage& msg) {
            unicast.emplace_back(loop.now(), dst, msg);
        };
        cb.owns_addr = [this](Addr a) { return self_is_rp && a == addr("172.16.2.245"); };
        pim = std::make_unique<PimRouter>(loop, rib, timers, std::move(cb));
        pim->enable_iface("sis0", addr("172.16.1.240"));
        pim->enable_iface("sis1", addr("172.16.2.240"));
        pim->enable_iface("sis2", addr("172.16.3.240"));
        pim->set_static_rp(RpMapping{prefix("224.0.0.0/4"), addr("172.16.2.245")});
    }

    MembershipChange change(const char* iface, bool joined) {
        return MembershipChange{iface, group("224.224.224.224"), joined, {}};
    }

    void learn_neighbor(const char* iface, Addr from) {
        PimMessage hello;
        hello.kind = PimKind::Hello;
        hello.holdtime = timers.hello_holdtime();
        pim->on_hello(iface, from, hello);
    }

    PimMessage join_prune(bool join, Addr upstream) {
        PimMessage msg;
        msg.kind = PimKind::JoinPrune;
        msg.holdtime = timers.join_prune_holdtime;
        msg.upstream_neighbor = upstream;
        JoinPruneEntry entry{group("224.224.224.224"), std::nullopt, addr("172.16.2.245")};
        if (join) {
            msg.joins.push_back(entry);
        } else {
            msg.prunes.push_back(entry);
        }
        return msg;
    }
};

} // namespace

TEST_CASE("static rp resolves by longest group-prefix match") {
    PimRig rig;
    CHECK(*rig.pim->rp_for(group("224.224.224.224")) == addr("172.16.2.245"));
    rig.pim->set_static_rp(RpMapping{prefix("224.224.0.0/16"), addr("172.16.1.240")});
    CHECK(*rig.pim->rp_for(group("224.224.224.224")) == addr("172.16.1.240"));
    CHECK(*rig.pim->rp_for(group("239.1.1.1")) == addr("172.16.2.245"));
}

TEST_CASE("rp must be reachable and the prefix multicast") {
    PimRig rig;
    CHECK_THROWS_AS(rig.pim->set_static_rp(RpMapping{prefix("224.0.0.0/4"), addr("9.9.9.9")}),
                    RpUnreachable);
    CHECK_THROWS_AS(rig.pim->set_static_rp(RpMapping{prefix("10.0.0.0/8"), addr("172.16.2.245")}),
                    SimError);
}

TEST_CASE("node recognizes itself as rp") {
    PimRig rp_rig(true);
    CHECK(rp_rig.pim->is_rp(group("224.224.224.224")));
    PimRig plain_rig;
    CHECK(!plain_rig.pim->is_rp(group("224.224.224.224")));
}

TEST_CASE("membership join sends (*,G) join toward the rp") {
    PimRig rig;
    rig.pim->on_membership_change(rig.change("sis0", true));
    REQUIRE(rig.local.size() == 1);
    auto& [at, iface, msg] = rig.local[0];
    CHECK(iface == "sis1");
    CHECK(msg.kind == PimKind::JoinPrune);
    CHECK(msg.upstream_neighbor == addr("172.16.2.245"));
    REQUIRE(msg.joins.size() == 1);
    CHECK(msg.joins[0].group == group("224.224.224.224"));
    CHECK(!msg.joins[0].source);
    CHECK(msg.joins[0].rp == addr("172.16.2.245"));
    CHECK(msg.holdtime == 210'000);
    CHECK(rig.pim->invariants_hold());
}

TEST_CASE("the rp itself records members without messaging upstream") {
    PimRig rig(true);
    rig.pim->on_membership_change(rig.change("sis0", true));
    CHECK(rig.local.empty());
    CHECK(rig.unicast.empty());
    CHECK(rig.pim->states().size() == 1);
    CHECK(rig.pim->invariants_hold());
}

TEST_CASE("membership change without an rp mapping fails") {
    EventLoop loop;
    RibTable rib;
    PimRouter::Callbacks cb;
    cb.owns_addr = [](Addr) { return false; };
    PimRouter pim(loop, rib, PimTimers{}, std::move(cb));
    CHECK_THROWS_AS(
        pim.on_membership_change(MembershipChange{"eth0", group("224.1.1.1"), true, {}}),
        NoRpForGroup);
}

TEST_CASE("last member leaving sends a prune") {
    PimRig rig;
    rig.pim->on_membership_change(rig.change("sis0", true));
    rig.pim->on_membership_change(rig.change("sis2", true));
    CHECK(rig.local.size() == 1); // second join changes nothing upstream
    rig.pim->on_membership_change(rig.change("sis0", false));
    CHECK(rig.local.size() == 1);
    rig.pim->on_membership_change(rig.change("sis2", false));
    REQUIRE(rig.local.size() == 2);
    CHECK(std::get<2>(rig.local[1]).prunes.size() == 1);
    const auto& state = rig.pim->states().begin()->second;
    CHECK(!state.joined_upstream);
    CHECK(rig.pim->invariants_hold());
}

TEST_CASE("join-prune from an unknown neighbor is ignored and counted") {
    PimRig rig;
    rig.pim->on_join_prune("sis0", addr("172.16.1.77"), rig.join_prune(true, addr("172.16.1.240")));
    CHECK(rig.pim->states().empty());
    CHECK(rig.pim->ignored_messages() == 1);
}

TEST_CASE("downstream joins install, refresh, and expire") {
    PimRig rig(true); // RP view: downstream join from the other router
    PimMessage hello;
    hello.kind = PimKind::Hello;
    hello.holdtime = 400'000; // outlive the join for this test
    rig.pim->on_hello("sis1", addr("172.16.2.240"), hello);

    rig.pim->on_join_prune("sis1", addr("172.16.2.240"),
                           rig.join_prune(true, addr("172.16.2.240")));
    REQUIRE(rig.pim->states().size() == 1);
    const auto& state = rig.pim->states().begin()->second;
    REQUIRE(state.downstream.count("sis1") == 1);
    CHECK(state.downstream.at("sis1").join_expiry == 210'000);
    CHECK(rig.local.empty()); // RP is the tree root

    rig.loop.run_until(100'000);
    rig.pim->on_join_prune("sis1", addr("172.16.2.240"),
                           rig.join_prune(true, addr("172.16.2.240")));
    CHECK(rig.pim->states().begin()->second.downstream.at("sis1").join_expiry == 310'000);

    rig.loop.run_until(309'999);
    CHECK(rig.pim->states().begin()->second.downstream.count("sis1") == 1);
    rig.loop.run_until(310'000);
    CHECK(rig.pim->states().begin()->second.downstream.empty());
    CHECK(rig.pim->invariants_hold());
}

TEST_CASE("derived mfib matches the staged examples") {
    PimRig rig;
    rig.pim->on_membership_change(rig.change("sis0", true));
    auto entries = rig.pim->derive_mfib();
    REQUIRE(entries.size() == 1);
    CHECK(!entries[0].source);
    CHECK(entries[0].group == group("224.224.224.224"));
    CHECK(entries[0].iif == "sis1");
    CHECK(entries[0].oifs == std::set<IfId>{"sis0"});

    rig.pim->on_membership_change(rig.change("sis2", true));
    entries = rig.pim->derive_mfib();
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].oifs == std::set<IfId>{"sis0", "sis2"});
}

TEST_CASE("a join arriving on the upstream interface never makes it an oif") {
    PimRig rig;
    rig.learn_neighbor("sis1", addr("172.16.2.245"));
    // Bogus join from upstream: downstream set gains the iif.
    rig.pim->on_join_prune("sis1", addr("172.16.2.245"),
                           rig.join_prune(true, addr("172.16.2.240")));
    rig.pim->on_membership_change(rig.change("sis0", true));
    auto entries = rig.pim->derive_mfib();
    REQUIRE(entries.size() == 1);
    for (const auto& entry : entries) {
        CHECK(entry.oifs.count(entry.iif) == 0);
        CHECK(entry.oifs == std::set<IfId>{"sis0"});
    }
    CHECK(rig.pim->ignored_messages() == 1);
}

TEST_CASE("hellos follow the period and neighbors expire exactly") {
    PimRig rig;
    rig.pim->start();
    rig.loop.run_until(65'000);
    std::vector<SimTime> hello_times;
    for (const auto& [at, iface, msg] : rig.local) {
        if (msg.kind == PimKind::Hello && iface == "sis0") hello_times.push_back(at);
    }
    CHECK(hello_times == std::vector<SimTime>{0, 30'000, 60'000});

    // One hello learned at t=65000, never refreshed.
    rig.learn_neighbor("sis1", addr("172.16.2.245"));
    CHECK(rig.pim->neighbors().at("sis1").size() == 1);
    rig.loop.run_until(65'000 + 104'999);
    CHECK(rig.pim->neighbors().count("sis1") == 1);
    rig.loop.run_until(65'000 + 105'000);
    CHECK(rig.pim->neighbors().count("sis1") == 0);
}

TEST_CASE("a silent neighbor takes its downstream joins with it") {
    PimRig rig(true);
    rig.learn_neighbor("sis1", addr("172.16.2.240")); // holdtime 105 s
    rig.pim->on_join_prune("sis1", addr("172.16.2.240"),
                           rig.join_prune(true, addr("172.16.2.240")));
    CHECK(rig.pim->states().begin()->second.downstream.count("sis1") == 1);
    rig.loop.run_until(105'000);
    CHECK(rig.pim->neighbors().count("sis1") == 0);
    CHECK(rig.pim->states().begin()->second.downstream.empty());
    CHECK(rig.pim->invariants_hold());
}

TEST_CASE("hello refresh keeps the neighbor") {
    PimRig rig;
    rig.learn_neighbor("sis1", addr("172.16.2.245"));
    rig.loop.run_until(100'000);
    rig.learn_neighbor("sis1", addr("172.16.2.245"));
    rig.loop.run_until(200'000);
    CHECK(rig.pim->neighbors().at("sis1").count(addr("172.16.2.245")) == 1);
}

TEST_CASE("join traffic is quiescent between refreshes") {
    PimRig rig;
    rig.pim->on_membership_change(rig.change("sis0", true));
    rig.loop.run_until(130'000);
    std::vector<SimTime> jp_times;
    for (const auto& [at, iface, msg] : rig.local) {
        if (msg.kind == PimKind::JoinPrune) jp_times.push_back(at);
    }
    // Initial join plus periodic refreshes, nothing in between.
    CHECK(jp_times == std::vector<SimTime>{0, 60'000, 120'000});
}

TEST_CASE("register lifecycle at a non-rp first hop") {
    Network net;
    auto& src = net.add_node<Host>("SRC");
    auto& ra = net.add_node<Router>("RA");
    auto& rb = net.add_node<Router>("RB");
    auto& rcv = net.add_node<Host>("RCV");
    net.connect(src, "eth0", ra, "eth0", 1);
    net.connect(ra, "eth1", rb, "eth0", 1);
    net.connect(rb, "eth1", rcv, "eth0", 1);

    ra.add_address("eth0", addr("10.0.0.240"), prefix("10.0.0.0/24"));
    ra.add_address("eth1", addr("10.0.1.1"), prefix("10.0.1.0/24"));
    rb.add_address("eth0", addr("10.0.1.2"), prefix("10.0.1.0/24"));
    rb.add_address("eth1", addr("10.0.2.240"), prefix("10.0.2.0/24"));
    src.configure("eth0", addr("10.0.0.33"), prefix("10.0.0.0/24"), addr("10.0.0.240"));
    rcv.configure("eth0", addr("10.0.2.33"), prefix("10.0.2.0/24"), addr("10.0.2.240"));

    for (const char* iface : {"eth0", "eth1"}) {
        ra.enable_igmp(iface);
        ra.enable_pim(iface);
        rb.enable_igmp(iface);
        rb.enable_pim(iface);
    }
    Addr rp = addr("10.0.1.2"); // RB's upstream-side address
    ra.pim().set_static_rp(RpMapping{prefix("224.0.0.0/4"), rp});
    rb.pim().set_static_rp(RpMapping{prefix("224.0.0.0/4"), rp});
    ra.start();
    rb.start();
    net.loop().run_until(10);

    Packet data;
    data.src = addr("10.0.0.33");
    data.dst = group("224.7.7.7").addr();
    data.ttl = 16;
    data.proto = Proto::DataUdp;
    data.dst_port = 1234;
    data.payload_len = 100;

    auto count_log = [&](const std::string& needle) {
        size_t n = 0;
        for (const auto& rec : net.loop().log().records()) {
            if (rec.detail.find(needle) != std::string::npos) ++n;
        }
        return n;
    };

    // No receivers anywhere: register, then register-stop, then suppression.
    src.transmit("eth0", data);
    net.loop().run_until(100);
    CHECK(count_log("register group=224.7.7.7") == 1);
    CHECK(count_log("register-stop group=224.7.7.7") == 1);
    CHECK(count_log("register-suppress group=224.7.7.7") == 1);

    src.transmit("eth0", data);
    net.loop().run_until(200);
    CHECK(count_log("register group=224.7.7.7") == 1); // suppressed

    // A receiver joins at the RP; after suppression lapses the register
    // flows again and the RP decapsulates onto the tree.
    rcv.join(group("224.7.7.7").addr(), {});
    net.loop().run_until(70'000);
    src.transmit("eth0", data);
    net.loop().run_until(70'100);
    CHECK(count_log("register group=224.7.7.7") == 2);
    CHECK(count_log("register-decap group=224.7.7.7") == 1);
    CHECK(rcv.delivered(group("224.7.7.7")) == 1);
    CHECK(count_log("register-stop group=224.7.7.7") == 1); // no new stop
}
