#include "mcastsim/errors.hpp"
#include "mcastsim/net.hpp"
#include "mcastsim/router.hpp"

#include <doctest.h>

#include <random>

using namespace mcastsim;

namespace {

/// Minimal node that records what it receives.
class SinkNode : public Node {
public:
    using Node::Node;
    void receive(const IfId& iface, const Packet& pkt) override {
        received.emplace_back(iface, pkt);
    }
    std::vector<std::pair<IfId, Packet>> received;
};

Packet data_packet(uint32_t len = 1316) {
    Packet pkt;
    pkt.src = *Addr::parse("172.16.0.33");
    pkt.dst = *Addr::parse("224.224.224.224");
    pkt.ttl = 64;
    pkt.proto = Proto::DataUdp;
    pkt.dst_port = 1234;
    pkt.payload_len = len;
    return pkt;
}

} // namespace

TEST_CASE("events dispatch in time order, ties in insertion order") {
    EventLoop loop;
    std::vector<int> order;
    loop.schedule(5, [&]() { order.push_back(2); });
    loop.schedule(0, [&]() { order.push_back(1); });
    loop.schedule(5, [&]() { order.push_back(3); });
    loop.run_until(10);
    CHECK(order == std::vector<int>{1, 2, 3});
    CHECK(loop.now() == 10);
}

TEST_CASE("single scheduled event fires first") {
    EventLoop loop;
    bool fired = false;
    loop.schedule(0, [&]() { fired = true; });
    loop.run_until(0);
    CHECK(fired);
}

TEST_CASE("cancel before dispatch suppresses the event") {
    EventLoop loop;
    bool fired = false;
    EventHandle handle = loop.schedule(5, [&]() { fired = true; });
    loop.cancel(handle);
    loop.run_until(10);
    CHECK(!fired);
    CHECK(loop.dispatched() == 0);
}

TEST_CASE("scheduling in the past is rejected") {
    EventLoop loop;
    loop.run_until(100);
    CHECK_THROWS_AS(loop.schedule(99, []() {}), SchedulingInPast);
    CHECK_NOTHROW(loop.schedule(100, []() {}));
}

TEST_CASE("run_until is resumable") {
    auto schedule_all = [](EventLoop& loop, std::vector<SimTime>& fired) {
        for (SimTime t : {1000, 5000, 7500, 10000}) {
            loop.schedule(t, [&fired, &loop]() { fired.push_back(loop.now()); });
        }
    };
    EventLoop loop_a;
    EventLoop loop_b;
    std::vector<SimTime> fired_a, fired_b;
    schedule_all(loop_a, fired_a);
    schedule_all(loop_b, fired_b);
    loop_a.run_until(5000);
    loop_a.run_until(10000);
    loop_b.run_until(10000);
    CHECK(fired_a == fired_b);
}

TEST_CASE("empty queue run produces an empty log") {
    EventLoop loop;
    loop.run_until(1000);
    CHECK(loop.log().records().empty());
}

TEST_CASE("timer re-arm moves the deadline") {
    EventLoop loop;
    std::vector<SimTime> fired;
    RearmableTimer timer(loop);
    timer.arm(10, [&]() { fired.push_back(loop.now()); });
    timer.arm(20, [&]() { fired.push_back(loop.now()); });
    loop.run_until(30);
    CHECK(fired == std::vector<SimTime>{20});
}

TEST_CASE("transmit delivers after link delay and counts by class") {
    Network net;
    auto& a = net.add_node<SinkNode>("A");
    auto& b = net.add_node<SinkNode>("B");
    Link& link = net.connect(a, "eth0", b, "eth0", 3);

    a.transmit("eth0", data_packet());
    CHECK(link.counters().dir[0].data_packets == 1);
    CHECK(link.counters().dir[0].bytes == 1316);
    CHECK(b.received.empty());
    net.loop().run_until(2);
    CHECK(b.received.empty());
    net.loop().run_until(3);
    REQUIRE(b.received.size() == 1);
    CHECK(b.received[0].first == "eth0");
    CHECK(b.received[0].second.payload_len == 1316);
    CHECK(link.counters().dir[0].data_packets_rx == 1);

    Packet igmp = data_packet(20);
    igmp.proto = Proto::Igmp;
    a.transmit("eth0", igmp);
    net.loop().run_until(10);
    CHECK(link.counters().dir[0].control_packets == 1);
    CHECK(link.counters().dir[0].data_packets == 1); // unchanged by control
}

TEST_CASE("transmit on a disabled interface fails") {
    Network net;
    auto& a = net.add_node<SinkNode>("A");
    auto& b = net.add_node<SinkNode>("B");
    net.connect(a, "eth0", b, "eth0", 1);
    a.find_interface("eth0")->enabled = false;
    CHECK_THROWS_AS(a.transmit("eth0", data_packet()), IfaceDown);
}

TEST_CASE("counter oracle: link counters equal tx records in the log") {
    Network net;
    auto& a = net.add_node<SinkNode>("A");
    auto& b = net.add_node<SinkNode>("B");
    Link& link = net.connect(a, "eth0", b, "eth0", 1);

    for (int i = 0; i < 17; ++i) a.transmit("eth0", data_packet());
    Packet ctrl = data_packet(24);
    ctrl.proto = Proto::Pim;
    for (int i = 0; i < 5; ++i) a.transmit("eth0", ctrl);
    net.loop().run_until(10);

    uint64_t tx_data = 0, tx_ctrl = 0, rx_data = 0;
    for (const auto& rec : net.loop().log().records()) {
        if (rec.node == "A" && rec.kind == "tx" &&
            rec.detail.find("proto=data") != std::string::npos) {
            ++tx_data;
        }
        if (rec.node == "A" && rec.kind == "tx" &&
            rec.detail.find("proto=pim") != std::string::npos) {
            ++tx_ctrl;
        }
        if (rec.node == "B" && rec.kind == "rx" &&
            rec.detail.find("proto=data") != std::string::npos) {
            ++rx_data;
        }
    }
    CHECK(link.counters().dir[0].data_packets == tx_data);
    CHECK(link.counters().dir[0].control_packets == tx_ctrl);
    CHECK(link.counters().dir[0].data_packets_rx == rx_data);
    // Conservation: everything transmitted was received.
    CHECK(link.counters().dir[0].data_packets == link.counters().dir[0].data_packets_rx);
    CHECK(link.counters().dir[0].control_packets == link.counters().dir[0].control_packets_rx);
}

TEST_CASE("identical runs produce byte-identical logs") {
    auto run_once = []() {
        Network net;
        auto& a = net.add_node<SinkNode>("A");
        auto& b = net.add_node<SinkNode>("B");
        net.connect(a, "eth0", b, "eth0", 1);
        for (int i = 0; i < 50; ++i) a.transmit("eth0", data_packet());
        net.loop().run_until(100);
        return net.loop().log().str();
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("dispatch times never go backwards") {
    EventLoop loop;
    SimTime last = -1;
    bool monotone = true;
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) {
        SimTime at = SimTime(rng() % 1000);
        loop.schedule(at, [&, at]() {
            if (loop.now() < last) monotone = false;
            last = loop.now();
            (void)at;
        });
    }
    loop.run_until(1000);
    CHECK(monotone);
}
