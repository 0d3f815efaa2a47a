#pragma once

#include "mcastsim/config.hpp"
#include "mcastsim/net.hpp"
#include "mcastsim/router.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mcastsim {

struct LoadError {
    std::string file;
    Position pos;
    std::string message;

    std::string str() const;
};

enum class NodeKind { Router, Host, Source };

struct TopologyNode {
    NodeId name;
    NodeKind kind = NodeKind::Host;
    int line = 0;
};

struct TopologyLink {
    NodeId node_a;
    IfId iface_a;
    NodeId node_b;
    IfId iface_b;
    SimTime delay = 1;
    int line = 0;
};

struct TopologyHostAddr {
    NodeId node;
    IfId iface;
    Addr addr;
    Prefix prefix;
    std::optional<Addr> gateway;
    int line = 0;
};

/// Parsed topology file: `node`, `link` and `host` lines.
struct Topology {
    std::vector<TopologyNode> nodes;
    std::vector<TopologyLink> links;
    std::vector<TopologyHostAddr> host_addrs;

    static std::variant<Topology, std::vector<LoadError>> parse(const std::string& text,
                                                                const std::string& file);
};

struct SourceStartAction {
    Addr src;
    Addr group;
    uint16_t port = 0;
    int rate_pps = 0;
    uint32_t payload_bytes = 0;
};

struct HostJoinAction {
    NodeId node;
    Addr group;
    std::optional<Addr> source;
};

struct HostLeaveAction {
    NodeId node;
    Addr group;
};

struct AssertFlowAction {
    SimTime window_start = 0;
    SimTime window_end = 0;
    NodeId from;
    NodeId to;
    bool control = false;        // data counters unless set
    bool expect_positive = false;
    std::string tag;
};

struct SnapshotAction {
    std::string name;
};

using ScenarioAction = std::variant<SourceStartAction, HostJoinAction, HostLeaveAction,
                                    AssertFlowAction, SnapshotAction>;

struct ScenarioEvent {
    SimTime at = 0;
    ScenarioAction action;
    int line = 0;
};

/// Parsed scenario file: `<time-ms> <action> <args…>` lines, sorted by time.
struct Scenario {
    std::vector<ScenarioEvent> events;

    SimTime last_event_time() const;

    static std::variant<Scenario, std::vector<LoadError>> parse(const std::string& text,
                                                                const std::string& file);
};

struct AssertionResult {
    SimTime at = 0;
    AssertFlowAction spec;
    uint64_t measured = 0;
    bool pass = false;
    int line = 0;

    std::string str() const;
};

struct RunReport {
    std::vector<AssertionResult> assertions;
    std::vector<std::pair<std::string, std::string>> snapshots;
    std::string final_dump;
    std::string log_path;

    bool passed() const;
    std::string render() const;
};

/// A loaded simulation: topology instantiated, configs applied, scenario
/// scheduled. run() drives it to the horizon and reports.
class SimInstance {
public:
    using LoadResult = std::variant<std::unique_ptr<SimInstance>, std::vector<LoadError>>;

    static LoadResult load(const std::string& topology_path,
                           const std::map<NodeId, std::string>& config_paths,
                           const std::string& scenario_path,
                           std::optional<SimTime> until = std::nullopt);

    /// In-memory variant used by tests and bindings.
    static LoadResult load_text(const std::string& topology_text,
                                const std::map<NodeId, std::string>& config_texts,
                                const std::string& scenario_text,
                                std::optional<SimTime> until = std::nullopt);

    /// Runs to the horizon and finalizes the report (idempotent).
    const RunReport& run();

    /// Partial execution; show commands then reflect mid-run state.
    void run_until(SimTime t);

    SimTime horizon() const { return horizon_; }
    Network& network() { return network_; }
    const RunReport& report() const { return report_; }

    Router* find_router(const NodeId& name);
    Host* find_host(const NodeId& name);

    /// Show-command output; `what` is one of route, mfib, "pim join",
    /// "pim neighbors", "igmp groups". Empty node = all nodes.
    std::string show(const std::string& what, const NodeId& node) ;

    std::string state_dump();

    std::string event_log_text() const { return network_.loop().log().str(); }

private:
    SimInstance() = default;

    static LoadResult load_impl(const std::string& topology_file,
                                const std::string& topology_text,
                                const std::map<NodeId, std::string>& config_files,
                                const std::map<NodeId, std::string>& config_texts,
                                const std::string& scenario_file,
                                const std::string& scenario_text,
                                std::optional<SimTime> until);

    void schedule_scenario(const Scenario& scenario);
    void schedule_assert(const ScenarioEvent& event, const AssertFlowAction& action);
    std::vector<std::string> show_lines(Router& router, const std::string& what);

    Network network_;
    SimTime horizon_ = 0;
    bool finalized_ = false;
    RunReport report_;
};

/// Read-only interactive console over a loaded instance; `?` lists
/// commands, `quit` leaves.
void run_shell(SimInstance& sim, std::istream& in, std::ostream& out);

} // namespace mcastsim
