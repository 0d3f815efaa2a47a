#include "mcastsim/scenario.hpp"

#include "mcastsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace mcastsim {

std::string LoadError::str() const {
    std::string out;
    if (!file.empty()) out += file + ":";
    out += std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + message;
    return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') break;
        tokens.push_back(tok);
    }
    return tokens;
}

std::optional<int64_t> parse_i64(const std::string& text) {
    int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<Prefix> parse_host_prefix(const std::string& cidr) {
    auto slash = cidr.find('/');
    if (slash == std::string::npos) return std::nullopt;
    auto addr = Addr::parse(cidr.substr(0, slash));
    auto len = parse_i64(cidr.substr(slash + 1));
    if (!addr || !len || *len < 0 || *len > 32) return std::nullopt;
    uint32_t mask = *len == 0 ? 0 : ~uint32_t(0) << (32 - *len);
    return Prefix::make(Addr(addr->value() & mask), int(*len));
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace

std::variant<Topology, std::vector<LoadError>> Topology::parse(const std::string& text,
                                                               const std::string& file) {
    Topology topo;
    std::vector<LoadError> errors;
    auto fail = [&](int line, const std::string& message) {
        errors.push_back(LoadError{file, Position{line, 1}, message});
    };

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto tokens = tokenize(raw);
        if (tokens.empty()) continue;
        const std::string& verb = tokens[0];
        if (verb == "node") {
            if (tokens.size() != 3) {
                fail(line_no, "expected: node <name> <router|host|source>");
                continue;
            }
            NodeKind kind;
            if (tokens[2] == "router") {
                kind = NodeKind::Router;
            } else if (tokens[2] == "host") {
                kind = NodeKind::Host;
            } else if (tokens[2] == "source") {
                kind = NodeKind::Source;
            } else {
                fail(line_no, "unknown node kind '" + tokens[2] + "'");
                continue;
            }
            topo.nodes.push_back(TopologyNode{tokens[1], kind, line_no});
        } else if (verb == "link") {
            if (tokens.size() != 5 && !(tokens.size() == 7 && tokens[5] == "delay")) {
                fail(line_no, "expected: link <a> <ifa> <b> <ifb> [delay <ms>]");
                continue;
            }
            TopologyLink link{tokens[1], tokens[2], tokens[3], tokens[4], 1, line_no};
            if (tokens.size() == 7) {
                auto delay = parse_i64(tokens[6]);
                if (!delay || *delay < 0) {
                    fail(line_no, "bad link delay '" + tokens[6] + "'");
                    continue;
                }
                link.delay = *delay;
            }
            topo.links.push_back(link);
        } else if (verb == "host") {
            // host <name> <iface> <addr>/<len> [gateway <gw>]
            // host <name> <iface> <addr> <mask> [gateway <gw>]
            if (tokens.size() < 4) {
                fail(line_no, "expected: host <name> <iface> <addr>/<len>|<addr> <mask> "
                              "[gateway <gw>]");
                continue;
            }
            TopologyHostAddr ha;
            ha.node = tokens[1];
            ha.iface = tokens[2];
            ha.line = line_no;
            size_t next = 0;
            if (tokens[3].find('/') != std::string::npos) {
                auto addr = Addr::parse(tokens[3].substr(0, tokens[3].find('/')));
                auto prefix = parse_host_prefix(tokens[3]);
                if (!addr || !prefix) {
                    fail(line_no, "bad address '" + tokens[3] + "'");
                    continue;
                }
                ha.addr = *addr;
                ha.prefix = *prefix;
                next = 4;
            } else {
                if (tokens.size() < 5) {
                    fail(line_no, "expected mask after address");
                    continue;
                }
                auto addr = Addr::parse(tokens[3]);
                auto mask = Addr::parse(tokens[4]);
                if (!addr || !mask) {
                    fail(line_no, "bad address/mask");
                    continue;
                }
                auto masked = Prefix::from_mask(Addr(addr->value() & mask->value()), *mask);
                if (!masked) {
                    fail(line_no, "mask " + tokens[4] + " is not contiguous");
                    continue;
                }
                ha.addr = *addr;
                ha.prefix = *masked;
                next = 5;
            }
            if (next < tokens.size()) {
                if (tokens[next] != "gateway" || next + 1 >= tokens.size()) {
                    fail(line_no, "expected: gateway <addr>");
                    continue;
                }
                auto gw = Addr::parse(tokens[next + 1]);
                if (!gw) {
                    fail(line_no, "bad gateway '" + tokens[next + 1] + "'");
                    continue;
                }
                ha.gateway = *gw;
                next += 2;
            }
            if (next != tokens.size()) {
                fail(line_no, "trailing tokens on host line");
                continue;
            }
            topo.host_addrs.push_back(ha);
        } else {
            fail(line_no, "unknown directive '" + verb + "'");
        }
    }
    if (!errors.empty()) return errors;
    return topo;
}

SimTime Scenario::last_event_time() const {
    SimTime last = 0;
    for (const auto& event : events) last = std::max(last, event.at);
    return last;
}

std::variant<Scenario, std::vector<LoadError>> Scenario::parse(const std::string& text,
                                                               const std::string& file) {
    Scenario scenario;
    std::vector<LoadError> errors;
    auto fail = [&](int line, const std::string& message) {
        errors.push_back(LoadError{file, Position{line, 1}, message});
    };

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    SimTime prev_at = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto tokens = tokenize(raw);
        if (tokens.empty()) continue;
        auto at = parse_i64(tokens[0]);
        if (!at || *at < 0) {
            fail(line_no, "expected event time in ms, got '" + tokens[0] + "'");
            continue;
        }
        if (*at < prev_at) {
            fail(line_no, "events must be sorted by time");
            continue;
        }
        prev_at = *at;
        if (tokens.size() < 2) {
            fail(line_no, "missing action");
            continue;
        }
        const std::string& action = tokens[1];
        ScenarioEvent event;
        event.at = *at;
        event.line = line_no;
        if (action == "source_start") {
            if (tokens.size() != 7) {
                fail(line_no,
                     "expected: source_start <src> <group> <port> <rate_pps> <bytes>");
                continue;
            }
            auto src = Addr::parse(tokens[2]);
            auto group = Addr::parse(tokens[3]);
            auto port = parse_i64(tokens[4]);
            auto rate = parse_i64(tokens[5]);
            auto bytes = parse_i64(tokens[6]);
            if (!src || !group || !port || !rate || !bytes || *port < 0 || *port > 65535 ||
                *rate <= 0 || *bytes <= 0) {
                fail(line_no, "bad source_start arguments");
                continue;
            }
            if (!is_multicast(*group)) {
                fail(line_no, tokens[3] + " is not a multicast group");
                continue;
            }
            if (1000 % *rate != 0) {
                fail(line_no, "rate_pps must divide 1000");
                continue;
            }
            event.action = SourceStartAction{*src, *group, uint16_t(*port), int(*rate),
                                             uint32_t(*bytes)};
        } else if (action == "host_join") {
            if (tokens.size() != 4 && tokens.size() != 5) {
                fail(line_no, "expected: host_join <node> <group> [source]");
                continue;
            }
            auto group = Addr::parse(tokens[3]);
            if (!group || !is_multicast(*group)) {
                fail(line_no, "bad group '" + tokens[3] + "'");
                continue;
            }
            HostJoinAction join{tokens[2], *group, std::nullopt};
            if (tokens.size() == 5) {
                auto source = Addr::parse(tokens[4]);
                if (!source) {
                    fail(line_no, "bad source '" + tokens[4] + "'");
                    continue;
                }
                join.source = *source;
            }
            event.action = join;
        } else if (action == "host_leave") {
            if (tokens.size() != 4) {
                fail(line_no, "expected: host_leave <node> <group>");
                continue;
            }
            auto group = Addr::parse(tokens[3]);
            if (!group || !is_multicast(*group)) {
                fail(line_no, "bad group '" + tokens[3] + "'");
                continue;
            }
            event.action = HostLeaveAction{tokens[2], *group};
        } else if (action == "assert_flow") {
            if (tokens.size() != 6 && tokens.size() != 7) {
                fail(line_no, "expected: assert_flow <start>..<end> <A>-><B> <data|control> "
                              "<zero|positive> [tag=<word>]");
                continue;
            }
            AssertFlowAction assert_flow;
            auto dots = tokens[2].find("..");
            if (dots == std::string::npos) {
                fail(line_no, "bad window '" + tokens[2] + "'");
                continue;
            }
            auto wstart = parse_i64(tokens[2].substr(0, dots));
            auto wend = parse_i64(tokens[2].substr(dots + 2));
            if (!wstart || !wend || *wstart < 0 || *wend <= *wstart) {
                fail(line_no, "bad window '" + tokens[2] + "'");
                continue;
            }
            if (*wend > *at) {
                fail(line_no, "window must end at or before the event time");
                continue;
            }
            assert_flow.window_start = *wstart;
            assert_flow.window_end = *wend;
            auto arrow = tokens[3].find("->");
            if (arrow == std::string::npos) {
                fail(line_no, "bad link '" + tokens[3] + "' (expected A->B)");
                continue;
            }
            assert_flow.from = tokens[3].substr(0, arrow);
            assert_flow.to = tokens[3].substr(arrow + 2);
            if (tokens[4] == "data") {
                assert_flow.control = false;
            } else if (tokens[4] == "control") {
                assert_flow.control = true;
            } else {
                fail(line_no, "expected data or control, got '" + tokens[4] + "'");
                continue;
            }
            if (tokens[5] == "zero") {
                assert_flow.expect_positive = false;
            } else if (tokens[5] == "positive") {
                assert_flow.expect_positive = true;
            } else {
                fail(line_no, "expected zero or positive, got '" + tokens[5] + "'");
                continue;
            }
            if (tokens.size() == 7) {
                if (tokens[6].rfind("tag=", 0) != 0) {
                    fail(line_no, "expected tag=<word>");
                    continue;
                }
                assert_flow.tag = tokens[6].substr(4);
            }
            event.action = assert_flow;
        } else if (action == "snapshot") {
            if (tokens.size() != 3) {
                fail(line_no, "expected: snapshot <name>");
                continue;
            }
            event.action = SnapshotAction{tokens[2]};
        } else {
            fail(line_no, "unknown action '" + action + "'");
            continue;
        }
        scenario.events.push_back(std::move(event));
    }
    if (!errors.empty()) return errors;
    return scenario;
}

std::string AssertionResult::str() const {
    std::string out = pass ? "PASS" : "FAIL";
    out += " assert_flow window=" + std::to_string(spec.window_start) + ".." +
           std::to_string(spec.window_end);
    out += " link=" + spec.from + "->" + spec.to;
    out += std::string(" class=") + (spec.control ? "control" : "data");
    out += std::string(" expect=") + (spec.expect_positive ? "positive" : "zero");
    out += " measured=" + std::to_string(measured);
    if (!spec.tag.empty()) out += " tag=" + spec.tag;
    return out;
}

bool RunReport::passed() const {
    return std::all_of(assertions.begin(), assertions.end(),
                       [](const AssertionResult& a) { return a.pass; });
}

std::string RunReport::render() const {
    std::string out = "mcastsim run report\n";
    out += "assertions:\n";
    for (const auto& a : assertions) {
        out += "  " + a.str() + "\n";
    }
    size_t ok = size_t(std::count_if(assertions.begin(), assertions.end(),
                                     [](const AssertionResult& a) { return a.pass; }));
    out += "result: " + std::string(passed() ? "PASS" : "FAIL") + " (" + std::to_string(ok) +
           "/" + std::to_string(assertions.size()) + " assertions)\n";
    if (!log_path.empty()) out += "log: " + log_path + "\n";
    for (const auto& [name, dump] : snapshots) {
        out += "snapshot " + name + ":\n" + dump;
    }
    out += "final state:\n" + final_dump;
    return out;
}

SimInstance::LoadResult SimInstance::load(const std::string& topology_path,
                                          const std::map<NodeId, std::string>& config_paths,
                                          const std::string& scenario_path,
                                          std::optional<SimTime> until) {
    std::vector<LoadError> errors;
    auto topo_text = read_file(topology_path);
    if (!topo_text) errors.push_back(LoadError{topology_path, {}, "cannot read file"});
    std::map<NodeId, std::string> config_texts;
    std::map<NodeId, std::string> config_files;
    for (const auto& [node, path] : config_paths) {
        auto text = read_file(path);
        if (!text) {
            errors.push_back(LoadError{path, {}, "cannot read file"});
            continue;
        }
        config_texts[node] = *text;
        config_files[node] = path;
    }
    auto scenario_text = read_file(scenario_path);
    if (!scenario_text) errors.push_back(LoadError{scenario_path, {}, "cannot read file"});
    if (!errors.empty()) return errors;
    return load_impl(topology_path, *topo_text, config_files, config_texts, scenario_path,
                     *scenario_text, until);
}

SimInstance::LoadResult SimInstance::load_text(const std::string& topology_text,
                                               const std::map<NodeId, std::string>& config_texts,
                                               const std::string& scenario_text,
                                               std::optional<SimTime> until) {
    std::map<NodeId, std::string> files;
    for (const auto& [node, text] : config_texts) files[node] = node + ".boot";
    return load_impl("topology", topology_text, files, config_texts, "scenario", scenario_text,
                     until);
}

SimInstance::LoadResult SimInstance::load_impl(
    const std::string& topology_file, const std::string& topology_text,
    const std::map<NodeId, std::string>& config_files,
    const std::map<NodeId, std::string>& config_texts, const std::string& scenario_file,
    const std::string& scenario_text, std::optional<SimTime> until) {
    std::vector<LoadError> errors;

    auto topo_result = Topology::parse(topology_text, topology_file);
    if (std::holds_alternative<std::vector<LoadError>>(topo_result)) {
        return std::get<std::vector<LoadError>>(topo_result);
    }
    const Topology& topo = std::get<Topology>(topo_result);

    auto sim = std::unique_ptr<SimInstance>(new SimInstance());
    Network& net = sim->network_;

    std::map<NodeId, NodeKind> kinds;
    for (const auto& node : topo.nodes) {
        if (kinds.count(node.name)) {
            errors.push_back(LoadError{topology_file, Position{node.line, 1},
                                       "duplicate node '" + node.name + "'"});
            continue;
        }
        kinds[node.name] = node.kind;
        if (node.kind == NodeKind::Router) {
            net.add_node<Router>(node.name);
        } else {
            net.add_node<Host>(node.name);
        }
    }

    for (const auto& link : topo.links) {
        Node* a = net.find_node(link.node_a);
        Node* b = net.find_node(link.node_b);
        if (!a || !b) {
            errors.push_back(LoadError{topology_file, Position{link.line, 1},
                                       "link references unknown node"});
            continue;
        }
        Interface* existing_a = a->find_interface(link.iface_a);
        Interface* existing_b = b->find_interface(link.iface_b);
        if ((existing_a && existing_a->link) || (existing_b && existing_b->link)) {
            errors.push_back(LoadError{topology_file, Position{link.line, 1},
                                       "interface already linked"});
            continue;
        }
        net.connect(*a, link.iface_a, *b, link.iface_b, link.delay);
    }

    std::set<NodeId> hosts_with_addr;
    for (const auto& ha : topo.host_addrs) {
        auto kind = kinds.find(ha.node);
        if (kind == kinds.end() || kind->second == NodeKind::Router) {
            errors.push_back(LoadError{topology_file, Position{ha.line, 1},
                                       "host line for unknown or router node '" + ha.node + "'"});
            continue;
        }
        Host* host = dynamic_cast<Host*>(net.find_node(ha.node));
        if (!host->find_interface(ha.iface)) {
            errors.push_back(LoadError{topology_file, Position{ha.line, 1},
                                       "interface '" + ha.iface + "' of '" + ha.node +
                                           "' is not attached to any link"});
            continue;
        }
        if (!hosts_with_addr.insert(ha.node).second) {
            errors.push_back(LoadError{topology_file, Position{ha.line, 1},
                                       "duplicate host line for '" + ha.node + "'"});
            continue;
        }
        host->configure(ha.iface, ha.addr, ha.prefix, ha.gateway);
    }
    for (const auto& [name, kind] : kinds) {
        if (kind != NodeKind::Router && !hosts_with_addr.count(name)) {
            errors.push_back(
                LoadError{topology_file, {}, "host '" + name + "' has no host address line"});
        }
    }

    // Router configurations.
    for (const auto& [node, text] : config_texts) {
        const std::string& file = config_files.at(node);
        auto kind = kinds.find(node);
        if (kind == kinds.end() || kind->second != NodeKind::Router) {
            errors.push_back(LoadError{file, {}, "config for non-router node '" + node + "'"});
            continue;
        }
        auto result = load_config(text);
        if (std::holds_alternative<std::vector<ConfigError>>(result)) {
            for (const auto& e : std::get<std::vector<ConfigError>>(result)) {
                errors.push_back(LoadError{file, e.pos, e.message});
            }
            continue;
        }
        Router* router = dynamic_cast<Router*>(net.find_node(node));
        for (const auto& e : apply_config(*router, std::get<NodeConfig>(result))) {
            errors.push_back(LoadError{file, e.pos, e.message});
        }
    }

    auto scenario_result = Scenario::parse(scenario_text, scenario_file);
    if (std::holds_alternative<std::vector<LoadError>>(scenario_result)) {
        auto scenario_errors = std::get<std::vector<LoadError>>(scenario_result);
        errors.insert(errors.end(), scenario_errors.begin(), scenario_errors.end());
        return errors;
    }
    const Scenario& scenario = std::get<Scenario>(scenario_result);

    // Semantic validation of scenario references.
    for (const auto& event : scenario.events) {
        auto fail = [&](const std::string& message) {
            errors.push_back(LoadError{scenario_file, Position{event.line, 1}, message});
        };
        if (const auto* join = std::get_if<HostJoinAction>(&event.action)) {
            auto kind = kinds.find(join->node);
            if (kind == kinds.end()) {
                fail("unknown node '" + join->node + "'");
            } else if (kind->second == NodeKind::Router) {
                fail("'" + join->node + "' is a router, not a host");
            }
        } else if (const auto* leave = std::get_if<HostLeaveAction>(&event.action)) {
            auto kind = kinds.find(leave->node);
            if (kind == kinds.end()) {
                fail("unknown node '" + leave->node + "'");
            } else if (kind->second == NodeKind::Router) {
                fail("'" + leave->node + "' is a router, not a host");
            }
        } else if (const auto* start = std::get_if<SourceStartAction>(&event.action)) {
            bool found = false;
            for (const auto& [name, node] : net.nodes()) {
                auto* host = dynamic_cast<Host*>(node.get());
                if (host && host->addr() == start->src) found = true;
            }
            if (!found) fail("no host or source owns address " + start->src.str());
        } else if (const auto* assert_flow = std::get_if<AssertFlowAction>(&event.action)) {
            if (!net.find_node(assert_flow->from) || !net.find_node(assert_flow->to)) {
                fail("assert references unknown node");
            } else if (!net.find_link(assert_flow->from, assert_flow->to)) {
                fail("no unique link between '" + assert_flow->from + "' and '" +
                     assert_flow->to + "'");
            }
        }
    }

    SimTime last = scenario.last_event_time();
    if (until && *until < last) {
        errors.push_back(LoadError{scenario_file, {},
                                   "scenario runs to " + std::to_string(last) +
                                       " ms, beyond --until " + std::to_string(*until)});
    }
    if (!errors.empty()) return errors;

    sim->horizon_ = until ? *until : last + 500;

    // Control planes come up at t=0, before any scenario event fires.
    for (const auto& [name, node] : net.nodes()) {
        if (auto* router = dynamic_cast<Router*>(node.get())) router->start();
    }

    sim->schedule_scenario(scenario);
    return sim;
}

void SimInstance::schedule_scenario(const Scenario& scenario) {
    for (const auto& event : scenario.events) {
        if (const auto* assert_flow = std::get_if<AssertFlowAction>(&event.action)) {
            schedule_assert(event, *assert_flow);
            continue;
        }
        ScenarioEvent copy = event;
        network_.loop().schedule(event.at, [this, copy]() {
            if (const auto* start = std::get_if<SourceStartAction>(&copy.action)) {
                for (const auto& [name, node] : network_.nodes()) {
                    auto* host = dynamic_cast<Host*>(node.get());
                    if (host && host->addr() == start->src) {
                        host->start_stream(start->group, start->port, start->rate_pps,
                                           start->payload_bytes);
                        return;
                    }
                }
            } else if (const auto* join = std::get_if<HostJoinAction>(&copy.action)) {
                auto* host = dynamic_cast<Host*>(network_.find_node(join->node));
                if (!host) return;
                std::set<Addr> sources;
                if (join->source) sources.insert(*join->source);
                host->join(join->group, sources);
            } else if (const auto* leave = std::get_if<HostLeaveAction>(&copy.action)) {
                auto* host = dynamic_cast<Host*>(network_.find_node(leave->node));
                if (!host) return;
                try {
                    host->leave(leave->group);
                } catch (const NotMember&) {
                    host->log("scenario", "leave-ignored group=" + leave->group.str() +
                                              " reason=not-member");
                }
            } else if (const auto* snap = std::get_if<SnapshotAction>(&copy.action)) {
                network_.loop().log().append(network_.loop().now(), "-", "snapshot", snap->name);
                report_.snapshots.emplace_back(snap->name, state_dump());
            }
        });
    }
}

void SimInstance::schedule_assert(const ScenarioEvent& event, const AssertFlowAction& action) {
    Link* link = network_.find_link(action.from, action.to);
    if (!link) return; // validated at load
    Node* from_node = network_.find_node(action.from);
    int dir = link->end(0).node == from_node ? 0 : 1;

    auto window = std::make_shared<std::pair<CounterSnapshot, CounterSnapshot>>();
    network_.loop().schedule(action.window_start,
                             [link, window]() { window->first = link->counters(); });
    network_.loop().schedule(action.window_end,
                             [link, window]() { window->second = link->counters(); });
    AssertFlowAction spec = action;
    int line = event.line;
    network_.loop().schedule(event.at, [this, link, window, dir, spec, line]() {
        const DirectionCounters& before = window->first.dir[dir];
        const DirectionCounters& after = window->second.dir[dir];
        uint64_t measured = spec.control ? after.control_packets - before.control_packets
                                         : after.data_packets - before.data_packets;
        AssertionResult result;
        result.at = network_.loop().now();
        result.spec = spec;
        result.measured = measured;
        result.pass = spec.expect_positive ? measured > 0 : measured == 0;
        result.line = line;
        network_.loop().log().append(network_.loop().now(), "-",
                                     result.pass ? "assert-pass" : "assert-fail", result.str());
        report_.assertions.push_back(std::move(result));
    });
}

const RunReport& SimInstance::run() {
    run_until(horizon_);
    if (!finalized_) {
        report_.final_dump = state_dump();
        finalized_ = true;
    }
    return report_;
}

void SimInstance::run_until(SimTime t) {
    network_.loop().run_until(t);
}

Router* SimInstance::find_router(const NodeId& name) {
    return dynamic_cast<Router*>(network_.find_node(name));
}

Host* SimInstance::find_host(const NodeId& name) {
    return dynamic_cast<Host*>(network_.find_node(name));
}

std::vector<std::string> SimInstance::show_lines(Router& router, const std::string& what) {
    if (what == "route") return router.show_route();
    if (what == "mfib") return router.show_mfib();
    if (what == "pim join") return router.show_pim_join();
    if (what == "pim neighbors") return router.show_pim_neighbors();
    if (what == "igmp groups") return router.show_igmp_groups();
    return {"unknown show command '" + what + "'"};
}

std::string SimInstance::show(const std::string& what, const NodeId& node) {
    std::string out;
    if (!node.empty()) {
        Router* router = find_router(node);
        if (!router) return "unknown node '" + node + "'\n";
        for (const auto& line : show_lines(*router, what)) out += line + "\n";
        return out;
    }
    for (const auto& [name, n] : network_.nodes()) {
        auto* router = dynamic_cast<Router*>(n.get());
        if (!router) continue;
        out += name + ":\n";
        for (const auto& line : show_lines(*router, what)) out += "  " + line + "\n";
    }
    return out;
}

std::string SimInstance::state_dump() {
    std::string out;
    for (const auto& [name, node] : network_.nodes()) {
        if (auto* router = dynamic_cast<Router*>(node.get())) {
            out += name + " routes:\n";
            for (const auto& line : router->show_route()) out += "  " + line + "\n";
            out += name + " mfib:\n";
            for (const auto& line : router->show_mfib()) out += "  " + line + "\n";
            out += name + " pim join:\n";
            for (const auto& line : router->show_pim_join()) out += "  " + line + "\n";
            out += name + " pim neighbors:\n";
            for (const auto& line : router->show_pim_neighbors()) out += "  " + line + "\n";
            out += name + " igmp groups:\n";
            for (const auto& line : router->show_igmp_groups()) out += "  " + line + "\n";
        } else if (auto* host = dynamic_cast<Host*>(node.get())) {
            out += name + " delivered=" + std::to_string(host->delivered_total()) + "\n";
        }
    }
    for (const auto& link : network_.links()) {
        CounterSnapshot snap = link->counters();
        for (int dir = 0; dir < 2; ++dir) {
            out += "link " + link->end(dir).node->name() + "->" +
                   link->end(1 - dir).node->name() + " data=" +
                   std::to_string(snap.dir[dir].data_packets) + " control=" +
                   std::to_string(snap.dir[dir].control_packets) + " bytes=" +
                   std::to_string(snap.dir[dir].bytes) + "\n";
        }
    }
    return out;
}

namespace {

const char* kShellHelp =
    "commands:\n"
    "  show route [node]\n"
    "  show mfib [node]\n"
    "  show pim join [node]\n"
    "  show pim neighbors [node]\n"
    "  show igmp groups [node]\n"
    "  ?     list commands\n"
    "  quit  leave the shell\n";

} // namespace

void run_shell(SimInstance& sim, std::istream& in, std::ostream& out) {
    std::string line;
    out << "mcastsim shell; ? lists commands\n";
    while (true) {
        out << "mcastsim> " << std::flush;
        if (!std::getline(in, line)) break;
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens[0] == "quit" || tokens[0] == "exit") break;
        if (tokens[0] == "?") {
            out << kShellHelp;
            continue;
        }
        if (tokens[0] == "show" && tokens.size() >= 2) {
            std::string what = tokens[1];
            size_t consumed = 2;
            if ((what == "pim" || what == "igmp") && tokens.size() >= 3) {
                what += " " + tokens[2];
                consumed = 3;
            }
            static const std::set<std::string> known = {"route", "mfib", "pim join",
                                                        "pim neighbors", "igmp groups"};
            if (!known.count(what)) {
                out << kShellHelp;
                continue;
            }
            std::string node;
            if (consumed < tokens.size()) node = tokens[consumed];
            out << sim.show(what, node);
            continue;
        }
        out << kShellHelp;
    }
}

} // namespace mcastsim
