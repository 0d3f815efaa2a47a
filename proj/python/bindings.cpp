#include "mcastsim/addr.hpp"
#include "mcastsim/codecs.hpp"
#include "mcastsim/config.hpp"
#include "mcastsim/scenario.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace mcastsim;

namespace {

Addr addr_or_throw(const std::string& text) {
    auto addr = Addr::parse(text);
    if (!addr) throw py::value_error("bad address '" + text + "'");
    return *addr;
}

Prefix prefix_or_throw(const std::string& text) {
    auto prefix = Prefix::parse(text);
    if (!prefix) throw py::value_error("bad prefix '" + text + "'");
    return *prefix;
}

std::vector<uint8_t> to_bytes(const py::bytes& data) {
    std::string buffer = data;
    return std::vector<uint8_t>(buffer.begin(), buffer.end());
}

py::dict report_to_dict(const RunReport& report) {
    py::dict out;
    out["passed"] = report.passed();
    py::list assertions;
    for (const auto& a : report.assertions) {
        py::dict item;
        item["pass"] = a.pass;
        item["link"] = a.spec.from + "->" + a.spec.to;
        item["window"] = py::make_tuple(a.spec.window_start, a.spec.window_end);
        item["class"] = a.spec.control ? "control" : "data";
        item["expect"] = a.spec.expect_positive ? "positive" : "zero";
        item["measured"] = a.measured;
        item["tag"] = a.spec.tag;
        assertions.append(item);
    }
    out["assertions"] = assertions;
    out["text"] = report.render();
    return out;
}

class PySim {
public:
    static std::unique_ptr<PySim> load(const std::string& topology,
                                       const std::map<std::string, std::string>& configs,
                                       const std::string& scenario,
                                       std::optional<SimTime> until, bool text_mode) {
        auto result = text_mode ? SimInstance::load_text(topology, configs, scenario, until)
                                : SimInstance::load(topology, configs, scenario, until);
        if (std::holds_alternative<std::vector<LoadError>>(result)) {
            std::string message;
            for (const auto& e : std::get<std::vector<LoadError>>(result)) {
                if (!message.empty()) message += "\n";
                message += e.str();
            }
            throw py::value_error(message);
        }
        auto sim = std::make_unique<PySim>();
        sim->sim_ = std::move(std::get<std::unique_ptr<SimInstance>>(result));
        return sim;
    }

    py::dict run() { return report_to_dict(sim_->run()); }
    void run_until(SimTime t) { sim_->run_until(t); }
    SimTime horizon() const { return sim_->horizon(); }
    std::string show(const std::string& what, const std::string& node) {
        return sim_->show(what, node);
    }
    std::string event_log() const { return sim_->event_log_text(); }
    uint64_t delivered(const std::string& node, const std::string& group) {
        Host* host = sim_->find_host(node);
        if (!host) throw py::value_error("unknown host '" + node + "'");
        auto g = GroupAddr::parse(group);
        if (!g) throw py::value_error("bad group '" + group + "'");
        return host->delivered(*g);
    }

private:
    std::unique_ptr<SimInstance> sim_;
};

} // namespace

PYBIND11_MODULE(_mcastsim, m) {
    m.doc() = "deterministic multicast routing simulator";

    m.def("is_multicast", [](const std::string& addr) { return is_multicast(addr_or_throw(addr)); },
          py::arg("addr"), "True iff the address lies in 224.0.0.0/4.");

    m.def("broadcast_of",
          [](const std::string& prefix) { return prefix_or_throw(prefix).broadcast().str(); },
          py::arg("prefix"), "Broadcast address of a CIDR prefix.");

    m.def("prefix_contains",
          [](const std::string& prefix, const std::string& addr) {
              return prefix_or_throw(prefix).contains(addr_or_throw(addr));
          },
          py::arg("prefix"), py::arg("addr"));

    m.def("internet_checksum",
          [](const py::bytes& data) { return internet_checksum(to_bytes(data)); },
          py::arg("data"), "16-bit ones-complement checksum.");

    m.def("decode_message",
          [](const py::bytes& data) -> py::dict {
              auto result = decode(to_bytes(data));
              py::dict out;
              if (std::holds_alternative<DecodeError>(result)) {
                  out["error"] = decode_error_name(std::get<DecodeError>(result));
                  return out;
              }
              const Message& msg = std::get<Message>(result);
              if (std::holds_alternative<IgmpMessage>(msg)) {
                  const auto& igmp = std::get<IgmpMessage>(msg);
                  out["protocol"] = "igmp";
                  switch (igmp.kind) {
                      case IgmpKind::MembershipQuery:
                          out["kind"] = "membership-query";
                          out["group"] = igmp.group.str();
                          out["max_resp_time_ms"] = igmp.max_resp_time;
                          break;
                      case IgmpKind::V3MembershipReport: {
                          out["kind"] = "v3-membership-report";
                          py::list records;
                          for (const auto& rec : igmp.records) {
                              py::dict r;
                              r["type"] = record_type_name(rec.type);
                              r["group"] = rec.group.str();
                              py::list sources;
                              for (Addr src : rec.sources) sources.append(src.str());
                              r["sources"] = sources;
                              records.append(r);
                          }
                          out["records"] = records;
                          break;
                      }
                      case IgmpKind::LeaveGroup:
                          out["kind"] = "leave-group";
                          out["group"] = igmp.group.str();
                          break;
                  }
                  return out;
              }
              const auto& pim = std::get<PimMessage>(msg);
              out["protocol"] = "pim";
              switch (pim.kind) {
                  case PimKind::Hello:
                      out["kind"] = "hello";
                      out["holdtime_ms"] = pim.holdtime;
                      break;
                  case PimKind::JoinPrune: {
                      out["kind"] = "join-prune";
                      out["upstream_neighbor"] = pim.upstream_neighbor.str();
                      out["holdtime_ms"] = pim.holdtime;
                      auto entry_list = [](const std::vector<JoinPruneEntry>& entries) {
                          py::list out_list;
                          for (const auto& e : entries) {
                              py::dict item;
                              item["group"] = e.group.str();
                              item["source"] = e.source ? e.source->str() : "*";
                              item["rp"] = e.rp.str();
                              out_list.append(item);
                          }
                          return out_list;
                      };
                      out["joins"] = entry_list(pim.joins);
                      out["prunes"] = entry_list(pim.prunes);
                      break;
                  }
                  case PimKind::Register:
                      out["kind"] = "register";
                      out["inner_bytes"] = py::int_(pim.inner_packet.size());
                      break;
                  case PimKind::RegisterStop:
                      out["kind"] = "register-stop";
                      out["group"] = pim.stop_group ? pim.stop_group->str() : "";
                      out["source"] = pim.stop_source.str();
                      break;
              }
              return out;
          },
          py::arg("data"), "Decode a control message into a dict; checksum verified first.");

    m.def("check_config",
          [](const std::string& text) {
              std::vector<std::string> errors;
              auto result = load_config(text);
              if (std::holds_alternative<std::vector<ConfigError>>(result)) {
                  for (const auto& e : std::get<std::vector<ConfigError>>(result)) {
                      errors.push_back(e.str());
                  }
              }
              return errors;
          },
          py::arg("text"), "Validate configuration text; returns error strings, empty when ok.");

    py::class_<PySim>(m, "Sim")
        .def_static("load",
                    [](const std::string& topology,
                       const std::map<std::string, std::string>& configs,
                       const std::string& scenario, std::optional<SimTime> until) {
                        return PySim::load(topology, configs, scenario, until, false);
                    },
                    py::arg("topology"), py::arg("configs"), py::arg("scenario"),
                    py::arg("until") = std::nullopt,
                    "Load a bundle from file paths; raises ValueError with load errors.")
        .def_static("load_text",
                    [](const std::string& topology,
                       const std::map<std::string, std::string>& configs,
                       const std::string& scenario, std::optional<SimTime> until) {
                        return PySim::load(topology, configs, scenario, until, true);
                    },
                    py::arg("topology"), py::arg("configs"), py::arg("scenario"),
                    py::arg("until") = std::nullopt,
                    "Load a bundle from in-memory text.")
        .def("run", &PySim::run, "Run to the horizon; returns the report as a dict.")
        .def("run_until", &PySim::run_until, py::arg("time_ms"))
        .def("horizon", &PySim::horizon)
        .def("show", &PySim::show, py::arg("what"), py::arg("node") = std::string(),
             "Show-command output (route, mfib, 'pim join', 'pim neighbors', 'igmp groups').")
        .def("event_log", &PySim::event_log)
        .def("delivered", &PySim::delivered, py::arg("node"), py::arg("group"),
             "Packets delivered to a host for a group.");
}
