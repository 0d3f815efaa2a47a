#pragma once

#include "mcastsim/addr.hpp"
#include "mcastsim/router.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mcastsim {

struct Position {
    int line = 1;
    int col = 1;

    bool operator==(const Position&) const = default;
};

struct ConfigError {
    Position pos;
    std::string message;

    std::string str(const std::string& file = "") const;
};

/// One node of the parsed configuration tree. Statements are leaves
/// (`key: value`, or a bare keyword); blocks carry children and an
/// optional argument (`interface dc0 { … }`).
struct AstNode {
    enum class Kind { Block, Statement };

    Kind kind = Kind::Statement;
    std::string keyword;
    std::optional<std::string> arg; // blocks only
    std::string value;              // statements only; empty for bare keywords
    bool has_value = false;
    bool quoted = false;
    Position pos;
    std::vector<AstNode> children; // blocks only

    bool same_shape(const AstNode& other) const;
};

struct ConfigAst {
    std::vector<AstNode> items;

    bool same_shape(const ConfigAst& other) const;
};

using ParseResult = std::variant<ConfigAst, ConfigError>;

/// Parses the curly-brace configuration language: `key: value` statements,
/// `keyword [arg] { … }` blocks, and `/* … */` comments (discarded).
ParseResult parse_config(const std::string& text);

/// Regenerates source text; parse(render(ast)) has the same shape.
std::string render_config(const ConfigAst& ast);

struct AddressConfig {
    Addr addr;
    int prefix_length = 0;
    std::optional<Addr> broadcast;
    bool enabled = true;
    Position pos;
};

struct VifConfig {
    std::string name;
    bool enabled = true;
    std::vector<AddressConfig> addresses;
    Position pos;
};

struct InterfaceConfig {
    std::string name;
    std::string description;
    bool enabled = true;
    bool default_system_config = false;
    std::vector<VifConfig> vifs;
    Position pos;
};

struct StaticRouteConfig {
    Prefix prefix;
    Addr next_hop;
    Position pos;
};

struct ProtoIfaceConfig {
    std::string iface;
    std::string vif;
    bool enabled = true;
    Position pos;
};

struct StaticRpConfig {
    Addr rp;
    Prefix group_prefix;
    Position pos;
};

struct NodeConfig {
    std::vector<InterfaceConfig> interfaces;
    std::vector<StaticRouteConfig> static_routes;
    std::vector<ProtoIfaceConfig> igmp_ifaces;
    std::vector<ProtoIfaceConfig> pim_ifaces;
    std::vector<StaticRpConfig> static_rps;
};

using ValidateResult = std::variant<NodeConfig, std::vector<ConfigError>>;

/// Schema check over the AST. Total: yields a NodeConfig or a non-empty
/// error list; unknown keywords and type errors carry positions.
ValidateResult validate_config(const ConfigAst& ast);

/// Convenience: parse + validate.
ValidateResult load_config(const std::string& text);

/// Applies a validated config to a router: interface addresses (and their
/// connected routes), static routes, IGMP/PIM interfaces, static RPs.
/// Resolution runs after the full config is loaded, so block order in the
/// file does not matter. Returns errors with config positions.
std::vector<ConfigError> apply_config(Router& router, const NodeConfig& cfg);

} // namespace mcastsim
