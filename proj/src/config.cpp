#include "mcastsim/config.hpp"

#include "mcastsim/errors.hpp"

#include <charconv>

namespace mcastsim {

std::string ConfigError::str(const std::string& file) const {
    std::string out;
    if (!file.empty()) out += file + ":";
    out += std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + message;
    return out;
}

bool AstNode::same_shape(const AstNode& other) const {
    if (kind != other.kind || keyword != other.keyword || arg != other.arg ||
        value != other.value || has_value != other.has_value || quoted != other.quoted ||
        children.size() != other.children.size()) {
        return false;
    }
    for (size_t i = 0; i < children.size(); ++i) {
        if (!children[i].same_shape(other.children[i])) return false;
    }
    return true;
}

bool ConfigAst::same_shape(const ConfigAst& other) const {
    if (items.size() != other.items.size()) return false;
    for (size_t i = 0; i < items.size(); ++i) {
        if (!items[i].same_shape(other.items[i])) return false;
    }
    return true;
}

namespace {

struct Token {
    enum class Kind { Word, Colon, OpenBrace, CloseBrace, String, End };

    Kind kind = Kind::End;
    std::string text;
    Position pos;
};

struct Lexer {
    const std::string& text;
    size_t at = 0;
    Position pos;
    std::optional<ConfigError> error;

    void advance() {
        if (text[at] == '\n') {
            ++pos.line;
            pos.col = 1;
        } else {
            ++pos.col;
        }
        ++at;
    }

    void skip_space_and_comments() {
        while (at < text.size()) {
            char c = text[at];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && at + 1 < text.size() && text[at + 1] == '*') {
                Position start = pos;
                advance();
                advance();
                bool closed = false;
                while (at < text.size()) {
                    if (text[at] == '*' && at + 1 < text.size() && text[at + 1] == '/') {
                        advance();
                        advance();
                        closed = true;
                        break;
                    }
                    advance();
                }
                if (!closed) {
                    error = ConfigError{start, "unterminated comment"};
                    return;
                }
            } else {
                return;
            }
        }
    }

    static bool word_char(char c) {
        return c != ' ' && c != '\t' && c != '\r' && c != '\n' && c != '{' && c != '}' &&
               c != ':' && c != '"';
    }

    Token next() {
        skip_space_and_comments();
        if (error) return Token{Token::Kind::End, "", pos};
        if (at >= text.size()) return Token{Token::Kind::End, "", pos};
        Position start = pos;
        char c = text[at];
        if (c == '{') {
            advance();
            return Token{Token::Kind::OpenBrace, "{", start};
        }
        if (c == '}') {
            advance();
            return Token{Token::Kind::CloseBrace, "}", start};
        }
        if (c == ':') {
            advance();
            return Token{Token::Kind::Colon, ":", start};
        }
        if (c == '"') {
            advance();
            std::string value;
            while (at < text.size() && text[at] != '"' && text[at] != '\n') {
                value += text[at];
                advance();
            }
            if (at >= text.size() || text[at] != '"') {
                error = ConfigError{start, "unterminated string"};
                return Token{Token::Kind::End, "", start};
            }
            advance();
            return Token{Token::Kind::String, value, start};
        }
        std::string word;
        while (at < text.size() && word_char(text[at])) {
            word += text[at];
            advance();
        }
        if (word.empty()) {
            error = ConfigError{start, std::string("unexpected character '") + c + "'"};
            return Token{Token::Kind::End, "", start};
        }
        return Token{Token::Kind::Word, word, start};
    }
};

struct Parser {
    Lexer lexer;
    Token lookahead[3];
    std::optional<ConfigError> error;

    explicit Parser(const std::string& text) : lexer{text, 0, {}, {}} {
        for (auto& slot : lookahead) slot = lexer.next();
        if (lexer.error) error = lexer.error;
    }

    const Token& peek(int n = 0) const { return lookahead[n]; }

    Token take() {
        Token tok = lookahead[0];
        lookahead[0] = lookahead[1];
        lookahead[1] = lookahead[2];
        lookahead[2] = lexer.next();
        if (lexer.error && !error) error = lexer.error;
        return tok;
    }

    void fail(Position pos, const std::string& message) {
        if (!error) error = ConfigError{pos, message};
    }

    // items := (statement | block)*
    std::vector<AstNode> parse_items(bool top_level) {
        std::vector<AstNode> items;
        while (!error) {
            const Token& tok = peek();
            if (tok.kind == Token::Kind::End) {
                if (!top_level) fail(tok.pos, "unbalanced braces: expected '}'");
                return items;
            }
            if (tok.kind == Token::Kind::CloseBrace) {
                if (top_level) fail(tok.pos, "unbalanced braces: unexpected '}'");
                return items;
            }
            if (tok.kind != Token::Kind::Word) {
                fail(tok.pos, "expected keyword, got '" + tok.text + "'");
                return items;
            }
            items.push_back(parse_item());
        }
        return items;
    }

    AstNode parse_item() {
        Token keyword = take();
        AstNode node;
        node.keyword = keyword.text;
        node.pos = keyword.pos;

        const Token& t1 = peek(0);
        if (t1.kind == Token::Kind::Colon) {
            take();
            Token value = take();
            if (value.kind != Token::Kind::Word && value.kind != Token::Kind::String) {
                fail(value.pos, "expected value after ':'");
                return node;
            }
            node.kind = AstNode::Kind::Statement;
            node.value = value.text;
            node.has_value = true;
            node.quoted = value.kind == Token::Kind::String;
            return node;
        }
        if (t1.kind == Token::Kind::OpenBrace) {
            take();
            node.kind = AstNode::Kind::Block;
            node.children = parse_items(false);
            expect_close();
            return node;
        }
        if ((t1.kind == Token::Kind::Word || t1.kind == Token::Kind::String) &&
            peek(1).kind == Token::Kind::OpenBrace) {
            Token arg = take();
            take(); // '{'
            node.kind = AstNode::Kind::Block;
            node.arg = arg.text;
            node.children = parse_items(false);
            expect_close();
            return node;
        }
        // Bare keyword statement (e.g. default-system-config).
        node.kind = AstNode::Kind::Statement;
        node.has_value = false;
        return node;
    }

    void expect_close() {
        if (error) return;
        const Token& tok = peek();
        if (tok.kind != Token::Kind::CloseBrace) {
            fail(tok.pos, "unbalanced braces: expected '}'");
            return;
        }
        take();
    }
};

void render_items(const std::vector<AstNode>& items, int depth, std::string& out) {
    std::string indent(size_t(depth) * 4, ' ');
    for (const AstNode& node : items) {
        out += indent;
        out += node.keyword;
        if (node.kind == AstNode::Kind::Block) {
            if (node.arg) {
                out += ' ';
                out += *node.arg;
            }
            out += " {\n";
            render_items(node.children, depth + 1, out);
            out += indent;
            out += "}\n";
        } else {
            if (node.has_value) {
                out += ": ";
                if (node.quoted) {
                    out += '"';
                    out += node.value;
                    out += '"';
                } else {
                    out += node.value;
                }
            }
            out += '\n';
        }
    }
}

} // namespace

ParseResult parse_config(const std::string& text) {
    Parser parser(text);
    ConfigAst ast;
    ast.items = parser.parse_items(true);
    if (parser.error) return *parser.error;
    return ast;
}

std::string render_config(const ConfigAst& ast) {
    std::string out;
    render_items(ast.items, 0, out);
    return out;
}

namespace {

struct Validator {
    std::vector<ConfigError> errors;

    void error(Position pos, const std::string& message) {
        errors.push_back(ConfigError{pos, message});
    }

    std::optional<bool> parse_bool(const AstNode& node) {
        if (node.value == "true") return true;
        if (node.value == "false") return false;
        error(node.pos, "expected true or false for '" + node.keyword + "', got '" +
                            node.value + "'");
        return std::nullopt;
    }

    std::optional<Addr> parse_addr(const AstNode& node, const std::string& what) {
        auto addr = Addr::parse(node.value);
        if (!addr) error(node.pos, "bad " + what + " '" + node.value + "'");
        return addr;
    }

    std::optional<int> parse_int(const AstNode& node, int lo, int hi) {
        int value = 0;
        auto [ptr, ec] =
            std::from_chars(node.value.data(), node.value.data() + node.value.size(), value);
        if (ec != std::errc() || ptr != node.value.data() + node.value.size() || value < lo ||
            value > hi) {
            error(node.pos, "expected integer " + std::to_string(lo) + ".." + std::to_string(hi) +
                                " for '" + node.keyword + "'");
            return std::nullopt;
        }
        return value;
    }

    void unknown(const AstNode& node, const std::string& where) {
        error(node.pos, "unknown keyword '" + node.keyword + "' in " + where);
    }

    AddressConfig address(const AstNode& block) {
        AddressConfig out;
        out.pos = block.pos;
        bool have_prefix = false;
        if (auto addr = Addr::parse(block.arg.value_or(""))) {
            out.addr = *addr;
        } else {
            error(block.pos, "bad address '" + block.arg.value_or("") + "'");
        }
        for (const AstNode& child : block.children) {
            if (child.kind == AstNode::Kind::Statement && child.keyword == "prefix-length") {
                if (auto len = parse_int(child, 0, 32)) {
                    out.prefix_length = *len;
                    have_prefix = true;
                }
            } else if (child.kind == AstNode::Kind::Statement && child.keyword == "broadcast") {
                if (auto addr = parse_addr(child, "broadcast address")) {
                    out.broadcast = *addr;
                    // Cross-checked against prefix-length below.
                }
            } else if (child.kind == AstNode::Kind::Statement && child.keyword == "disable") {
                if (auto v = parse_bool(child)) out.enabled = !*v;
            } else {
                unknown(child, "address block");
            }
        }
        if (!have_prefix) {
            error(block.pos, "address block needs prefix-length");
        } else if (!Prefix::make(Addr(out.addr.value() & (out.prefix_length == 0
                                                              ? 0
                                                              : ~uint32_t(0)
                                                                    << (32 - out.prefix_length))),
                                 out.prefix_length)) {
            error(block.pos, "bad prefix-length " + std::to_string(out.prefix_length));
        } else if (out.broadcast) {
            auto prefix = Prefix::make(
                Addr(out.addr.value() &
                     (out.prefix_length == 0 ? 0 : ~uint32_t(0) << (32 - out.prefix_length))),
                out.prefix_length);
            if (prefix && prefix->broadcast() != *out.broadcast) {
                error(block.pos, "broadcast " + out.broadcast->str() + " does not match " +
                                     prefix->str() + " (expected " + prefix->broadcast().str() +
                                     ")");
            }
        }
        return out;
    }

    VifConfig vif(const AstNode& block) {
        VifConfig out;
        out.pos = block.pos;
        out.name = block.arg.value_or("");
        if (out.name.empty()) error(block.pos, "vif needs a name");
        for (const AstNode& child : block.children) {
            if (child.kind == AstNode::Kind::Statement && child.keyword == "disable") {
                if (auto v = parse_bool(child)) out.enabled = !*v;
            } else if (child.kind == AstNode::Kind::Block && child.keyword == "address") {
                out.addresses.push_back(address(child));
            } else {
                unknown(child, "vif block");
            }
        }
        return out;
    }

    InterfaceConfig interface(const AstNode& block) {
        InterfaceConfig out;
        out.pos = block.pos;
        out.name = block.arg.value_or("");
        if (out.name.empty()) error(block.pos, "interface needs a name");
        for (const AstNode& child : block.children) {
            if (child.kind == AstNode::Kind::Statement && child.keyword == "description") {
                out.description = child.value;
            } else if (child.kind == AstNode::Kind::Statement && child.keyword == "disable") {
                if (auto v = parse_bool(child)) out.enabled = !*v;
            } else if (child.kind == AstNode::Kind::Statement &&
                       child.keyword == "default-system-config") {
                // Accepted and recorded; there is no host system to inherit from.
                out.default_system_config = true;
            } else if (child.kind == AstNode::Kind::Block && child.keyword == "vif") {
                out.vifs.push_back(vif(child));
            } else {
                unknown(child, "interface block");
            }
        }
        return out;
    }

    void interfaces(const AstNode& block, NodeConfig& cfg) {
        for (const AstNode& child : block.children) {
            if (child.kind == AstNode::Kind::Block && child.keyword == "interface") {
                InterfaceConfig ic = interface(child);
                for (const auto& existing : cfg.interfaces) {
                    if (existing.name == ic.name) {
                        error(child.pos, "duplicate interface '" + ic.name + "'");
                    }
                }
                cfg.interfaces.push_back(std::move(ic));
            } else {
                unknown(child, "interfaces block");
            }
        }
    }

    void static_routes(const AstNode& block, NodeConfig& cfg) {
        for (const AstNode& child : block.children) {
            if (child.kind == AstNode::Kind::Block && child.keyword == "route") {
                StaticRouteConfig route;
                route.pos = child.pos;
                auto prefix = Prefix::parse(child.arg.value_or(""));
                if (!prefix) {
                    error(child.pos, "bad route prefix '" + child.arg.value_or("") + "'");
                    continue;
                }
                route.prefix = *prefix;
                bool have_next_hop = false;
                for (const AstNode& stmt : child.children) {
                    if (stmt.kind == AstNode::Kind::Statement && stmt.keyword == "next-hop") {
                        if (auto addr = parse_addr(stmt, "next-hop")) {
                            route.next_hop = *addr;
                            have_next_hop = true;
                        }
                    } else {
                        unknown(stmt, "route block");
                    }
                }
                if (!have_next_hop) {
                    error(child.pos, "route needs next-hop");
                    continue;
                }
                cfg.static_routes.push_back(route);
            } else {
                unknown(child, "static block");
            }
        }
    }

    void proto_ifaces(const AstNode& block, std::vector<ProtoIfaceConfig>& out,
                      const std::string& where) {
        for (const AstNode& child : block.children) {
            if (child.kind == AstNode::Kind::Block && child.keyword == "interface") {
                std::string iface = child.arg.value_or("");
                if (iface.empty()) {
                    error(child.pos, "interface needs a name");
                    continue;
                }
                for (const AstNode& vif_block : child.children) {
                    if (vif_block.kind == AstNode::Kind::Block && vif_block.keyword == "vif") {
                        ProtoIfaceConfig pic;
                        pic.pos = vif_block.pos;
                        pic.iface = iface;
                        pic.vif = vif_block.arg.value_or("");
                        for (const AstNode& stmt : vif_block.children) {
                            if (stmt.kind == AstNode::Kind::Statement &&
                                stmt.keyword == "disable") {
                                if (auto v = parse_bool(stmt)) pic.enabled = !*v;
                            } else {
                                unknown(stmt, where + " vif block");
                            }
                        }
                        out.push_back(std::move(pic));
                    } else {
                        unknown(vif_block, where + " interface block");
                    }
                }
            } else if (child.kind == AstNode::Kind::Block && child.keyword == "static-rps") {
                // handled by caller (pimsm4 only)
            } else {
                unknown(child, where + " block");
            }
        }
    }

    void static_rps(const AstNode& block, NodeConfig& cfg) {
        for (const AstNode& child : block.children) {
            if (child.kind == AstNode::Kind::Block && child.keyword == "rp") {
                StaticRpConfig rp;
                rp.pos = child.pos;
                auto addr = Addr::parse(child.arg.value_or(""));
                if (!addr) {
                    error(child.pos, "bad rp address '" + child.arg.value_or("") + "'");
                    continue;
                }
                rp.rp = *addr;
                bool have_prefix = false;
                for (const AstNode& stmt : child.children) {
                    if (stmt.kind == AstNode::Kind::Statement && stmt.keyword == "group-prefix") {
                        auto prefix = Prefix::parse(stmt.value);
                        if (!prefix) {
                            error(stmt.pos, "bad group-prefix '" + stmt.value + "'");
                        } else if (prefix->length() < 4 ||
                                   !is_multicast(prefix->network())) {
                            error(stmt.pos,
                                  "group-prefix must lie within 224.0.0.0/4");
                        } else {
                            rp.group_prefix = *prefix;
                            have_prefix = true;
                        }
                    } else {
                        unknown(stmt, "rp block");
                    }
                }
                if (!have_prefix) {
                    error(child.pos, "rp needs group-prefix");
                    continue;
                }
                if (is_multicast(rp.rp)) {
                    error(child.pos, "rp address must be unicast");
                    continue;
                }
                cfg.static_rps.push_back(rp);
            } else {
                unknown(child, "static-rps block");
            }
        }
    }

    void pimsm(const AstNode& block, NodeConfig& cfg) {
        proto_ifaces(block, cfg.pim_ifaces, "pimsm4");
        for (const AstNode& child : block.children) {
            if (child.kind == AstNode::Kind::Block && child.keyword == "static-rps") {
                static_rps(child, cfg);
            }
        }
    }

    void protocols(const AstNode& block, NodeConfig& cfg) {
        for (const AstNode& child : block.children) {
            if (child.kind != AstNode::Kind::Block) {
                unknown(child, "protocols block");
                continue;
            }
            if (child.keyword == "static") {
                static_routes(child, cfg);
            } else if (child.keyword == "igmp") {
                proto_ifaces(child, cfg.igmp_ifaces, "igmp");
            } else if (child.keyword == "pimsm4") {
                pimsm(child, cfg);
            } else {
                unknown(child, "protocols block");
            }
        }
    }

    NodeConfig run(const ConfigAst& ast) {
        NodeConfig cfg;
        for (const AstNode& item : ast.items) {
            if (item.kind == AstNode::Kind::Block && item.keyword == "interfaces") {
                interfaces(item, cfg);
            } else if (item.kind == AstNode::Kind::Block && item.keyword == "protocols") {
                protocols(item, cfg);
            } else {
                unknown(item, "top level");
            }
        }
        // vif names must match their enclosing interface (one vif per
        // physical port in this model).
        for (const auto& ic : cfg.interfaces) {
            for (const auto& vc : ic.vifs) {
                if (vc.name != ic.name) {
                    errors.push_back(ConfigError{
                        vc.pos, "vif '" + vc.name + "' must match interface '" + ic.name + "'"});
                }
            }
        }
        return cfg;
    }
};

} // namespace

ValidateResult validate_config(const ConfigAst& ast) {
    Validator validator;
    NodeConfig cfg = validator.run(ast);
    if (!validator.errors.empty()) return validator.errors;
    return cfg;
}

ValidateResult load_config(const std::string& text) {
    ParseResult parsed = parse_config(text);
    if (std::holds_alternative<ConfigError>(parsed)) {
        return std::vector<ConfigError>{std::get<ConfigError>(parsed)};
    }
    return validate_config(std::get<ConfigAst>(parsed));
}

std::vector<ConfigError> apply_config(Router& router, const NodeConfig& cfg) {
    std::vector<ConfigError> errors;

    // Phase 1: interfaces and addresses (connected routes).
    for (const auto& ic : cfg.interfaces) {
        Interface* ifp = router.find_interface(ic.name);
        if (!ifp) {
            errors.push_back(
                ConfigError{ic.pos, "interface '" + ic.name + "' is not in the topology"});
            continue;
        }
        if (!ic.enabled) {
            ifp->enabled = false;
            continue;
        }
        for (const auto& vc : ic.vifs) {
            if (!vc.enabled) continue;
            for (const auto& ac : vc.addresses) {
                if (!ac.enabled) continue;
                uint32_t mask =
                    ac.prefix_length == 0 ? 0 : ~uint32_t(0) << (32 - ac.prefix_length);
                auto prefix = Prefix::make(Addr(ac.addr.value() & mask), ac.prefix_length);
                if (!prefix) {
                    errors.push_back(ConfigError{ac.pos, "bad address/prefix"});
                    continue;
                }
                router.add_address(ic.name, ac.addr, *prefix);
            }
        }
    }

    // Phase 2: static routes. The out-interface comes from the connected
    // prefix covering the next hop.
    for (const auto& rc : cfg.static_routes) {
        const Interface* ifp = router.connected_iface_for(rc.next_hop);
        if (!ifp) {
            errors.push_back(ConfigError{rc.pos, "next hop " + rc.next_hop.str() +
                                                     " is in no connected prefix"});
            continue;
        }
        try {
            router.rib().add_route(RouteEntry{rc.prefix, rc.next_hop, ifp->name});
        } catch (const SimError& e) {
            errors.push_back(ConfigError{rc.pos, e.what()});
        }
    }

    // Phase 3: protocol interfaces.
    for (const auto& pic : cfg.igmp_ifaces) {
        if (!pic.enabled) continue;
        if (!router.find_interface(pic.iface)) {
            errors.push_back(
                ConfigError{pic.pos, "igmp interface '" + pic.iface + "' is not in the topology"});
            continue;
        }
        router.enable_igmp(pic.iface);
    }
    for (const auto& pic : cfg.pim_ifaces) {
        if (!pic.enabled) continue;
        if (!router.find_interface(pic.iface)) {
            errors.push_back(
                ConfigError{pic.pos, "pim interface '" + pic.iface + "' is not in the topology"});
            continue;
        }
        router.enable_pim(pic.iface);
    }

    // Phase 4: static RPs, after routes so resolution is order-independent.
    for (const auto& rp : cfg.static_rps) {
        try {
            router.pim().set_static_rp(RpMapping{rp.group_prefix, rp.rp});
        } catch (const SimError& e) {
            errors.push_back(ConfigError{rp.pos, e.what()});
        }
    }

    return errors;
}

} // namespace mcastsim
