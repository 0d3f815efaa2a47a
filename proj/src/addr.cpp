#include "mcastsim/addr.hpp"

#include <charconv>

namespace mcastsim {

std::string Addr::str() const {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((value_ >> shift) & 0xFFu);
        if (shift > 0) out += '.';
    }
    return out;
}

namespace {

// Parses one decimal octet 0-255, advancing `pos`. Leading '+'/'-' rejected.
std::optional<uint32_t> parse_octet(std::string_view text, size_t& pos) {
    if (pos >= text.size() || text[pos] < '0' || text[pos] > '9') return std::nullopt;
    uint32_t v = 0;
    size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        v = v * 10 + uint32_t(text[pos] - '0');
        if (v > 255 || ++digits > 3) return std::nullopt;
        ++pos;
    }
    return v;
}

} // namespace

std::optional<Addr> Addr::parse(std::string_view text) {
    size_t pos = 0;
    uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
        if (i > 0) {
            if (pos >= text.size() || text[pos] != '.') return std::nullopt;
            ++pos;
        }
        auto octet = parse_octet(text, pos);
        if (!octet) return std::nullopt;
        value = (value << 8) | *octet;
    }
    if (pos != text.size()) return std::nullopt;
    return Addr(value);
}

std::optional<Prefix> Prefix::make(Addr network, int length) {
    if (length < 0 || length > 32) return std::nullopt;
    Prefix p(network, length);
    if ((network.value() & ~p.mask()) != 0) return std::nullopt;
    return p;
}

std::optional<Prefix> Prefix::parse(std::string_view text) {
    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        auto net = Addr::parse(text.substr(0, slash));
        if (!net) return std::nullopt;
        auto len_text = text.substr(slash + 1);
        int len = 0;
        auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
        if (ec != std::errc() || ptr != len_text.data() + len_text.size()) return std::nullopt;
        return make(*net, len);
    }
    auto space = text.find(' ');
    if (space == std::string_view::npos) return std::nullopt;
    auto net = Addr::parse(text.substr(0, space));
    auto mask = Addr::parse(text.substr(space + 1));
    if (!net || !mask) return std::nullopt;
    return from_mask(*net, *mask);
}

std::optional<Prefix> Prefix::from_mask(Addr network, Addr mask) {
    uint32_t m = mask.value();
    // Contiguous mask: ~m + 1 must be a power of two (or m == 0).
    if (m != 0 && (((~m + 1) & ~m) != 0)) return std::nullopt;
    int len = 0;
    for (uint32_t probe = m; probe & 0x80000000u; probe <<= 1) ++len;
    return make(network, len);
}

std::string Prefix::str() const {
    return network_.str() + "/" + std::to_string(length_);
}

} // namespace mcastsim
