#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mcastsim {

/// 32-bit IPv4-style network address, stored host-order.
class Addr {
public:
    constexpr Addr() = default;
    constexpr explicit Addr(uint32_t value) : value_(value) {}
    constexpr Addr(uint8_t a, uint8_t b, uint8_t c, uint8_t d)
        : value_((uint32_t(a) << 24) | (uint32_t(b) << 16) | (uint32_t(c) << 8) | uint32_t(d)) {}

    constexpr uint32_t value() const { return value_; }
    constexpr auto operator<=>(const Addr&) const = default;

    std::string str() const;

    static std::optional<Addr> parse(std::string_view text);

private:
    uint32_t value_ = 0;
};

/// True iff addr lies in 224.0.0.0/4.
constexpr bool is_multicast(Addr addr) {
    return (addr.value() & 0xF0000000u) == 0xE0000000u;
}

/// CIDR prefix in canonical form: host bits below `length` are zero.
class Prefix {
public:
    /// 0.0.0.0/0 (the default route).
    constexpr Prefix() = default;

    /// Returns nullopt unless length <= 32 and network has no host bits set.
    static std::optional<Prefix> make(Addr network, int length);

    /// Accepts "a.b.c.d/len" and the mask form "a.b.c.d m.m.m.m"
    /// (contiguous masks only). Non-canonical inputs are rejected.
    static std::optional<Prefix> parse(std::string_view text);

    /// Mask form used by hostname-style files; mask must be contiguous.
    static std::optional<Prefix> from_mask(Addr network, Addr mask);

    Addr network() const { return network_; }
    int length() const { return length_; }

    constexpr uint32_t mask() const {
        return length_ == 0 ? 0u : ~uint32_t(0) << (32 - length_);
    }

    bool contains(Addr addr) const {
        return (addr.value() & mask()) == network_.value();
    }

    /// Network address with all host bits set.
    Addr broadcast() const { return Addr(network_.value() | ~mask()); }

    std::string str() const;

    auto operator<=>(const Prefix&) const = default;

private:
    constexpr Prefix(Addr network, int length) : network_(network), length_(length) {}

    Addr network_;
    int length_ = 0;
};

/// Address constrained to the multicast range 224.0.0.0/4.
class GroupAddr {
public:
    /// 224.0.0.0, the bottom of the multicast range.
    constexpr GroupAddr() : addr_(0xE0000000u) {}

    static std::optional<GroupAddr> make(Addr addr) {
        if (!is_multicast(addr)) return std::nullopt;
        return GroupAddr(addr);
    }
    static std::optional<GroupAddr> parse(std::string_view text) {
        auto a = Addr::parse(text);
        if (!a) return std::nullopt;
        return make(*a);
    }

    Addr addr() const { return addr_; }
    std::string str() const { return addr_.str(); }

    auto operator<=>(const GroupAddr&) const = default;

private:
    constexpr explicit GroupAddr(Addr addr) : addr_(addr) {}
    Addr addr_;
};

} // namespace mcastsim
