#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "wmc/errors.hpp"

namespace wmc {

/// Charging decision per route edge. Bit e (0-based) set means the MTEV is
/// charged in motion on edge e+1. Printed left to right from edge 1.
class ChargePattern {
public:
    static constexpr int kMaxWidth = 64;

    ChargePattern() = default;
    explicit ChargePattern(int width, std::uint64_t bits = 0) : width_(width), bits_(bits) {
        if (width < 0 || width > kMaxWidth) throw StructuralError("charge pattern width out of range");
        if (width < kMaxWidth && (bits >> width) != 0) throw StructuralError("charge pattern has bits beyond its width");
    }

    static ChargePattern from_string(std::string_view text) {
        ChargePattern p(static_cast<int>(text.size()));
        for (std::size_t e = 0; e < text.size(); ++e) {
            if (text[e] == '1') {
                p.set(static_cast<int>(e));
            } else if (text[e] != '0') {
                throw StructuralError("charge pattern strings use only 0 and 1");
            }
        }
        return p;
    }

    static ChargePattern all(int width) {
        return ChargePattern(width, width == kMaxWidth ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1));
    }

    int width() const { return width_; }
    std::uint64_t bits() const { return bits_; }
    bool test(int e) const { return ((bits_ >> e) & 1U) != 0; }
    void set(int e) { bits_ |= std::uint64_t{1} << e; }
    int count() const { return std::popcount(bits_); }
    bool none() const { return bits_ == 0; }

    bool is_subset_of(const ChargePattern& other) const { return (bits_ & other.bits_) == bits_; }

    std::string to_string() const {
        std::string s(static_cast<std::size_t>(width_), '0');
        for (int e = 0; e < width_; ++e)
            if (test(e)) s[static_cast<std::size_t>(e)] = '1';
        return s;
    }

    friend bool operator==(const ChargePattern&, const ChargePattern&) = default;
    friend std::strong_ordering operator<=>(const ChargePattern& a, const ChargePattern& b) {
        if (auto c = a.width_ <=> b.width_; c != 0) return c;
        return a.bits_ <=> b.bits_;
    }

private:
    int width_ = 0;
    std::uint64_t bits_ = 0;
};

} // namespace wmc
