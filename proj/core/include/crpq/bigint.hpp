#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace crpq {

// Unsigned big integer, base 1e9 limbs. Just enough arithmetic for the
// width-bound formulas, which overflow 64 bits already at modest atom counts.
class BigUint {
public:
    BigUint() : limbs_{0} {}
    BigUint(uint64_t v);

    static BigUint pow(uint64_t base, uint64_t exp);

    BigUint& operator+=(const BigUint& o);
    BigUint& operator-=(uint64_t v); // requires *this >= v
    BigUint& operator*=(uint64_t v);
    BigUint operator+(const BigUint& o) const { BigUint r = *this; r += o; return r; }
    BigUint operator*(uint64_t v) const { BigUint r = *this; r *= v; return r; }

    bool fits_u64() const;
    uint64_t as_u64_saturating() const;
    std::string str() const;

    std::strong_ordering operator<=>(const BigUint& o) const;
    bool operator==(const BigUint& o) const = default;

private:
    void trim();
    std::vector<uint32_t> limbs_; // little-endian, base 1e9
};

} // namespace crpq
