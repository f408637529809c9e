#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace seqsvm {

// Two's-complement (or unsigned) fixed-point format: total_bits wide, frac_bits
// of them after the binary point.
struct FxpFormat {
    int total_bits = 4;
    int frac_bits = 4;
    bool is_signed = false;

    static FxpFormat unsigned_fmt(int total, int frac) { return {total, frac, false}; }
    static FxpFormat signed_fmt(int total, int frac) { return {total, frac, true}; }

    // Throws std::invalid_argument when the field combination is illegal.
    void validate() const;

    std::int64_t min_raw() const;
    std::int64_t max_raw() const;
    bool contains(std::int64_t raw) const { return raw >= min_raw() && raw <= max_raw(); }

    std::string to_string() const;  // "u4.4" / "s8.0"

    friend bool operator==(const FxpFormat&, const FxpFormat&) = default;
};

struct FxpValue {
    std::int64_t raw = 0;
    FxpFormat fmt;

    double real() const;
};

// floor(real * 2^frac_bits), clamped to the top code. Rejects negative or
// non-finite input and signed formats.
FxpValue truncate_to_format(double real, const FxpFormat& fmt);

// Smallest two's-complement width holding every value in [lo, hi].
int width_for_range(std::int64_t lo, std::int64_t hi);

// Inclusive signed range of a w-bit two's-complement register.
std::int64_t signed_min(int width);
std::int64_t signed_max(int width);
bool fits_signed(std::int64_t value, int width);

// Reduce value modulo 2^width into the signed range, as a register would.
std::int64_t wrap_signed(std::int64_t value, int width);

struct MacResult {
    std::int64_t value = 0;  // exact sum; the would-be value when overflow is set
    bool overflow = false;
};

// acc + weight_raw * input_raw checked against an acc_width-bit accumulator.
MacResult mac_accumulate(std::int64_t acc, std::int64_t weight_raw, std::int64_t input_raw,
                         int acc_width);

// Round to nearest, ties to even.
std::int64_t round_half_even(double x);

// ceil(log2(x)) for x >= 1, 0 for x == 1.
int ceil_log2(std::uint64_t x);

}  // namespace seqsvm
