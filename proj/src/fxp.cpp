#include "seqsvm/fxp.hpp"

#include <cmath>
#include <limits>

namespace seqsvm {

void FxpFormat::validate() const
{
    if (total_bits < 1 || total_bits > 62)
        throw std::invalid_argument("fixed-point total_bits must be in [1, 62]");
    if (frac_bits < 0)
        throw std::invalid_argument("fixed-point frac_bits must be >= 0");
    const int limit = is_signed ? total_bits - 1 : total_bits;
    if (frac_bits > limit)
        throw std::invalid_argument("fixed-point frac_bits too large for " + to_string());
}

std::int64_t FxpFormat::min_raw() const
{
    return is_signed ? signed_min(total_bits) : 0;
}

std::int64_t FxpFormat::max_raw() const
{
    return is_signed ? signed_max(total_bits) : (std::int64_t{1} << total_bits) - 1;
}

std::string FxpFormat::to_string() const
{
    return (is_signed ? "s" : "u") + std::to_string(total_bits) + "." + std::to_string(frac_bits);
}

double FxpValue::real() const
{
    return std::ldexp(static_cast<double>(raw), -fmt.frac_bits);
}

FxpValue truncate_to_format(double real, const FxpFormat& fmt)
{
    fmt.validate();
    if (fmt.is_signed)
        throw std::invalid_argument("input truncation requires an unsigned format");
    if (!std::isfinite(real) || real < 0.0)
        throw std::invalid_argument("input truncation requires a finite non-negative value");

    const double scaled = std::floor(std::ldexp(real, fmt.frac_bits));
    const auto top = static_cast<double>(fmt.max_raw());
    const std::int64_t raw = scaled >= top ? fmt.max_raw() : static_cast<std::int64_t>(scaled);
    return {raw, fmt};
}

std::int64_t signed_min(int width)
{
    return -(std::int64_t{1} << (width - 1));
}

std::int64_t signed_max(int width)
{
    return (std::int64_t{1} << (width - 1)) - 1;
}

bool fits_signed(std::int64_t value, int width)
{
    if (width >= 64)
        return true;
    return value >= signed_min(width) && value <= signed_max(width);
}

int width_for_range(std::int64_t lo, std::int64_t hi)
{
    if (lo > hi)
        throw std::invalid_argument("width_for_range: lo > hi");
    int w = 1;
    while (!(fits_signed(lo, w) && fits_signed(hi, w)))
        ++w;
    return w;
}

std::int64_t wrap_signed(std::int64_t value, int width)
{
    if (width >= 64)
        return value;
    const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
    std::uint64_t bits = static_cast<std::uint64_t>(value) & mask;
    if (bits >> (width - 1))
        bits |= ~mask;
    return static_cast<std::int64_t>(bits);
}

MacResult mac_accumulate(std::int64_t acc, std::int64_t weight_raw, std::int64_t input_raw,
                         int acc_width)
{
    const std::int64_t sum = acc + weight_raw * input_raw;
    return {sum, !fits_signed(sum, acc_width)};
}

std::int64_t round_half_even(double x)
{
    // nearbyint honours the current rounding mode, which is round-to-nearest-even
    // unless someone changed it; do the tie handling explicitly instead.
    const double fl = std::floor(x);
    const double diff = x - fl;
    auto r = static_cast<std::int64_t>(fl);
    if (diff > 0.5 || (diff == 0.5 && (r & 1) != 0))
        ++r;
    return r;
}

int ceil_log2(std::uint64_t x)
{
    int bits = 0;
    while ((std::uint64_t{1} << bits) < x)
        ++bits;
    return bits;
}

}  // namespace seqsvm
