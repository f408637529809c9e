#pragma once

#include "seqsvm/dataset.hpp"
#include "seqsvm/fxp.hpp"
#include "seqsvm/trainer.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace seqsvm {

using Codes = std::vector<std::int64_t>;
using CodeMatrix = std::vector<Codes>;

struct QuantVector {
    int class_a = 0;
    int class_b = 1;
    std::vector<std::int64_t> weights;  // signed param_bits codes
    std::int64_t bias = 0;              // signed param_bits code, before alignment
    double scale = 1.0;                 // bookkeeping only
    bool zero = false;                  // all float coefficients were zero
};

// OvO support vectors as integer tables. Row r of `vectors` is memory row r;
// rows are in lexicographic (class_a, class_b) order.
struct QuantizedModel {
    int n_classes = 0;
    std::size_t n_features = 0;
    FxpFormat input_fmt = FxpFormat::unsigned_fmt(4, 4);
    int param_bits = 8;
    int bias_shift = 4;  // bias code is left-shifted by this before entering the accumulator
    int acc_width = 0;   // 0 until profiled
    std::vector<QuantVector> vectors;
    std::vector<FeatureRange> normalization;

    std::int64_t aligned_bias(std::size_t row) const
    {
        return vectors.at(row).bias * (std::int64_t{1} << bias_shift);
    }

    // Exact (unbounded) w.x + aligned bias for one row.
    std::int64_t exact_sum(std::size_t row, std::span<const std::int64_t> codes) const;

    // Width of the engine's parameter counter: holds 0 .. m+1.
    int counter_bits() const;

    // Throws std::invalid_argument when any table entry breaks its width.
    void validate() const;
};

struct ScaledVector {
    std::vector<std::int64_t> weights;
    std::int64_t bias = 0;          // stored code
    std::int64_t bias_aligned = 0;  // bias << input_frac_bits
    double scale = 1.0;
    bool zero = false;
};

// Min-max linear scaling of one support vector to signed param_bits codes:
// s = (2^(bits-1) - 1) / max(|w_i|, |b|), codes = round_half_even(coef * s).
ScaledVector scale_vector(std::span<const double> weights, double bias, int param_bits,
                          int input_frac_bits);

// Elementwise input truncation of a [0,1]-normalized dataset.
CodeMatrix quantize_inputs(const Dataset& ds, const FxpFormat& fmt);

// code * 2^-frac_bits for every code.
std::vector<double> dequantize(std::span<const std::int64_t> codes, const FxpFormat& fmt);

// Quantizes every OvO vector at one precision; acc_width stays 0.
QuantizedModel quantize_model(const FloatSvmModel& model, int param_bits, const FxpFormat& input_fmt);

struct AccProfile {
    std::int64_t min = 0;
    std::int64_t max = 0;
    int width = 1;
};

// Replays every vector on every sample, tracking the bias-initialized prefix
// sum and every partial sum after each MAC. Stores the width into qm.
AccProfile profile_accumulator(QuantizedModel& qm, const CodeMatrix& inputs);

struct PrecisionTrial {
    int param_bits = 0;
    double accuracy = 0.0;
};

struct QuantReport {
    int param_bits = 0;
    double float_accuracy = 0.0;          // float DDAG on the truncated test inputs
    double float_accuracy_exact_inputs = 0.0;  // float DDAG on unquantized test inputs
    double quantized_accuracy = 0.0;
    double accuracy_drop = 0.0;
    bool max_precision_flag = false;
    int acc_width = 0;
    std::int64_t acc_min = 0;
    std::int64_t acc_max = 0;
    std::vector<PrecisionTrial> trials;
};

inline constexpr double kMaxAccuracyDrop = 0.005;

// Tries param_bits = 2..max_bits in order and keeps the first whose quantized
// DDAG test accuracy is within kMaxAccuracyDrop of the float DDAG accuracy.
// If none qualifies, returns max_bits with the flag set. The accumulator is
// then profiled on the training inputs.
std::pair<QuantizedModel, QuantReport> search_param_bits(const FloatSvmModel& model,
                                                         const Dataset& train, const Dataset& test,
                                                         const FxpFormat& input_fmt, int max_bits = 8);

}  // namespace seqsvm
