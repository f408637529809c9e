#include "seqsvm/quant.hpp"

#include "seqsvm/ddag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqsvm {

int QuantizedModel::counter_bits() const
{
    return std::max(1, ceil_log2(n_features + 2));
}

void QuantizedModel::validate() const
{
    if (n_classes < 2 || n_features < 1)
        throw std::invalid_argument("quantized model needs n_classes >= 2 and n_features >= 1");
    input_fmt.validate();
    if (param_bits < 2 || param_bits > 32)
        throw std::invalid_argument("param_bits must be in [2, 32]");
    if (vectors.size() != static_cast<std::size_t>(pair_count(n_classes)))
        throw std::invalid_argument("quantized model must hold one vector per class pair");
    std::size_t r = 0;
    for (int a = 0; a < n_classes; ++a) {
        for (int b = a + 1; b < n_classes; ++b, ++r) {
            const auto& v = vectors[r];
            if (v.class_a != a || v.class_b != b)
                throw std::invalid_argument("vector " + std::to_string(r) + " is out of pair order");
            if (v.weights.size() != n_features)
                throw std::invalid_argument("vector " + std::to_string(r) + " has the wrong width");
            if (!fits_signed(v.bias, param_bits))
                throw std::invalid_argument("bias of vector " + std::to_string(r) + " exceeds param_bits");
            for (auto w : v.weights)
                if (!fits_signed(w, param_bits))
                    throw std::invalid_argument("weight of vector " + std::to_string(r) +
                                                " exceeds param_bits");
            if (acc_width > 0 && !fits_signed(aligned_bias(r), acc_width))
                throw std::invalid_argument("aligned bias of vector " + std::to_string(r) +
                                            " exceeds acc_width");
        }
    }
}

ScaledVector scale_vector(std::span<const double> weights, double bias, int param_bits,
                          int input_frac_bits)
{
    if (param_bits < 2)
        throw std::invalid_argument("param_bits must be >= 2");
    double peak = std::abs(bias);
    for (double w : weights)
        peak = std::max(peak, std::abs(w));

    ScaledVector out;
    out.weights.assign(weights.size(), 0);
    if (peak == 0.0) {
        out.zero = true;
        return out;
    }
    const double top = static_cast<double>(signed_max(param_bits));
    out.scale = top / peak;
    for (std::size_t i = 0; i < weights.size(); ++i)
        out.weights[i] = round_half_even(weights[i] * out.scale);
    out.bias = round_half_even(bias * out.scale);
    out.bias_aligned = out.bias * (std::int64_t{1} << input_frac_bits);
    return out;
}

CodeMatrix quantize_inputs(const Dataset& ds, const FxpFormat& fmt)
{
    CodeMatrix out(ds.size(), Codes(ds.n_features));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto x = ds.row(i);
        for (std::size_t j = 0; j < ds.n_features; ++j)
            out[i][j] = truncate_to_format(x[j], fmt).raw;
    }
    return out;
}

std::vector<double> dequantize(std::span<const std::int64_t> codes, const FxpFormat& fmt)
{
    std::vector<double> out(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i)
        out[i] = FxpValue{codes[i], fmt}.real();
    return out;
}

QuantizedModel quantize_model(const FloatSvmModel& model, int param_bits, const FxpFormat& input_fmt)
{
    if (model.kind != Multiclass::OneVsOne)
        throw std::invalid_argument("only one-vs-one models map onto the sequential engine");
    model.validate();
    QuantizedModel qm;
    qm.n_classes = model.n_classes;
    qm.n_features = model.n_features;
    qm.input_fmt = input_fmt;
    qm.param_bits = param_bits;
    qm.bias_shift = input_fmt.frac_bits;
    for (const auto& fv : model.vectors) {
        const auto sv = scale_vector(fv.weights, fv.bias, param_bits, input_fmt.frac_bits);
        QuantVector qv;
        qv.class_a = fv.class_a;
        qv.class_b = fv.class_b;
        qv.weights = sv.weights;
        qv.bias = sv.bias;
        qv.scale = sv.scale;
        qv.zero = sv.zero;
        qm.vectors.push_back(std::move(qv));
    }
    return qm;
}

AccProfile profile_accumulator(QuantizedModel& qm, const CodeMatrix& inputs)
{
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    bool any = false;
    const auto note = [&](std::int64_t v) {
        if (!any) {
            lo = hi = v;
            any = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    };
    for (std::size_t r = 0; r < qm.vectors.size(); ++r) {
        const auto& v = qm.vectors[r];
        const std::int64_t start = qm.aligned_bias(r);
        // The bias-initialized value is visible even without samples.
        note(start);
        for (const auto& x : inputs) {
            std::int64_t acc = start;
            for (std::size_t i = 0; i < v.weights.size(); ++i) {
                acc += v.weights[i] * x[i];
                note(acc);
            }
        }
    }
    AccProfile p{lo, hi, width_for_range(lo, hi)};
    qm.acc_width = p.width;
    return p;
}

std::pair<QuantizedModel, QuantReport> search_param_bits(const FloatSvmModel& model,
                                                         const Dataset& train, const Dataset& test,
                                                         const FxpFormat& input_fmt, int max_bits)
{
    if (max_bits < 2)
        throw std::invalid_argument("max_bits must be >= 2");
    const Ddag dag = build_ddag(model.n_classes);
    const CodeMatrix test_codes = quantize_inputs(test, input_fmt);

    QuantReport report;
    report.float_accuracy = accuracy(test, [&](std::size_t i) {
        const auto x = dequantize(test_codes[i], input_fmt);
        return ddag_infer_float(model, dag, x);
    });
    report.float_accuracy_exact_inputs =
        accuracy(test, [&](std::size_t i) { return ddag_infer_float(model, dag, test.row(i)); });

    QuantizedModel chosen;
    bool found = false;
    for (int bits = 2; bits <= max_bits; ++bits) {
        QuantizedModel qm = quantize_model(model, bits, input_fmt);
        const double acc = accuracy(test, [&](std::size_t i) {
            return ddag_infer(qm, dag, test_codes[i]).predicted;
        });
        report.trials.push_back({bits, acc});
        // epsilon absorbs the rounding of k/N differences
        if (report.float_accuracy - acc <= kMaxAccuracyDrop + 1e-12) {
            chosen = std::move(qm);
            report.quantized_accuracy = acc;
            found = true;
            break;
        }
    }
    if (!found) {
        chosen = quantize_model(model, max_bits, input_fmt);
        report.quantized_accuracy = report.trials.back().accuracy;
        report.max_precision_flag = true;
    }
    report.param_bits = chosen.param_bits;
    report.accuracy_drop = report.float_accuracy - report.quantized_accuracy;

    const auto profile = profile_accumulator(chosen, quantize_inputs(train, input_fmt));
    report.acc_width = profile.width;
    report.acc_min = profile.min;
    report.acc_max = profile.max;
    chosen.normalization = train.normalization;
    return {std::move(chosen), report};
}

}  // namespace seqsvm
