#pragma once

// Shared fixtures for the test binaries: random models, inputs, temp dirs.

#include "seqsvm/ddag.hpp"
#include "seqsvm/fxp.hpp"
#include "seqsvm/quant.hpp"
#include "seqsvm/rng.hpp"

#include <filesystem>
#include <string>

namespace testing {

using namespace seqsvm;

// Random OvO integer model with codes in the full signed param_bits range and
// an accumulator wide enough for any u4.4 input.
inline QuantizedModel random_model(Rng& rng, int n, std::size_t m, int bits = 8)
{
    QuantizedModel qm;
    qm.n_classes = n;
    qm.n_features = m;
    qm.param_bits = bits;
    const std::int64_t lo = signed_min(bits);
    const std::int64_t hi = signed_max(bits);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            QuantVector v;
            v.class_a = a;
            v.class_b = b;
            v.bias = rng.integer(lo, hi);
            for (std::size_t j = 0; j < m; ++j)
                v.weights.push_back(rng.integer(lo, hi));
            qm.vectors.push_back(v);
        }
    const std::int64_t bound = (-lo) * (static_cast<std::int64_t>(m) * 15 + 16);
    qm.acc_width = width_for_range(-bound, bound);
    return qm;
}

inline Codes random_codes(Rng& rng, std::size_t m, const FxpFormat& fmt = FxpFormat::unsigned_fmt(4, 4))
{
    Codes c(m);
    for (auto& v : c)
        v = rng.integer(fmt.min_raw(), fmt.max_raw());
    return c;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("seqsvm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
