#include "seqsvm/synth.hpp"

#include "seqsvm/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace seqsvm {

std::string to_string(SynthKind kind)
{
    switch (kind) {
    case SynthKind::Blobs: return "blobs";
    case SynthKind::Noisy: return "noisy";
    case SynthKind::Rings: return "rings";
    }
    return "?";
}

SynthKind synth_kind_from_string(const std::string& s)
{
    if (s == "blobs")
        return SynthKind::Blobs;
    if (s == "noisy")
        return SynthKind::Noisy;
    if (s == "rings")
        return SynthKind::Rings;
    throw std::invalid_argument("unknown dataset kind '" + s + "' (blobs|noisy|rings)");
}

Dataset generate_synthetic(const SynthSpec& spec)
{
    if (spec.n_classes < 2)
        throw std::invalid_argument("need at least two classes");
    if (spec.n_features < 1 || spec.samples_per_class < 1)
        throw std::invalid_argument("need at least one feature and one sample per class");
    if (spec.kind == SynthKind::Rings && spec.n_features < 2)
        throw std::invalid_argument("rings need at least two features");

    const int n = spec.n_classes;
    const std::size_t m = spec.n_features;
    Rng rng(spec.seed);

    std::vector<std::vector<double>> centers(static_cast<std::size_t>(n), std::vector<double>(m));
    double sigma = 0.0;
    double flip = 0.0;
    switch (spec.kind) {
    case SynthKind::Blobs:
        for (auto& c : centers)
            for (auto& v : c)
                v = rng.uniform(0.0, 1.0);
        sigma = 0.04;
        break;
    case SynthKind::Noisy:
        for (auto& c : centers)
            for (auto& v : c)
                v = rng.uniform(0.0, 1.0);
        sigma = 0.15;
        flip = 0.03;
        break;
    case SynthKind::Rings: {
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int k = 0; k < n; ++k) {
            const double a = phase + 2.0 * std::numbers::pi * k / n;
            auto& c = centers[static_cast<std::size_t>(k)];
            c[0] = 0.5 + 0.35 * std::cos(a);
            c[1] = 0.5 + 0.35 * std::sin(a);
            // remaining features: weak class signal
            for (std::size_t j = 2; j < m; ++j)
                c[j] = 0.5 + rng.uniform(-0.08, 0.08);
        }
        sigma = 0.07;
        break;
    }
    }

    Dataset ds;
    ds.n_features = m;
    ds.n_classes = n;
    for (std::size_t j = 0; j < m; ++j)
        ds.feature_names.push_back("f" + std::to_string(j));
    for (int k = 0; k < n; ++k)
        ds.class_names.push_back("c" + std::to_string(k));

    std::vector<double> x(m);
    for (std::size_t i = 0; i < spec.samples_per_class; ++i) {
        for (int k = 0; k < n; ++k) {
            const auto& c = centers[static_cast<std::size_t>(k)];
            for (std::size_t j = 0; j < m; ++j)
                x[j] = c[j] + sigma * rng.normal();
            int label = k;
            if (flip > 0.0 && rng.uniform() < flip)
                label = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
            ds.push_back(x, label);
        }
    }
    return ds;
}

}  // namespace seqsvm
