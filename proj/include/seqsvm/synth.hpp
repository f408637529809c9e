#pragma once

#include "seqsvm/dataset.hpp"

#include <cstdint>
#include <string>

namespace seqsvm {

enum class SynthKind {
    Blobs,  // well separated Gaussian clusters
    Noisy,  // overlapping clusters plus label noise
    Rings,  // class centres on a circle; pairwise votes tend to cycle near the middle
};

std::string to_string(SynthKind kind);
SynthKind synth_kind_from_string(const std::string& s);

struct SynthSpec {
    SynthKind kind = SynthKind::Blobs;
    int n_classes = 3;
    std::size_t n_features = 11;
    std::size_t samples_per_class = 100;
    std::uint64_t seed = 0;
};

// Raw (unnormalized) features, class names "c0".."c{n-1}".
Dataset generate_synthetic(const SynthSpec& spec);

}  // namespace seqsvm
