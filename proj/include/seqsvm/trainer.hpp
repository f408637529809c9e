#pragma once

#include "seqsvm/dataset.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace seqsvm {

enum class Multiclass { OneVsOne, OneVsAll };

std::string to_string(Multiclass kind);
Multiclass multiclass_from_string(const std::string& s);

// Class id used as class_b of a one-vs-all vector ("all other classes").
inline constexpr int kRestClass = -1;

// Number of class pairs, and the lexicographic row index of pair (a, b), a < b.
constexpr int pair_count(int n_classes) { return n_classes * (n_classes - 1) / 2; }
constexpr int pair_index(int a, int b, int n_classes)
{
    return a * n_classes - a * (a + 1) / 2 + (b - a - 1);
}

struct FloatVector {
    int class_a = 0;
    int class_b = kRestClass;
    std::vector<double> weights;
    double bias = 0.0;
    bool degenerate = false;
    double train_accuracy = 0.0;

    // w.x + b; >= 0 means class_a wins.
    double decision(std::span<const double> x) const;
};

struct FloatSvmModel {
    Multiclass kind = Multiclass::OneVsOne;
    int n_classes = 0;
    std::size_t n_features = 0;
    std::vector<FloatVector> vectors;

    // OvO: max-wins voting, ties to the lowest class id.
    // OvA: largest decision value, ties to the lowest class id.
    int predict(std::span<const double> x) const;

    void validate() const;
};

struct Hyper {
    double lambda = 1e-3;
    int epochs = 20;
    std::uint64_t seed = 0;

    friend bool operator==(const Hyper&, const Hyper&) = default;
};

struct BinaryResult {
    std::vector<double> weights;
    double bias = 0.0;
    double train_accuracy = 0.0;
    bool degenerate = false;
};

// Primal hinge-loss subgradient descent with step 1/(lambda*t) on the samples
// of class_a (label +1) and class_b (label -1; kRestClass = every other class).
// The bias is an extra regularized coordinate with constant input 1, and the
// returned iterate is the average over the second half of the run.
BinaryResult train_binary(const Dataset& ds, int class_a, int class_b, const Hyper& hyper);

class TrainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One vector per class pair in lexicographic (a, b) order. Pairs are trained
// independently and may run on `threads` workers; the result does not depend
// on scheduling.
FloatSvmModel train_ovo(const Dataset& train, const Hyper& hyper, unsigned threads = 1);
FloatSvmModel train_ova(const Dataset& train, const Hyper& hyper, unsigned threads = 1);

struct SearchSpace {
    double lambda_min = 1e-5;
    double lambda_max = 1e-1;
    int epochs_min = 5;
    int epochs_max = 40;
};

struct SearchCandidate {
    Hyper hyper;
    double holdout_accuracy = 0.0;
};

struct SearchResult {
    Hyper best;
    double best_accuracy = 0.0;
    std::vector<SearchCandidate> candidates;
};

// Randomized search: lambda log-uniform, epochs uniform. Candidates are scored
// by OvO holdout accuracy; ties go to smaller lambda, then fewer epochs.
SearchResult random_search(const Dataset& train, const Dataset& holdout, const SearchSpace& space,
                           int budget, std::uint64_t seed, unsigned threads = 1);

// Picks the winner among already-scored candidates with the tie rule above.
Hyper best_candidate(std::span<const SearchCandidate> candidates);

double accuracy(const FloatSvmModel& model, const Dataset& ds);
double accuracy(const Dataset& ds, const std::function<int(std::size_t)>& predict_sample);

}  // namespace seqsvm
