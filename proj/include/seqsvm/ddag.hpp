#pragma once

#include "seqsvm/quant.hpp"
#include "seqsvm/trainer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seqsvm {

// Next-state target: another node, or a leaf carrying the predicted class.
struct DdagEdge {
    bool leaf = false;
    int target = 0;

    friend bool operator==(const DdagEdge&, const DdagEdge&) = default;
};

// One FSM state. The state id equals the memory row of its support vector.
struct DdagNode {
    int state = 0;
    int row = 0;
    int class_a = 0;  // lower class of the interval; wins when the engine outputs y=1
    int class_b = 1;
    DdagEdge if_a_wins;
    DdagEdge if_b_wins;
};

struct Ddag {
    int n_classes = 0;
    int initial_state = 0;
    int state_bits = 1;
    std::string ordering = "natural";
    std::vector<DdagNode> nodes;  // indexed by state id

    const DdagNode& node(int state) const { return nodes.at(static_cast<std::size_t>(state)); }
    void validate() const;
};

// Classical DDAG over the class list [0 .. n-1]. The state for interval
// (lo, hi) compares lo against hi; a win for lo drops hi, a win for hi drops lo.
Ddag build_ddag(int n_classes);

// ceil(log2(n(n-1)/2)), at least 1.
int ddag_state_bits(int n_classes);

struct Evaluation {
    int state = 0;
    int row = 0;
    bool a_wins = false;
    std::int64_t sum = 0;
};

struct DdagResult {
    int predicted = 0;
    int final_state = 0;
    std::vector<Evaluation> evaluations;
};

// Bit-exact golden model: n-1 evaluations of sign(aligned bias + sum w_i x_i)
// in exact integer arithmetic, sum >= 0 meaning class_a wins.
DdagResult ddag_infer(const QuantizedModel& qm, const Ddag& dag, std::span<const std::int64_t> codes);

// All pairs evaluated, max-wins voting, ties to the lowest class id.
int ovo_vote_infer(const QuantizedModel& qm, std::span<const std::int64_t> codes);

// The same DDAG walk over a float OvO model.
int ddag_infer_float(const FloatSvmModel& model, const Ddag& dag, std::span<const double> x);

}  // namespace seqsvm
