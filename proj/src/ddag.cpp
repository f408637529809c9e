#include "seqsvm/ddag.hpp"

#include <algorithm>
#include <stdexcept>

namespace seqsvm {

int ddag_state_bits(int n_classes)
{
    return std::max(1, ceil_log2(static_cast<std::uint64_t>(pair_count(n_classes))));
}

Ddag build_ddag(int n_classes)
{
    if (n_classes < 2)
        throw std::invalid_argument("a DDAG needs at least two classes");

    Ddag dag;
    dag.n_classes = n_classes;
    dag.state_bits = ddag_state_bits(n_classes);
    dag.nodes.resize(static_cast<std::size_t>(pair_count(n_classes)));
    for (int lo = 0; lo < n_classes; ++lo) {
        for (int hi = lo + 1; hi < n_classes; ++hi) {
            const int id = pair_index(lo, hi, n_classes);
            DdagNode& nd = dag.nodes[static_cast<std::size_t>(id)];
            nd.state = id;
            nd.row = id;
            nd.class_a = lo;
            nd.class_b = hi;
            nd.if_a_wins = hi - 1 == lo ? DdagEdge{true, lo} : DdagEdge{false, pair_index(lo, hi - 1, n_classes)};
            nd.if_b_wins = lo + 1 == hi ? DdagEdge{true, hi} : DdagEdge{false, pair_index(lo + 1, hi, n_classes)};
        }
    }
    dag.initial_state = pair_index(0, n_classes - 1, n_classes);
    return dag;
}

void Ddag::validate() const
{
    if (n_classes < 2)
        throw std::invalid_argument("DDAG needs at least two classes");
    if (nodes.size() != static_cast<std::size_t>(pair_count(n_classes)))
        throw std::invalid_argument("DDAG node count mismatch");
    if (ordering != "natural")
        throw std::invalid_argument("unsupported DDAG ordering '" + ordering + "'");
    const auto n_states = static_cast<int>(nodes.size());
    if (initial_state < 0 || initial_state >= n_states)
        throw std::invalid_argument("DDAG initial state out of range");
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        const auto& nd = nodes[s];
        if (nd.state != static_cast<int>(s) || nd.row < 0 || nd.row >= n_states)
            throw std::invalid_argument("DDAG node " + std::to_string(s) + " is malformed");
        for (const auto& e : {nd.if_a_wins, nd.if_b_wins}) {
            if (e.leaf ? (e.target < 0 || e.target >= n_classes) : (e.target < 0 || e.target >= n_states))
                throw std::invalid_argument("DDAG edge out of range at node " + std::to_string(s));
        }
    }
}

std::int64_t QuantizedModel::exact_sum(std::size_t row, std::span<const std::int64_t> codes) const
{
    const auto& v = vectors.at(row);
    std::int64_t s = aligned_bias(row);
    for (std::size_t i = 0; i < v.weights.size(); ++i)
        s += v.weights[i] * codes[i];
    return s;
}

DdagResult ddag_infer(const QuantizedModel& qm, const Ddag& dag, std::span<const std::int64_t> codes)
{
    if (codes.size() != qm.n_features)
        throw std::invalid_argument("input width does not match the model");
    DdagResult r;
    r.evaluations.reserve(static_cast<std::size_t>(dag.n_classes - 1));
    int state = dag.initial_state;
    while (true) {
        const DdagNode& nd = dag.node(state);
        const std::int64_t sum = qm.exact_sum(static_cast<std::size_t>(nd.row), codes);
        const bool a_wins = sum >= 0;
        r.evaluations.push_back({state, nd.row, a_wins, sum});
        const DdagEdge& e = a_wins ? nd.if_a_wins : nd.if_b_wins;
        if (e.leaf) {
            r.predicted = e.target;
            r.final_state = state;
            return r;
        }
        state = e.target;
    }
}

int ovo_vote_infer(const QuantizedModel& qm, std::span<const std::int64_t> codes)
{
    if (codes.size() != qm.n_features)
        throw std::invalid_argument("input width does not match the model");
    std::vector<int> votes(static_cast<std::size_t>(qm.n_classes), 0);
    for (std::size_t r = 0; r < qm.vectors.size(); ++r) {
        const auto& v = qm.vectors[r];
        ++votes[static_cast<std::size_t>(qm.exact_sum(r, codes) >= 0 ? v.class_a : v.class_b)];
    }
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

int ddag_infer_float(const FloatSvmModel& model, const Ddag& dag, std::span<const double> x)
{
    if (model.kind != Multiclass::OneVsOne)
        throw std::invalid_argument("DDAG inference needs a one-vs-one model");
    int state = dag.initial_state;
    while (true) {
        const DdagNode& nd = dag.node(state);
        const bool a_wins = model.vectors.at(static_cast<std::size_t>(nd.row)).decision(x) >= 0.0;
        const DdagEdge& e = a_wins ? nd.if_a_wins : nd.if_b_wins;
        if (e.leaf)
            return e.target;
        state = e.target;
    }
}

}  // namespace seqsvm
