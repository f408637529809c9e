#include "seqsvm/ddag.hpp"

#include "support.hpp"

#include <doctest.h>

#include <functional>
#include <set>

using namespace seqsvm;

namespace {

// interval-rule replay written without the library's row formula
int replay(const QuantizedModel& qm, std::span<const std::int64_t> x, int* evaluations = nullptr)
{
    const int n = qm.n_classes;
    const auto row_of = [&](int a, int b) {
        int r = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++r)
                if (i == a && j == b)
                    return r;
        return -1;
    };
    int lo = 0;
    int hi = n - 1;
    int count = 0;
    while (lo < hi) {
        const auto& v = qm.vectors[static_cast<std::size_t>(row_of(lo, hi))];
        std::int64_t s = v.bias * 16;
        for (std::size_t j = 0; j < x.size(); ++j)
            s += v.weights[j] * x[j];
        ++count;
        if (s >= 0)
            --hi;
        else
            ++lo;
    }
    if (evaluations)
        *evaluations = count;
    return lo;
}

// Every root-to-leaf path of the graph, as lists of states.
void paths(const Ddag& dag, int state, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    cur.push_back(state);
    const auto& nd = dag.node(state);
    for (const auto& e : {nd.if_a_wins, nd.if_b_wins}) {
        if (e.leaf)
            out.push_back(cur);
        else
            paths(dag, e.target, cur, out);
    }
    cur.pop_back();
}

}  // namespace

TEST_CASE("two classes: one node, two leaves")
{
    const Ddag d = build_ddag(2);
    REQUIRE(d.nodes.size() == 1);
    CHECK(d.state_bits == 1);
    CHECK(d.initial_state == 0);
    CHECK(d.nodes[0].if_a_wins == DdagEdge{true, 0});
    CHECK(d.nodes[0].if_b_wins == DdagEdge{true, 1});
    CHECK(d.ordering == "natural");
}

TEST_CASE("four and ten classes")
{
    const Ddag d4 = build_ddag(4);
    CHECK(d4.nodes.size() == 6);
    CHECK(d4.state_bits == 3);
    const DdagNode& root = d4.node(d4.initial_state);
    CHECK(root.class_a == 0);
    CHECK(root.class_b == 3);
    CHECK(root.row == pair_index(0, 3, 4));

    const Ddag d10 = build_ddag(10);
    CHECK(d10.nodes.size() == 45);
    CHECK(d10.state_bits == 6);
    std::vector<int> cur;
    std::vector<std::vector<int>> all;
    paths(d10, d10.initial_state, cur, all);
    for (const auto& p : all)
        CHECK(p.size() == 9);
}

TEST_CASE("structure for every n in 2..16")
{
    for (int n = 2; n <= 16; ++n) {
        const Ddag d = build_ddag(n);
        const int pairs = n * (n - 1) / 2;
        REQUIRE(static_cast<int>(d.nodes.size()) == pairs);
        int bits = 0;
        while ((1 << bits) < pairs)
            ++bits;
        REQUIRE(d.state_bits == std::max(1, bits));
        REQUIRE(ddag_state_bits(n) == d.state_bits);
        std::set<std::pair<int, int>> seen;
        for (int s = 0; s < pairs; ++s) {
            const auto& nd = d.node(s);
            REQUIRE(nd.state == s);
            REQUIRE(nd.row == s);
            REQUIRE(nd.class_a < nd.class_b);
            REQUIRE(pair_index(nd.class_a, nd.class_b, n) == nd.row);
            seen.insert({nd.class_a, nd.class_b});
        }
        REQUIRE(static_cast<int>(seen.size()) == pairs);

        std::vector<int> cur;
        std::vector<std::vector<int>> all;
        paths(d, d.initial_state, cur, all);
        REQUIRE(all.size() == (std::size_t{1} << (n - 1)));
        for (const auto& p : all) {
            REQUIRE(static_cast<int>(p.size()) == n - 1);
            std::set<std::pair<int, int>> used;
            for (int s : p)
                REQUIRE(used.insert({d.node(s).class_a, d.node(s).class_b}).second);
        }
        CHECK_NOTHROW(d.validate());
    }
    CHECK_THROWS(build_ddag(1));
}

TEST_CASE("zero model: class_a wins at sum 0")
{
    QuantizedModel qm;
    qm.n_classes = 2;
    qm.n_features = 3;
    qm.vectors = {{0, 1, {0, 0, 0}, 0}};
    const Codes x = {5, 6, 7};
    const auto r = ddag_infer(qm, build_ddag(2), x);
    CHECK(r.predicted == 0);
    REQUIRE(r.evaluations.size() == 1);
    CHECK(r.evaluations[0].a_wins);
    CHECK(r.evaluations[0].sum == 0);
    CHECK(ovo_vote_infer(qm, x) == 0);
}

TEST_CASE("four classes, six features: three evaluations")
{
    Rng rng(3);
    const QuantizedModel qm = testing::random_model(rng, 4, 6);
    const Ddag d = build_ddag(4);
    for (int t = 0; t < 50; ++t) {
        const Codes x = testing::random_codes(rng, 6);
        const auto r = ddag_infer(qm, d, x);
        CHECK(r.evaluations.size() == 3);
        CHECK(r.evaluations.size() * (qm.n_features + 1) == 21);
    }
}

TEST_CASE("ddag agrees with an independent path replay")
{
    Rng rng(55);
    for (int t = 0; t < 20; ++t) {
        const QuantizedModel qm = testing::random_model(rng, 5, 7);
        const Ddag d = build_ddag(5);
        for (int s = 0; s < 50; ++s) {
            const Codes x = testing::random_codes(rng, 7);
            int evals = 0;
            const auto r = ddag_infer(qm, d, x);
            REQUIRE(r.predicted == replay(qm, x, &evals));
            REQUIRE(static_cast<int>(r.evaluations.size()) == evals);
            // the winner won every comparison it took part in
            for (const auto& e : r.evaluations) {
                const auto& nd = d.node(e.state);
                REQUIRE(e.sum == qm.exact_sum(static_cast<std::size_t>(e.row), x));
                if (nd.class_a == r.predicted)
                    REQUIRE(e.a_wins);
                if (nd.class_b == r.predicted)
                    REQUIRE_FALSE(e.a_wins);
            }
        }
    }
}

TEST_CASE("two classes: ddag and vote always agree")
{
    Rng rng(9);
    for (int t = 0; t < 200; ++t) {
        const QuantizedModel qm = testing::random_model(rng, 2, 4);
        const Codes x = testing::random_codes(rng, 4);
        REQUIRE(ddag_infer(qm, build_ddag(2), x).predicted == ovo_vote_infer(qm, x));
    }
}

TEST_CASE("condorcet cycle: vote tie to lowest id, ddag differs")
{
    QuantizedModel qm;
    qm.n_classes = 3;
    qm.n_features = 1;
    qm.param_bits = 4;
    // 0 beats 1, 2 beats 0, 1 beats 2
    qm.vectors = {{0, 1, {0}, 1}, {0, 2, {0}, -1}, {1, 2, {0}, 1}};
    const Codes x = {9};
    CHECK(ovo_vote_infer(qm, x) == 0);
    const auto r = ddag_infer(qm, build_ddag(3), x);
    CHECK(r.predicted == 1);  // root 0 vs 2 -> 2, then 1 vs 2 -> 1
    CHECK(r.evaluations.size() == 2);
}

TEST_CASE("transitive pairwise results: ddag equals vote")
{
    // vector (a, b) = f_a - f_b for per-class linear scores f
    Rng rng(77);
    std::size_t agree = 0;
    std::size_t total = 0;
    for (int t = 0; t < 30; ++t) {
        const int n = static_cast<int>(rng.integer(2, 8));
        const std::size_t m = static_cast<std::size_t>(rng.integer(1, 10));
        std::vector<Codes> f(static_cast<std::size_t>(n), Codes(m + 1));
        for (auto& c : f)
            for (auto& v : c)
                v = rng.integer(-60, 60);
        QuantizedModel qm;
        qm.n_classes = n;
        qm.n_features = m;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                QuantVector v{a, b, {}, 0};
                for (std::size_t j = 0; j < m; ++j)
                    v.weights.push_back(f[a][j] - f[b][j]);
                v.bias = f[a][m] - f[b][m];
                qm.vectors.push_back(v);
            }
        REQUIRE_NOTHROW(qm.validate());
        const Ddag d = build_ddag(n);
        for (int s = 0; s < 100; ++s) {
            const Codes x = testing::random_codes(rng, m);
            REQUIRE(ddag_infer(qm, d, x).predicted == ovo_vote_infer(qm, x));
        }
    }
    // random (generally intransitive) models: agreement is reported only
    for (int t = 0; t < 20; ++t) {
        const QuantizedModel qm = testing::random_model(rng, 6, 5);
        const Ddag d = build_ddag(6);
        for (int s = 0; s < 50; ++s) {
            const Codes x = testing::random_codes(rng, 5);
            agree += ddag_infer(qm, d, x).predicted == ovo_vote_infer(qm, x);
            ++total;
        }
    }
    MESSAGE("ddag/vote agreement on random 6-class models: " << agree << "/" << total);
}

TEST_CASE("float ddag walk")
{
    FloatSvmModel m;
    m.n_classes = 3;
    m.n_features = 1;
    m.vectors = {{0, 1, {1.0}, -0.5}, {0, 2, {1.0}, -0.5}, {1, 2, {1.0}, -0.5}};
    const Ddag d = build_ddag(3);
    const double hi[] = {0.9};
    const double lo[] = {0.1};
    CHECK(ddag_infer_float(m, d, hi) == 0);
    CHECK(ddag_infer_float(m, d, lo) == 2);
}
