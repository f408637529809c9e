#include "seqsvm/archsim.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace seqsvm;

namespace {

QuantizedModel pendigits_shape(Rng& rng)
{
    return testing::random_model(rng, 10, 17, 8);
}

}  // namespace

TEST_CASE("storage shapes")
{
    Rng rng(1);
    const QuantizedModel pd = pendigits_shape(rng);
    const StorageUnit mux = compile_storage(pd, StorageKind::Mux);
    CHECK(mux.rows() == 45);
    CHECK(mux.words_per_row() == 18);
    CHECK(mux.word_bits() == 8);
    CHECK(mux.access_slots() == 1);

    const StorageUnit rom = compile_storage(pd, StorageKind::Rom, 4);
    CHECK(rom.cells_per_word() == 4);
    CHECK(rom.cell_count() == 45u * 18u * 4u);
    CHECK(rom.access_slots() == 1);
    CHECK(compile_storage(pd, StorageKind::Rom, 2).access_slots() == 2);
    CHECK(compile_storage(pd, StorageKind::Rom, 1).access_slots() == 4);
    CHECK_THROWS_AS(compile_storage(pd, StorageKind::Rom, 5), StorageError);

    const QuantizedModel tiny = testing::random_model(rng, 2, 1, 5);
    const StorageUnit t = compile_storage(tiny, StorageKind::Rom, 1);
    CHECK(t.rows() == 1);
    CHECK(t.words_per_row() == 2);
    CHECK(t.cells_per_word() == 3);
    CHECK(t.access_slots() == 3);
}

TEST_CASE("storage read-back is exact for both kinds")
{
    Rng rng(2);
    for (int t = 0; t < 30; ++t) {
        const int n = static_cast<int>(rng.integer(2, 8));
        const auto m = static_cast<std::size_t>(rng.integer(1, 12));
        const int bits = static_cast<int>(rng.integer(2, 10));
        const QuantizedModel qm = testing::random_model(rng, n, m, bits);
        for (auto kind : {StorageKind::Mux, StorageKind::Rom}) {
            const StorageUnit s = compile_storage(qm, kind, 4);
            for (int r = 0; r < s.rows(); ++r) {
                const auto& v = qm.vectors[static_cast<std::size_t>(r)];
                REQUIRE(s.read(r, 0) == v.bias);
                for (std::size_t j = 0; j < m; ++j)
                    REQUIRE(s.read(r, static_cast<int>(j) + 1) == v.weights[j]);
            }
            CHECK_THROWS_AS(s.read(s.rows(), 0), StorageError);
            CHECK_THROWS_AS(s.read(0, s.words_per_row()), StorageError);
        }
    }
}

TEST_CASE("rom dots are big-endian 2-bit digits of the two's-complement word")
{
    QuantizedModel qm;
    qm.n_classes = 2;
    qm.n_features = 1;
    qm.param_bits = 8;
    qm.vectors = {{0, 1, {-3}, 0x5b}};
    const StorageUnit s = compile_storage(qm, StorageKind::Rom);
    const auto bias = s.dots(0, 0);  // 0x5b = 01 01 10 11
    CHECK(std::vector<std::uint8_t>(bias.begin(), bias.end()) == std::vector<std::uint8_t>{1, 1, 2, 3});
    const auto w = s.dots(0, 1);  // -3 = 0xfd = 11 11 11 01
    CHECK(std::vector<std::uint8_t>(w.begin(), w.end()) == std::vector<std::uint8_t>{3, 3, 3, 1});
    CHECK_THROWS(compile_storage(qm, StorageKind::Mux).dots(0, 0));
}

TEST_CASE("engine examples")
{
    // zero model: ready after m + 1 steps with y = 1
    EngineConfig cfg{3, 8, 4};
    EngineState st;
    for (int i = 0; i < 4; ++i) {
        CHECK_FALSE(st.ready);
        st = engine_step(st, cfg, 0, i == 0 ? 0 : 9);
    }
    CHECK(st.ready);
    CHECK(st.counter == 4);
    CHECK(st.y);
    CHECK_THROWS(engine_step(st, cfg, 0, 0));

    // w = -7, x = 15, b = 0
    EngineConfig one{1, 8, 4};
    st = engine_step(EngineState{}, one, 0, 0);
    st = engine_step(st, one, -7, 15);
    CHECK(st.ready);
    CHECK(st.acc == -105);
    CHECK_FALSE(st.y);
    CHECK_FALSE(st.overflow);

    // undersized: 7 * 15 = 105 > 63 in 7 bits
    EngineConfig small{1, 7, 4};
    st = engine_step(EngineState{}, small, 0, 0);
    st = engine_step(st, small, 7, 15);
    CHECK(st.overflow);
    CHECK(st.acc == 105 - 128);
    CHECK_FALSE(st.y);

    // the bias load alone can overflow
    st = engine_step(EngineState{}, small, 4, 0);  // 64 in s7
    CHECK(st.overflow);
    CHECK(st.acc == -64);
}

TEST_CASE("overflow flag is sticky within an evaluation")
{
    EngineConfig cfg{3, 7, 4};
    EngineState st = engine_step(EngineState{}, cfg, 0, 0);
    st = engine_step(st, cfg, 7, 15);  // 105: wraps
    CHECK(st.overflow);
    st = engine_step(st, cfg, -7, 15);  // back to 0 after wrapping
    CHECK(st.overflow);
    CHECK(st.acc == 0);
    st = engine_step(st, cfg, 0, 15);
    CHECK(st.overflow);
    CHECK(st.ready);
}

TEST_CASE("cycle law for reference shapes")
{
    Rng rng(3);
    const std::pair<int, std::size_t> shapes[] = {{3, 21}, {6, 33}, {10, 17}, {6, 11}, {7, 11}, {4, 6}, {2, 1}};
    const std::uint64_t expected[] = {44, 170, 162, 60, 72, 21, 2};
    for (std::size_t k = 0; k < std::size(shapes); ++k) {
        const auto [n, m] = shapes[k];
        const QuantizedModel qm = testing::random_model(rng, n, m);
        const Ddag d = build_ddag(n);
        const StorageUnit s = compile_storage(qm, StorageKind::Mux);
        CHECK(cycles_per_inference(n, m) == expected[k]);
        for (int t = 0; t < 10; ++t) {
            const auto r = simulate(qm, d, s, testing::random_codes(rng, m));
            REQUIRE(r.trace.cycles == expected[k]);
            REQUIRE(r.trace.records.size() == expected[k]);
            REQUIRE(r.trace.evaluations == n - 1);
        }
    }
}

TEST_CASE("trace records follow the datapath")
{
    Rng rng(4);
    const QuantizedModel qm = testing::random_model(rng, 4, 6);
    const Ddag d = build_ddag(4);
    const StorageUnit s = compile_storage(qm, StorageKind::Mux);
    const Codes x = testing::random_codes(rng, 6);
    const auto r = simulate(qm, d, s, x);
    for (const auto& c : r.trace.records) {
        CHECK(c.row == d.node(c.fsm_state).row);
        CHECK(c.word == s.read(c.row, c.col));
        CHECK(c.input == (c.col == 0 ? 0 : x[static_cast<std::size_t>(c.col - 1)]));
        CHECK(c.ready == (c.counter == 6));
        CHECK(c.counter <= 6);
    }
    CHECK(r.trace.records.front().acc == qm.aligned_bias(static_cast<std::size_t>(d.initial_state)));
    const std::string text = trace_to_text(r.trace);
    CHECK(text.front() == '#');
    CHECK(std::count(text.begin(), text.end(), '\n') >= 21);
    CHECK(simulate(qm, d, s, x, false).trace.records.empty());
}

TEST_CASE("simulator equals golden model on overflow-free inputs")
{
    Rng rng(6);
    for (int t = 0; t < 40; ++t) {
        const int n = static_cast<int>(rng.integer(2, 8));
        const auto m = static_cast<std::size_t>(rng.integer(1, 12));
        const QuantizedModel qm = testing::random_model(rng, n, m, static_cast<int>(rng.integer(2, 8)));
        const Ddag d = build_ddag(n);
        const StorageUnit s = compile_storage(qm, t % 2 ? StorageKind::Rom : StorageKind::Mux);
        for (int i = 0; i < 200; ++i) {
            const Codes x = testing::random_codes(rng, m);
            const auto sim = simulate(qm, d, s, x, false);
            const auto ref = ddag_infer(qm, d, x);
            REQUIRE(sim.trace.overflows == 0);
            REQUIRE(sim.predicted == ref.predicted);
            REQUIRE(sim.final_state == ref.final_state);
        }
    }
}

TEST_CASE("undersized accumulator: overflow is counted")
{
    QuantizedModel qm;
    qm.n_classes = 2;
    qm.n_features = 1;
    qm.param_bits = 4;
    qm.acc_width = 7;
    qm.vectors = {{0, 1, {7}, 0}};
    const Ddag d = build_ddag(2);
    const StorageUnit s = compile_storage(qm, StorageKind::Mux);
    const Codes x = {15};
    const auto r = simulate(qm, d, s, x);
    CHECK(r.trace.overflows == 1);
    CHECK(r.predicted == 1);  // wrapped to -23
    CHECK(ddag_infer(qm, d, x).predicted == 0);
}

TEST_CASE("batch simulation")
{
    Rng rng(7);
    const QuantizedModel qm = testing::random_model(rng, 5, 4);
    const Ddag d = build_ddag(5);
    const StorageUnit s = compile_storage(qm, StorageKind::Mux);
    CodeMatrix inputs;
    std::vector<int> labels;
    for (int i = 0; i < 300; ++i) {
        inputs.push_back(testing::random_codes(rng, 4));
        labels.push_back(static_cast<int>(rng.index(5)));
    }
    const auto b = simulate_batch(qm, d, s, inputs, labels);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        ok += ddag_infer(qm, d, inputs[i]).predicted == labels[i];
    CHECK(b.overflow_samples == 0);
    CHECK(b.accuracy == static_cast<double>(ok) / 300.0);
    CHECK(b.mean_cycles == 20.0);
    CHECK(b.predictions.size() == 300);
    CHECK_THROWS(simulate_batch(qm, d, s, {}, {}));
}

TEST_CASE("register census")
{
    Rng rng(8);
    QuantizedModel qm = testing::random_model(rng, 10, 17);
    qm.acc_width = 15;
    const auto c = register_census(qm, build_ddag(10));
    CHECK(c.accumulator == 15);
    CHECK(c.counter == 5);  // holds 0..18
    CHECK(c.fsm_state == 6);
    CHECK(c.total() == 26);
    CHECK(qm.counter_bits() == 5);
}

TEST_CASE("storage kind strings")
{
    CHECK(to_string(StorageKind::Mux) == "mux");
    CHECK(storage_kind_from_string("rom") == StorageKind::Rom);
    CHECK_THROWS(storage_kind_from_string("sram"));
}
