#include "seqsvm/archsim.hpp"

#include <sstream>
#include <stdexcept>

namespace seqsvm {

std::string to_string(StorageKind kind)
{
    return kind == StorageKind::Mux ? "mux" : "rom";
}

StorageKind storage_kind_from_string(const std::string& s)
{
    if (s == "mux")
        return StorageKind::Mux;
    if (s == "rom")
        return StorageKind::Rom;
    throw std::invalid_argument("storage kind must be 'mux' or 'rom', got '" + s + "'");
}

int StorageUnit::access_slots() const
{
    if (kind_ == StorageKind::Mux)
        return 1;
    return (word_bits_ + 2 * adc_count_ - 1) / (2 * adc_count_);
}

std::int64_t StorageUnit::read(int row, int col) const
{
    if (row < 0 || row >= rows_ || col < 0 || col >= words_per_row_)
        throw StorageError("storage read out of range (" + std::to_string(row) + ", " +
                           std::to_string(col) + ")");
    const auto slot = static_cast<std::size_t>(row) * static_cast<std::size_t>(words_per_row_) +
                      static_cast<std::size_t>(col);
    if (kind_ == StorageKind::Mux)
        return words_[slot];

    std::uint64_t bits = 0;
    for (auto d : dots(row, col))
        bits = (bits << 2) | d;
    return wrap_signed(static_cast<std::int64_t>(bits), word_bits_);
}

std::span<const std::uint8_t> StorageUnit::dots(int row, int col) const
{
    if (kind_ != StorageKind::Rom)
        throw StorageError("MUX storage has no crossbar dots");
    const auto cpw = static_cast<std::size_t>(cells_per_word());
    const auto slot = static_cast<std::size_t>(row) * static_cast<std::size_t>(words_per_row_) +
                      static_cast<std::size_t>(col);
    return {dots_.data() + slot * cpw, cpw};
}

StorageUnit compile_storage(const QuantizedModel& qm, StorageKind kind, int adc_count)
{
    if (kind == StorageKind::Rom && (adc_count < 1 || adc_count > 4))
        throw StorageError("ROM storage supports one to four 2-bit ADCs");
    StorageUnit s;
    s.kind_ = kind;
    s.rows_ = static_cast<int>(qm.vectors.size());
    s.words_per_row_ = static_cast<int>(qm.n_features) + 1;
    s.word_bits_ = qm.param_bits;
    s.adc_count_ = adc_count;

    const auto cpw = static_cast<std::size_t>(s.cells_per_word());
    const std::uint64_t mask = (std::uint64_t{1} << s.word_bits_) - 1;
    for (std::size_t r = 0; r < qm.vectors.size(); ++r) {
        const auto& v = qm.vectors[r];
        for (int c = 0; c < s.words_per_row_; ++c) {
            const std::int64_t value = c == 0 ? v.bias : v.weights[static_cast<std::size_t>(c - 1)];
            if (!fits_signed(value, s.word_bits_))
                throw StorageError("value " + std::to_string(value) + " at (" + std::to_string(r) +
                                   ", " + std::to_string(c) + ") does not fit " +
                                   std::to_string(s.word_bits_) + " bits");
            if (kind == StorageKind::Mux) {
                s.words_.push_back(value);
                continue;
            }
            const std::uint64_t bits = static_cast<std::uint64_t>(value) & mask;
            for (std::size_t d = 0; d < cpw; ++d)
                s.dots_.push_back(static_cast<std::uint8_t>((bits >> (2 * (cpw - 1 - d))) & 3u));
        }
    }
    return s;
}

EngineState engine_step(const EngineState& st, const EngineConfig& cfg, std::int64_t word,
                        std::int64_t input_code)
{
    if (st.ready)
        throw std::logic_error("engine stepped after ready");
    EngineState next = st;
    MacResult r;
    if (st.counter == 0) {
        const std::int64_t b = word * (std::int64_t{1} << cfg.bias_shift);
        r = {b, !fits_signed(b, cfg.acc_width)};
        next.overflow = false;
    } else {
        r = mac_accumulate(st.acc, word, input_code, cfg.acc_width);
    }
    next.acc = wrap_signed(r.value, cfg.acc_width);
    next.overflow = next.overflow || r.overflow;
    next.counter = st.counter + 1;
    next.ready = next.counter == cfg.n_features + 1;
    next.y = next.acc >= 0;
    return next;
}

FsmState fsm_step(const FsmState& fs, const Ddag& dag, bool y)
{
    if (fs.done)
        throw std::logic_error("FSM stepped after done");
    const DdagNode& nd = dag.node(fs.state);
    const DdagEdge& e = y ? nd.if_a_wins : nd.if_b_wins;
    FsmState next = fs;
    if (e.leaf) {
        next.done = true;
        next.out_class = e.target;
    } else {
        next.state = e.target;
    }
    return next;
}

std::uint64_t cycles_per_inference(int n_classes, std::size_t n_features)
{
    return static_cast<std::uint64_t>(n_classes - 1) * (n_features + 1);
}

SimResult simulate(const QuantizedModel& qm, const Ddag& dag, const StorageUnit& storage,
                   std::span<const std::int64_t> codes, bool record)
{
    if (codes.size() != qm.n_features)
        throw std::invalid_argument("input width does not match the model");
    if (qm.acc_width < 1)
        throw std::invalid_argument("model accumulator width has not been profiled");
    if (storage.rows() != static_cast<int>(qm.vectors.size()) ||
        storage.words_per_row() != static_cast<int>(qm.n_features) + 1)
        throw std::invalid_argument("storage does not match the model");

    const EngineConfig cfg = EngineConfig::from_model(qm);
    SimResult out;
    if (record)
        out.trace.records.reserve(cycles_per_inference(qm.n_classes, qm.n_features));

    FsmState fs{dag.initial_state, false, -1};
    EngineState eng;
    std::uint64_t cycle = 0;
    while (!fs.done) {
        const int row = dag.node(fs.state).row;
        const int col = eng.counter;
        const std::int64_t word = storage.read(row, col);
        const std::int64_t x = col == 0 ? 0 : codes[static_cast<std::size_t>(col - 1)];
        eng = engine_step(eng, cfg, word, x);
        if (record)
            out.trace.records.push_back(
                {cycle, fs.state, col, row, col, word, x, eng.acc, eng.ready, eng.y, eng.overflow});
        ++cycle;
        if (eng.ready) {
            ++out.trace.evaluations;
            out.trace.overflows += eng.overflow ? 1 : 0;
            out.final_state = fs.state;
            fs = fsm_step(fs, dag, eng.y);
            eng = EngineState{};
        }
    }
    out.trace.cycles = cycle;
    out.predicted = fs.out_class;
    return out;
}

BatchResult simulate_batch(const QuantizedModel& qm, const Ddag& dag, const StorageUnit& storage,
                           const CodeMatrix& inputs, std::span<const int> labels)
{
    if (inputs.empty())
        throw std::invalid_argument("batch simulation needs at least one sample");
    if (!labels.empty() && labels.size() != inputs.size())
        throw std::invalid_argument("label count does not match sample count");
    BatchResult b;
    std::size_t correct = 0;
    std::uint64_t cycles = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto r = simulate(qm, dag, storage, inputs[i], false);
        b.predictions.push_back(r.predicted);
        cycles += r.trace.cycles;
        b.overflow_events += static_cast<std::size_t>(r.trace.overflows);
        b.overflow_samples += r.trace.overflows > 0 ? 1 : 0;
        if (!labels.empty())
            correct += r.predicted == labels[i];
    }
    b.accuracy = labels.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(inputs.size());
    b.mean_cycles = static_cast<double>(cycles) / static_cast<double>(inputs.size());
    return b;
}

RegisterCensus register_census(const QuantizedModel& qm, const Ddag& dag)
{
    return {qm.acc_width, qm.counter_bits(), dag.state_bits};
}

std::string trace_to_text(const SimTrace& trace)
{
    std::ostringstream os;
    os << "# cycle fsm_state counter row col word input acc ready y overflow\n";
    for (const auto& r : trace.records) {
        os << r.cycle << ' ' << r.fsm_state << ' ' << r.counter << ' ' << r.row << ' ' << r.col << ' '
           << r.word << ' ' << r.input << ' ' << r.acc << ' ' << int(r.ready) << ' ' << int(r.y) << ' '
           << int(r.overflow) << '\n';
    }
    os << "# cycles " << trace.cycles << " evaluations " << trace.evaluations << " overflows "
       << trace.overflows << '\n';
    return os.str();
}

}  // namespace seqsvm
