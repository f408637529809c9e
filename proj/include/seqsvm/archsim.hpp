#pragma once

#include "seqsvm/ddag.hpp"
#include "seqsvm/quant.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seqsvm {

enum class StorageKind { Mux, Rom };

std::string to_string(StorageKind kind);
StorageKind storage_kind_from_string(const std::string& s);

struct ArchConfig {
    StorageKind storage = StorageKind::Mux;
    int adc_count = 4;  // ROM only: 2-bit ADCs reading one word
};

// Parameter memory: one support vector per row, columns [bias, w_1 .. w_m].
// MUX storage holds the words as hardwired constants; ROM storage holds them as
// 2-bit crossbar dots, most significant dot first within each word.
class StorageUnit {
public:
    StorageKind kind() const { return kind_; }
    int rows() const { return rows_; }
    int words_per_row() const { return words_per_row_; }
    int word_bits() const { return word_bits_; }
    int adc_count() const { return adc_count_; }

    int cells_per_word() const { return (word_bits_ + 1) / 2; }
    std::size_t cell_count() const
    {
        return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(words_per_row_) *
               static_cast<std::size_t>(cells_per_word());
    }
    // Read slots per word: always 1 for MUX, ceil(word_bits / (2 * adc_count)) for ROM.
    int access_slots() const;

    std::int64_t read(int row, int col) const;

    // ROM only: the raw 2-bit dot values of one word, most significant first.
    std::span<const std::uint8_t> dots(int row, int col) const;

    friend StorageUnit compile_storage(const QuantizedModel& qm, StorageKind kind, int adc_count);

private:
    StorageKind kind_ = StorageKind::Mux;
    int rows_ = 0;
    int words_per_row_ = 0;
    int word_bits_ = 0;
    int adc_count_ = 1;
    std::vector<std::int64_t> words_;  // MUX
    std::vector<std::uint8_t> dots_;   // ROM
};

class StorageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lays the quantized tables out as storage. Throws StorageError when a value
// does not fit word_bits.
StorageUnit compile_storage(const QuantizedModel& qm, StorageKind kind, int adc_count = 4);

struct EngineConfig {
    int n_features = 1;
    int acc_width = 1;
    int bias_shift = 0;

    static EngineConfig from_model(const QuantizedModel& qm)
    {
        return {static_cast<int>(qm.n_features), qm.acc_width, qm.bias_shift};
    }
};

struct EngineState {
    std::int64_t acc = 0;
    int counter = 0;
    bool ready = false;
    bool y = true;
    bool overflow = false;  // sticky within one evaluation
};

// One cycle of the single-MAC engine. Counter 0 loads the (hardwired-shifted)
// bias word into the accumulator; counter k >= 1 accumulates word * input_code.
// The accumulator wraps in acc_width bits and sets the sticky overflow flag.
EngineState engine_step(const EngineState& st, const EngineConfig& cfg, std::int64_t word,
                        std::int64_t input_code);

struct FsmState {
    int state = 0;
    bool done = false;
    int out_class = -1;
};

// Control FSM transition on an engine result: y=1 follows the class_a edge.
FsmState fsm_step(const FsmState& fs, const Ddag& dag, bool y);

struct CycleRecord {
    std::uint64_t cycle = 0;
    int fsm_state = 0;
    int counter = 0;
    int row = 0;
    int col = 0;
    std::int64_t word = 0;
    std::int64_t input = 0;
    std::int64_t acc = 0;  // accumulator after this cycle
    bool ready = false;
    bool y = false;
    bool overflow = false;
};

struct SimTrace {
    std::vector<CycleRecord> records;  // empty when recording is off
    std::uint64_t cycles = 0;
    int evaluations = 0;
    int overflows = 0;  // evaluations whose accumulator overflowed
};

struct SimResult {
    int predicted = 0;
    int final_state = 0;
    SimTrace trace;
};

SimResult simulate(const QuantizedModel& qm, const Ddag& dag, const StorageUnit& storage,
                   std::span<const std::int64_t> codes, bool record = true);

struct BatchResult {
    double accuracy = 0.0;
    std::size_t overflow_samples = 0;
    std::size_t overflow_events = 0;
    double mean_cycles = 0.0;
    std::vector<int> predictions;
};

BatchResult simulate_batch(const QuantizedModel& qm, const Ddag& dag, const StorageUnit& storage,
                           const CodeMatrix& inputs, std::span<const int> labels);

// Expected cycles of one classification: (n-1)(m+1).
std::uint64_t cycles_per_inference(int n_classes, std::size_t n_features);

struct RegisterCensus {
    int accumulator = 0;
    int counter = 0;
    int fsm_state = 0;
    int total() const { return accumulator + counter + fsm_state; }
};

RegisterCensus register_census(const QuantizedModel& qm, const Ddag& dag);

// One line per cycle, fields in the order of CycleRecord, after a '#' header.
std::string trace_to_text(const SimTrace& trace);

}  // namespace seqsvm
