#pragma once

#include "seqsvm/archsim.hpp"
#include "seqsvm/ddag.hpp"
#include "seqsvm/quant.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqsvm {

class HdlError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GoldenVector {
    Codes inputs;
    int expected_class = 0;
    int final_state = 0;
    std::uint64_t cycles = 0;
};

// Verilog-2001 text for one bespoke sequential classifier. Every file starts
// with `banner` (may be empty) as // comment lines.
struct HdlBundle {
    std::string module_name;
    std::string top_text;       // engine + control + top
    std::string storage_text;   // parameter storage (MUX case table or ROM dots)
    std::string testbench_text; // replays vectors.stim / vectors.expect
};

struct HdlOptions {
    std::string module_name = "svm";
    std::string banner;
};

HdlBundle generate(const QuantizedModel& qm, const Ddag& dag, const ArchConfig& arch,
                   const HdlOptions& opts = {});

struct GoldenFiles {
    std::string stim;
    std::string expect;
    std::vector<GoldenVector> vectors;
};

// Runs the simulator on the first `count` inputs and formats stimulus and
// expectation files:
//   vectors.stim:   index x_1 .. x_m cycle_budget
//   vectors.expect: index class final_state cycles
GoldenFiles emit_golden_vectors(const QuantizedModel& qm, const Ddag& dag, const StorageUnit& storage,
                                const CodeMatrix& inputs, std::size_t count, const std::string& banner = {});

// Recovers the [row][col] parameter table ([bias, w_1..w_m] per row) from
// emitted storage text, for either storage kind.
std::vector<std::vector<std::int64_t>> parse_storage_table(const std::string& storage_text);

// FSM structure recovered from emitted control text.
struct ParsedFsmState {
    int state = 0;
    bool leaf_a = false;
    int target_a = 0;
    bool leaf_b = false;
    int target_b = 0;
};
std::vector<ParsedFsmState> parse_fsm_states(const std::string& top_text);

// Lower-case identifier derived from arbitrary text (e.g. a file stem).
std::string sanitize_identifier(const std::string& text);

}  // namespace seqsvm
