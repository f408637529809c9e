#pragma once

#include "seqsvm/archsim.hpp"
#include "seqsvm/ddag.hpp"
#include "seqsvm/quant.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace seqsvm {

// Technology coefficients. Gate costs are in NAND2-equivalents (GE); area is
// GE * nand_equiv_area. Absolute areas depend on nand_equiv_area, which is a
// calibration constant; relative comparisons do not.
struct TechConfig {
    double nand_equiv_area = 1.74e-3;  // cm^2 per GE
    double dff_nand_equiv = 6.0;       // one D flip-flop
    double power_per_area = 1.13;      // mW per cm^2 (static-power dominated)
    double rom_cell_cost = 0.4;        // one 2-bit crossbar dot
    double adc_cost = 100.0;           // one 2-bit ADC
    double mux_per_input_cost = 0.5;   // one hardwired-constant leaf of a bespoke MUX, per bit
    double data_mux_input_cost = 1.2;  // one data input of a MUX, per bit
    double and_cost = 1.5;
    double half_adder_cost = 4.0;
    double full_adder_cost = 9.0;
    double f_clk = 15.0;               // Hz

    void validate() const;
    std::string to_text() const;  // key = value lines, loadable by parse_tech_config
};

TechConfig parse_tech_config(const std::string& text);
TechConfig load_tech_config(const std::filesystem::path& path);

// Textbook gate-equivalent counts.
double multiplier_ge(int a_bits, int b_bits, const TechConfig& tech);  // array multiplier
double adder_ge(int bits, const TechConfig& tech);                     // ripple-carry
double incrementer_ge(int bits, const TechConfig& tech);               // half-adder chain

struct BlockCost {
    double storage = 0.0;
    double engine = 0.0;
    double fsm = 0.0;
    double registers = 0.0;
    double total() const { return storage + engine + fsm + registers; }
};

struct CostReport {
    std::string design;  // "sequential-mux", "sequential-rom", "parallel"
    BlockCost ge;
    double area_cm2 = 0.0;
    double power_mw = 0.0;
    std::uint64_t latency_cycles = 0;
    int access_slots = 1;
    std::uint64_t effective_cycles = 0;
    double latency_seconds = 0.0;
    int register_bits = 0;
    double f_clk = 0.0;
};

// Sequential design: storage + single-MAC engine + DDAG FSM + registers.
CostReport estimate(const QuantizedModel& qm, const Ddag& dag, const ArchConfig& arch,
                    const TechConfig& tech);

struct StorageComparison {
    CostReport mux;
    CostReport rom;
};

StorageComparison compare_storage(const QuantizedModel& qm, const Ddag& dag, const TechConfig& tech,
                                  int adc_count = 4);

// Fully parallel bespoke baseline: every vector gets m multipliers and an adder
// chain, followed by an OvO vote counter and argmax. Parameters are hardwired.
CostReport compare_parallel(const QuantizedModel& qm, const TechConfig& tech);

struct AreaPowerPoint {
    double area = 0.0;
    double power = 0.0;
};

// Least-squares slope through the origin of power against area.
double calibrate_power(std::span<const AreaPowerPoint> points);

// Fixed-width text table: design, GE, area, power, cycles, latency.
std::string cost_table(std::span<const CostReport> reports);

}  // namespace seqsvm
