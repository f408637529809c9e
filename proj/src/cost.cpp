#include "seqsvm/cost.hpp"

#include "seqsvm/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace seqsvm {

namespace {

std::map<std::string, double TechConfig::*> tech_fields()
{
    return {
        {"nand_equiv_area", &TechConfig::nand_equiv_area},
        {"dff_nand_equiv", &TechConfig::dff_nand_equiv},
        {"power_per_area", &TechConfig::power_per_area},
        {"rom_cell_cost", &TechConfig::rom_cell_cost},
        {"adc_cost", &TechConfig::adc_cost},
        {"mux_per_input_cost", &TechConfig::mux_per_input_cost},
        {"data_mux_input_cost", &TechConfig::data_mux_input_cost},
        {"and_cost", &TechConfig::and_cost},
        {"half_adder_cost", &TechConfig::half_adder_cost},
        {"full_adder_cost", &TechConfig::full_adder_cost},
        {"f_clk", &TechConfig::f_clk},
    };
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

void TechConfig::validate() const
{
    for (const auto& [name, field] : tech_fields())
        if (!(this->*field > 0.0) || !std::isfinite(this->*field))
            throw std::invalid_argument("tech coefficient '" + name + "' must be > 0");
}

std::string TechConfig::to_text() const
{
    std::ostringstream os;
    for (const auto& [name, field] : tech_fields())
        os << name << " = " << format_double(this->*field) << '\n';
    return os.str();
}

TechConfig parse_tech_config(const std::string& text)
{
    TechConfig tech;
    const auto fields = tech_fields();
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("tech config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = fields.find(key);
        if (it == fields.end())
            throw std::invalid_argument("tech config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value.size())
            throw std::invalid_argument("tech config line " + std::to_string(line_no) + ": bad number '" + value + "'");
        tech.*(it->second) = v;
    }
    tech.validate();
    return tech;
}

TechConfig load_tech_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open tech config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_tech_config(ss.str());
}

double multiplier_ge(int a_bits, int b_bits, const TechConfig& tech)
{
    // a*b partial-product ANDs, (b-1) rows of a-bit adders
    return a_bits * b_bits * tech.and_cost + a_bits * (b_bits - 1) * tech.full_adder_cost;
}

double adder_ge(int bits, const TechConfig& tech)
{
    return bits * tech.full_adder_cost;
}

double incrementer_ge(int bits, const TechConfig& tech)
{
    return bits * tech.half_adder_cost;
}

namespace {

double storage_ge(const StorageUnit& s, const TechConfig& tech)
{
    if (s.kind() == StorageKind::Rom)
        return static_cast<double>(s.cell_count()) * tech.rom_cell_cost + s.adc_count() * tech.adc_cost;
    // Two-level bespoke select per output bit: a column MUX over the words of
    // every row, then a row MUX over the row results.
    const double leaves = static_cast<double>(s.rows()) * s.words_per_row() + s.rows();
    return s.word_bits() * leaves * tech.mux_per_input_cost;
}

double class_bits(int n_classes)
{
    return std::max(1, ceil_log2(static_cast<std::uint64_t>(n_classes)));
}

void finish(CostReport& r, const TechConfig& tech)
{
    r.area_cm2 = r.ge.total() * tech.nand_equiv_area;
    r.power_mw = tech.power_per_area * r.area_cm2;
    r.f_clk = tech.f_clk;
    r.effective_cycles = r.latency_cycles * static_cast<std::uint64_t>(r.access_slots);
    r.latency_seconds = static_cast<double>(r.effective_cycles) / tech.f_clk;
}

}  // namespace

CostReport estimate(const QuantizedModel& qm, const Ddag& dag, const ArchConfig& arch,
                    const TechConfig& tech)
{
    tech.validate();
    const StorageUnit storage = compile_storage(qm, arch.storage, arch.adc_count);
    const RegisterCensus regs = register_census(qm, dag);
    const int m = static_cast<int>(qm.n_features);
    const int n_states = static_cast<int>(dag.nodes.size());

    CostReport r;
    r.design = "sequential-" + to_string(arch.storage);
    r.ge.storage = storage_ge(storage, tech);
    // multiplier + accumulator adder + counter increment + serial input select
    r.ge.engine = multiplier_ge(qm.param_bits, qm.input_fmt.total_bits, tech) + adder_ge(qm.acc_width, tech) +
                  incrementer_ge(regs.counter, tech) + m * qm.input_fmt.total_bits * tech.data_mux_input_cost;
    // The state id doubles as the row index, so the FSM only needs the two
    // hardwired next states per state, a y-driven 2:1 select, and the class output.
    r.ge.fsm = n_states * 2.0 * dag.state_bits * tech.mux_per_input_cost +
               2.0 * dag.state_bits * tech.data_mux_input_cost +
               n_states * class_bits(qm.n_classes) * tech.mux_per_input_cost;
    r.ge.registers = regs.total() * tech.dff_nand_equiv;
    r.register_bits = regs.total();
    r.latency_cycles = cycles_per_inference(qm.n_classes, qm.n_features);
    r.access_slots = storage.access_slots();
    finish(r, tech);
    return r;
}

StorageComparison compare_storage(const QuantizedModel& qm, const Ddag& dag, const TechConfig& tech,
                                  int adc_count)
{
    return {estimate(qm, dag, {StorageKind::Mux, adc_count}, tech),
            estimate(qm, dag, {StorageKind::Rom, adc_count}, tech)};
}

CostReport compare_parallel(const QuantizedModel& qm, const TechConfig& tech)
{
    tech.validate();
    const int m = static_cast<int>(qm.n_features);
    const int n = qm.n_classes;
    const int vectors = pair_count(n);
    const int vote_bits = std::max(1, ceil_log2(static_cast<std::uint64_t>(n)));

    CostReport r;
    r.design = "parallel";
    // m products plus the bias, summed by an m-adder chain at accumulator width
    r.ge.engine = vectors * (m * multiplier_ge(qm.param_bits, qm.input_fmt.total_bits, tech) +
                             m * adder_ge(qm.acc_width, tech));
    // per-class vote counters, then an argmax chain of comparators with selects
    r.ge.fsm = n * (n - 1) * incrementer_ge(vote_bits, tech) +
               (n - 1) * (adder_ge(vote_bits, tech) + 2.0 * (vote_bits + class_bits(n)) * tech.data_mux_input_cost);
    r.latency_cycles = 1;
    r.access_slots = 1;
    finish(r, tech);
    return r;
}

double calibrate_power(std::span<const AreaPowerPoint> points)
{
    if (points.size() < 2)
        throw std::invalid_argument("power calibration needs at least two points");
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& p : points) {
        if (!(p.area > 0.0) || !(p.power > 0.0))
            throw std::invalid_argument("calibration points need positive area and power");
        sxy += p.area * p.power;
        sxx += p.area * p.area;
    }
    return sxy / sxx;
}

std::string cost_table(std::span<const CostReport> reports)
{
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s %8s %12s\n", "Design", "GE", "Area(cm2)",
                  "Power(mW)", "Cycles", "Slots", "Latency(s)");
    os << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-16s %10.1f %10.3f %10.3f %10llu %8d %12.3f\n", r.design.c_str(),
                      r.ge.total(), r.area_cm2, r.power_mw, static_cast<unsigned long long>(r.latency_cycles),
                      r.access_slots, r.latency_seconds);
        os << line;
    }
    return os.str();
}

}  // namespace seqsvm
