#pragma once

#include "seqsvm/archsim.hpp"
#include "seqsvm/dataset.hpp"
#include "seqsvm/fxp.hpp"
#include "seqsvm/serialize.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace seqsvm {

// A failure inside one pipeline stage; `stage` is e.g. "ingest" or "quantize".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage))
    {
    }
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PipelineConfig {
    std::filesystem::path dataset;
    std::string label_column = "label";
    double split = 0.8;
    int budget = 20;
    int input_bits = 4;
    int max_param_bits = 8;
    ArchConfig arch;
    std::filesystem::path tech;  // empty: built-in coefficients
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed;
    int trace_count = 1;
    std::size_t golden_count = 100;
    unsigned threads = 0;  // 0: hardware concurrency

    FxpFormat input_format() const { return FxpFormat::unsigned_fmt(input_bits, input_bits); }

    // Throws std::invalid_argument on bad values (usage errors).
    void validate() const;
};

// Options that shape the produced artifacts, as stored in float_model.json.
// The output directory, trace count and tech file are deliberately absent.
Json config_record(const PipelineConfig& cfg, const std::string& dataset_digest);
Provenance provenance_of(const Json& record);

// Overlays the stored record onto cfg for every option the caller did not set
// explicitly (`explicit_keys` names record keys given on the command line).
void apply_record(PipelineConfig& cfg, const Json& record, const std::vector<std::string>& explicit_keys);

// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* train_csv = "train.csv";
inline constexpr const char* test_csv = "test.csv";
inline constexpr const char* float_model = "float_model.json";
inline constexpr const char* model = "model.json";
inline constexpr const char* quant_report = "quant_report.json";
inline constexpr const char* sim_report = "sim_report.json";
inline constexpr const char* traces = "traces";
inline constexpr const char* hdl = "hdl";
inline constexpr const char* stim = "vectors.stim";
inline constexpr const char* expect = "vectors.expect";
inline constexpr const char* cost_json = "cost_report.json";
inline constexpr const char* cost_txt = "cost_report.txt";
inline constexpr const char* compare_txt = "compare.txt";
inline constexpr const char* summary = "summary.txt";
}  // namespace artifact

// Stages. Each reads its inputs from cfg.out_dir (the first also reads
// cfg.dataset), writes its artifacts there, and throws StageError.
void stage_train(const PipelineConfig& cfg);     // ingest + split + search + train
void stage_quantize(const PipelineConfig& cfg);  // precision search, profiling, DDAG
void stage_simulate(const PipelineConfig& cfg);  // batch simulation + cfg.trace_count traces
void stage_gen_hdl(const PipelineConfig& cfg);   // Verilog bundle + golden vectors
void stage_cost(const PipelineConfig& cfg);      // cost report
std::string stage_compare(const PipelineConfig& cfg);  // OvO/OvA and sequential/parallel tables
std::string summary_table(const PipelineConfig& cfg);  // from the written reports

// Every stage in order; returns the summary table (also written to summary.txt).
std::string run(const PipelineConfig& cfg);

// Reads the stored record from float_model.json in cfg.out_dir.
Json load_record(const std::filesystem::path& out_dir);

std::string file_digest(const std::filesystem::path& path);

}  // namespace seqsvm
