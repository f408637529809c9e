// seqsvm: train a one-vs-one linear SVM and compile it to a sequential
// classifier (Verilog, golden vectors, cost report).
//
//   seqsvm run --dataset data/blobs_c3_f21.csv --seed 7 --out out/blobs
//   seqsvm quantize --out out/blobs
//   seqsvm gen-data --kind rings --classes 10 --features 17 --seed 3 --output rings.csv

#include "seqsvm/pipeline.hpp"
#include "seqsvm/synth.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace seqsvm;

namespace {

constexpr int kUsage = 1;
constexpr int kStageFailure = 2;

struct Flags {
    PipelineConfig cfg;
    std::string storage = "mux";
    std::uint64_t seed = 0;
    std::string dataset;
    std::string tech;
    std::string out = "out";

    std::vector<std::pair<std::string, CLI::Option*>> overridable;

    std::vector<std::string> explicit_keys() const
    {
        std::vector<std::string> keys;
        for (const auto& [key, opt] : overridable)
            if (opt->count() > 0)
                keys.push_back(key);
        return keys;
    }
};

void add_out(CLI::App* sub, Flags& f)
{
    sub->add_option("--out", f.out, "Artifact directory")->capture_default_str();
}

void add_ingest(CLI::App* sub, Flags& f)
{
    sub->add_option("--dataset", f.dataset, "CSV with a header row")->required();
    sub->add_option("--label-col", f.cfg.label_column, "Name of the label column")->capture_default_str();
    sub->add_option("--seed", f.seed, "Seed for split, search and training")->required();
    sub->add_option("--split", f.cfg.split, "Train fraction")->capture_default_str();
    sub->add_option("--budget", f.cfg.budget, "Hyper-parameter candidates")->capture_default_str();
    sub->add_option("--threads", f.cfg.threads, "Training workers (0: all cores)");
}

void add_quant(CLI::App* sub, Flags& f)
{
    f.overridable.emplace_back(
        "input_bits", sub->add_option("--input-bits", f.cfg.input_bits, "Input bits (unsigned, all fraction)")
                          ->capture_default_str());
    f.overridable.emplace_back("max_param_bits",
                               sub->add_option("--max-param-bits", f.cfg.max_param_bits, "Largest weight width tried")
                                   ->capture_default_str());
}

void add_arch(CLI::App* sub, Flags& f)
{
    f.overridable.emplace_back("storage", sub->add_option("--storage", f.storage, "Parameter storage")
                                              ->check(CLI::IsMember({"mux", "rom"}))
                                              ->capture_default_str());
    f.overridable.emplace_back("adc_count", sub->add_option("--adc", f.cfg.arch.adc_count, "ROM read-out ADCs (1..4)")
                                                ->capture_default_str());
}

void add_tech(CLI::App* sub, Flags& f)
{
    sub->add_option("--tech", f.tech, "Technology coefficients (key = value)")->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sequential SVM classifier compiler"};
    app.require_subcommand(1);
    Flags f;

    auto* run_cmd = app.add_subcommand("run", "Every stage: train, quantize, simulate, gen-hdl, cost");
    auto* train_cmd = app.add_subcommand("train", "Ingest, split, search and train the float model");
    auto* quant_cmd = app.add_subcommand("quantize", "Pick weight precision, profile the accumulator");
    auto* sim_cmd = app.add_subcommand("simulate", "Cycle-accurate batch simulation and traces");
    auto* hdl_cmd = app.add_subcommand("gen-hdl", "Emit Verilog and golden vectors");
    auto* cost_cmd = app.add_subcommand("cost", "Area, power and latency estimate");
    auto* cmp_cmd = app.add_subcommand("compare", "OvO vs OvA accuracy, sequential vs parallel cost");
    auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset");

    for (auto* sub : {run_cmd, train_cmd})
        add_ingest(sub, f);
    for (auto* sub : {run_cmd, train_cmd, quant_cmd})
        add_quant(sub, f);
    for (auto* sub : {run_cmd, train_cmd, sim_cmd, hdl_cmd, cost_cmd, cmp_cmd})
        add_arch(sub, f);
    for (auto* sub : {run_cmd, cost_cmd, cmp_cmd})
        add_tech(sub, f);
    for (auto* sub : {run_cmd, train_cmd, quant_cmd, sim_cmd, hdl_cmd, cost_cmd, cmp_cmd})
        add_out(sub, f);
    for (auto* sub : {run_cmd, sim_cmd})
        sub->add_option("--trace", f.cfg.trace_count, "Per-cycle trace files to write")->capture_default_str();
    for (auto* sub : {run_cmd, hdl_cmd})
        sub->add_option("--golden", f.cfg.golden_count, "Golden vectors to emit")->capture_default_str();

    SynthSpec synth;
    std::string synth_kind = "blobs";
    std::string synth_out;
    gen_cmd->add_option("--kind", synth_kind, "blobs | noisy | rings")
        ->check(CLI::IsMember({"blobs", "noisy", "rings"}))
        ->capture_default_str();
    gen_cmd->add_option("--classes", synth.n_classes)->capture_default_str();
    gen_cmd->add_option("--features", synth.n_features)->capture_default_str();
    gen_cmd->add_option("--per-class", synth.samples_per_class)->capture_default_str();
    gen_cmd->add_option("--seed", synth.seed)->required();
    gen_cmd->add_option("--output", synth_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    if (gen_cmd->parsed()) {
        try {
            synth.kind = synth_kind_from_string(synth_kind);
            write_csv(generate_synthetic(synth), synth_out);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kStageFailure;
        }
        return 0;
    }

    PipelineConfig& cfg = f.cfg;
    cfg.out_dir = f.out;
    cfg.tech = f.tech;
    try {
        cfg.arch.storage = storage_kind_from_string(f.storage);
        const bool ingest = run_cmd->parsed() || train_cmd->parsed();
        if (ingest) {
            cfg.dataset = f.dataset;
            cfg.seed = f.seed;
        } else {
            Json record;
            try {
                record = load_record(cfg.out_dir);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kStageFailure;
            }
            apply_record(cfg, record, f.explicit_keys());
        }
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (run_cmd->parsed())
            std::cout << run(cfg);
        else if (train_cmd->parsed())
            stage_train(cfg);
        else if (quant_cmd->parsed())
            stage_quantize(cfg);
        else if (sim_cmd->parsed())
            stage_simulate(cfg);
        else if (hdl_cmd->parsed())
            stage_gen_hdl(cfg);
        else if (cost_cmd->parsed()) {
            stage_cost(cfg);
            std::cout << read_text(cfg.out_dir / artifact::cost_txt);
        } else if (cmp_cmd->parsed())
            std::cout << stage_compare(cfg);
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kStageFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kStageFailure;
    }
    return 0;
}
