#include "seqsvm/pipeline.hpp"

#include "seqsvm/cost.hpp"
#include "seqsvm/ddag.hpp"
#include "seqsvm/hdlgen.hpp"
#include "seqsvm/quant.hpp"
#include "seqsvm/rng.hpp"
#include "seqsvm/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace seqsvm {

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kHoldoutStream = 2;
constexpr std::uint64_t kSearchStream = 3;

unsigned worker_count(const PipelineConfig& cfg)
{
    if (cfg.threads > 0)
        return cfg.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f and rethrows anything but StageError as a failure of `stage`.
template <typename F>
auto in_stage(const std::string& stage, F&& f)
{
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

Json document(const std::string& format, const Provenance& prov)
{
    return Json{{"format", format}, {"provenance", to_json(prov)}};
}

void merge(Json& into, const Json& from)
{
    for (const auto& [k, v] : from.items())
        into[k] = v;
}

Json ranges_json(const std::vector<FeatureRange>& ranges)
{
    Json out = Json::array();
    for (const auto& r : ranges)
        out.push_back({r.min, r.max});
    return out;
}

std::vector<FeatureRange> ranges_from_json(const Json& j)
{
    std::vector<FeatureRange> out;
    for (const auto& r : j)
        out.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    return out;
}

Json require(const fs::path& path, const std::string& produced_by)
{
    if (!fs::exists(path))
        throw std::runtime_error("missing '" + path.string() + "' (run '" + produced_by + "' first)");
    return read_json(path);
}

// Stored record + the effective options of this stage.
struct StageContext {
    Json record;
    Provenance prov;
};

StageContext context(const PipelineConfig& cfg)
{
    const Json stored = load_record(cfg.out_dir);
    StageContext ctx;
    ctx.record = config_record(cfg, stored.at("dataset_digest").get<std::string>());
    ctx.prov = provenance_of(ctx.record);
    return ctx;
}

Dataset load_split(const PipelineConfig& cfg, const char* name, const Json& float_doc)
{
    Dataset ds = load_indexed_csv(cfg.out_dir / name, cfg.label_column, float_doc.at("n_classes").get<int>());
    ds.class_names = float_doc.at("class_names").get<std::vector<std::string>>();
    ds.normalization = ranges_from_json(float_doc.at("normalization"));
    ds.validate();
    return ds;
}

struct LoadedModel {
    QuantizedModel qm;
    Ddag dag;
    Json doc;
};

LoadedModel load_model(const PipelineConfig& cfg)
{
    LoadedModel lm;
    lm.doc = require(cfg.out_dir / artifact::model, "quantize");
    lm.qm = quantized_model_from_json(lm.doc);
    lm.dag = ddag_from_json(lm.doc.at("ddag"));
    return lm;
}

std::string module_name(const PipelineConfig& cfg)
{
    return sanitize_identifier(cfg.dataset.stem().string());
}

std::string banner(const Provenance& prov)
{
    return "seqsvm: config " + prov.config_hash + ", seed " + std::to_string(prov.seed);
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

void PipelineConfig::validate() const
{
    if (!(split > 0.0 && split < 1.0))
        throw std::invalid_argument("--split must lie strictly between 0 and 1");
    if (budget < 1)
        throw std::invalid_argument("--budget must be >= 1");
    if (input_bits < 1 || input_bits > 16)
        throw std::invalid_argument("--input-bits must be in 1..16");
    if (max_param_bits < 2 || max_param_bits > 32)
        throw std::invalid_argument("--max-param-bits must be in 2..32");
    if (arch.adc_count < 1 || arch.adc_count > 4)
        throw std::invalid_argument("--adc must be in 1..4");
    if (trace_count < 0)
        throw std::invalid_argument("--trace must be >= 0");
    if (!seed)
        throw std::invalid_argument("a seed is required (--seed)");
    if (label_column.empty())
        throw std::invalid_argument("--label-col must not be empty");
}

Json config_record(const PipelineConfig& cfg, const std::string& dataset_digest)
{
    return Json{{"dataset", cfg.dataset.filename().string()},
                {"dataset_digest", dataset_digest},
                {"label_column", cfg.label_column},
                {"split", cfg.split},
                {"budget", cfg.budget},
                {"input_bits", cfg.input_bits},
                {"max_param_bits", cfg.max_param_bits},
                {"storage", to_string(cfg.arch.storage)},
                {"adc_count", cfg.arch.adc_count},
                {"seed", cfg.seed.value_or(0)}};
}

Provenance provenance_of(const Json& record)
{
    return {fnv1a_hex(record.dump()), record.at("seed").get<std::uint64_t>()};
}

void apply_record(PipelineConfig& cfg, const Json& record, const std::vector<std::string>& explicit_keys)
{
    const auto given = [&](const char* key) {
        return std::find(explicit_keys.begin(), explicit_keys.end(), key) != explicit_keys.end();
    };
    // identity of the trained model always comes from the record
    cfg.dataset = record.at("dataset").get<std::string>();
    cfg.label_column = record.at("label_column").get<std::string>();
    cfg.split = record.at("split").get<double>();
    cfg.budget = record.at("budget").get<int>();
    cfg.seed = record.at("seed").get<std::uint64_t>();
    if (!given("input_bits"))
        cfg.input_bits = record.at("input_bits").get<int>();
    if (!given("max_param_bits"))
        cfg.max_param_bits = record.at("max_param_bits").get<int>();
    if (!given("storage"))
        cfg.arch.storage = storage_kind_from_string(record.at("storage").get<std::string>());
    if (!given("adc_count"))
        cfg.arch.adc_count = record.at("adc_count").get<int>();
}

Json load_record(const fs::path& out_dir)
{
    return require(out_dir / artifact::float_model, "train").at("config");
}

std::string file_digest(const fs::path& path)
{
    return fnv1a_hex(read_text(path));
}

void stage_train(const PipelineConfig& cfg)
{
    const std::uint64_t seed = cfg.seed.value();
    auto [raw, digest] = in_stage("ingest", [&] {
        if (!fs::exists(cfg.dataset))
            throw std::runtime_error("dataset '" + cfg.dataset.string() + "' not found");
        Dataset ds = load_csv(cfg.dataset, cfg.label_column);
        ds.validate();
        return std::pair{std::move(ds), file_digest(cfg.dataset)};
    });
    const Json record = config_record(cfg, digest);
    const Provenance prov = provenance_of(record);

    in_stage("train", [&] {
        SplitResult outer = split(raw, {cfg.split, derive_seed(seed, kSplitStream)});
        SplitResult inner = split(outer.train, {0.8, derive_seed(seed, kHoldoutStream), false});
        const unsigned threads = worker_count(cfg);
        const SearchResult search =
            random_search(inner.train, inner.test, {}, cfg.budget, derive_seed(seed, kSearchStream), threads);
        const FloatSvmModel model = train_ovo(outer.train, search.best, threads);

        fs::create_directories(cfg.out_dir);
        write_csv(outer.train, cfg.out_dir / artifact::train_csv, cfg.label_column);
        write_csv(outer.test, cfg.out_dir / artifact::test_csv, cfg.label_column);

        Json doc = document("seqsvm-float-model", prov);
        doc["config"] = record;
        doc["n_classes"] = model.n_classes;
        doc["class_names"] = raw.class_names;
        doc["feature_names"] = raw.feature_names;
        doc["normalization"] = ranges_json(outer.train.normalization);
        doc["stratified_split"] = outer.stratified;
        doc["train_samples"] = outer.train.size();
        doc["test_samples"] = outer.test.size();
        doc["hyper"] = to_json(search.best);
        doc["search"] = {{"budget", cfg.budget},
                         {"holdout_accuracy", search.best_accuracy},
                         {"holdout_samples", inner.test.size()}};
        doc["train_accuracy"] = accuracy(model, outer.train);
        doc["test_accuracy"] = accuracy(model, outer.test);
        doc["model"] = to_json(model);
        write_text(cfg.out_dir / artifact::float_model, dump(doc));
        return 0;
    });
}

void stage_quantize(const PipelineConfig& cfg)
{
    in_stage("quantize", [&] {
        const StageContext ctx = context(cfg);
        const Json fdoc = read_json(cfg.out_dir / artifact::float_model);
        const FloatSvmModel model = float_model_from_json(fdoc.at("model"));
        const Dataset train = load_split(cfg, artifact::train_csv, fdoc);
        const Dataset test = load_split(cfg, artifact::test_csv, fdoc);

        auto [qm, report] = search_param_bits(model, train, test, cfg.input_format(), cfg.max_param_bits);
        const Ddag dag = build_ddag(qm.n_classes);

        Json mdoc = document("seqsvm-model", ctx.prov);
        mdoc["class_names"] = fdoc.at("class_names");
        merge(mdoc, to_json(qm, dag));
        write_text(cfg.out_dir / artifact::model, dump(mdoc));

        Json rdoc = document("seqsvm-quant-report", ctx.prov);
        rdoc["max_accuracy_drop"] = kMaxAccuracyDrop;
        merge(rdoc, to_json(report));
        write_text(cfg.out_dir / artifact::quant_report, dump(rdoc));
        return 0;
    });
}

void stage_simulate(const PipelineConfig& cfg)
{
    in_stage("simulate", [&] {
        const StageContext ctx = context(cfg);
        const LoadedModel lm = load_model(cfg);
        const Json fdoc = read_json(cfg.out_dir / artifact::float_model);
        const Dataset test = load_split(cfg, artifact::test_csv, fdoc);
        const CodeMatrix codes = quantize_inputs(test, lm.qm.input_fmt);
        const StorageUnit storage = compile_storage(lm.qm, cfg.arch.storage, cfg.arch.adc_count);

        const BatchResult batch = simulate_batch(lm.qm, lm.dag, storage, codes, test.labels);
        std::size_t agree = 0;
        for (std::size_t i = 0; i < codes.size(); ++i)
            agree += batch.predictions[i] == ddag_infer(lm.qm, lm.dag, codes[i]).predicted;

        const fs::path trace_dir = cfg.out_dir / artifact::traces;
        fs::remove_all(trace_dir);
        const std::size_t n_traces = std::min(static_cast<std::size_t>(cfg.trace_count), codes.size());
        for (std::size_t i = 0; i < n_traces; ++i) {
            const SimResult r = simulate(lm.qm, lm.dag, storage, codes[i], true);
            char name[32];
            std::snprintf(name, sizeof name, "trace_%04zu.txt", i);
            write_text(trace_dir / name, "# " + banner(ctx.prov) + "\n# sample " + std::to_string(i) +
                                             ", label " + std::to_string(test.labels[i]) + "\n" +
                                             trace_to_text(r.trace));
        }

        Json doc = document("seqsvm-sim-report", ctx.prov);
        doc["storage"] = to_string(cfg.arch.storage);
        doc["adc_count"] = cfg.arch.adc_count;
        doc["access_slots"] = storage.access_slots();
        doc["cycles_per_inference"] = cycles_per_inference(lm.qm.n_classes, lm.qm.n_features);
        merge(doc, to_json(batch));
        doc["reference_agreement"] = agree;
        doc["traces"] = n_traces;
        write_text(cfg.out_dir / artifact::sim_report, dump(doc));
        return 0;
    });
}

void stage_gen_hdl(const PipelineConfig& cfg)
{
    in_stage("gen-hdl", [&] {
        const StageContext ctx = context(cfg);
        const LoadedModel lm = load_model(cfg);
        const Json fdoc = read_json(cfg.out_dir / artifact::float_model);
        const Dataset test = load_split(cfg, artifact::test_csv, fdoc);
        const CodeMatrix codes = quantize_inputs(test, lm.qm.input_fmt);
        const StorageUnit storage = compile_storage(lm.qm, cfg.arch.storage, cfg.arch.adc_count);

        const std::string text = banner(ctx.prov);
        const HdlBundle bundle = generate(lm.qm, lm.dag, cfg.arch, {module_name(cfg), text});
        const fs::path dir = cfg.out_dir / artifact::hdl;
        fs::remove_all(dir);
        write_text(dir / (bundle.module_name + "_top.v"), bundle.top_text);
        write_text(dir / (bundle.module_name + "_storage.v"), bundle.storage_text);
        write_text(dir / (bundle.module_name + "_tb.v"), bundle.testbench_text);

        const GoldenFiles golden =
            emit_golden_vectors(lm.qm, lm.dag, storage, codes, std::min(cfg.golden_count, codes.size()), text);
        write_text(cfg.out_dir / artifact::stim, golden.stim);
        write_text(cfg.out_dir / artifact::expect, golden.expect);
        return 0;
    });
}

void stage_cost(const PipelineConfig& cfg)
{
    in_stage("cost", [&] {
        const StageContext ctx = context(cfg);
        const TechConfig tech = cfg.tech.empty() ? TechConfig{} : load_tech_config(cfg.tech);
        const LoadedModel lm = load_model(cfg);

        const CostReport selected = estimate(lm.qm, lm.dag, cfg.arch, tech);
        const StorageComparison both = compare_storage(lm.qm, lm.dag, tech, cfg.arch.adc_count);
        const CostReport parallel = compare_parallel(lm.qm, tech);

        Json tech_json = Json::object();
        std::istringstream lines(tech.to_text());
        for (std::string line; std::getline(lines, line);) {
            const auto eq = line.find(" = ");
            tech_json[line.substr(0, eq)] = std::stod(line.substr(eq + 3));
        }

        Json doc = document("seqsvm-cost-report", ctx.prov);
        doc["tech"] = tech_json;
        doc["storage"] = to_string(cfg.arch.storage);
        doc["adc_count"] = cfg.arch.adc_count;
        doc["selected"] = to_json(selected);
        doc["mux"] = to_json(both.mux);
        doc["rom"] = to_json(both.rom);
        doc["parallel"] = to_json(parallel);
        doc["parallel_area_ratio"] = parallel.area_cm2 / selected.area_cm2;
        write_text(cfg.out_dir / artifact::cost_json, dump(doc));

        const CostReport rows[] = {both.mux, both.rom, parallel};
        write_text(cfg.out_dir / artifact::cost_txt, "# " + banner(ctx.prov) + "\n" + cost_table(rows));
        return 0;
    });
}

std::string stage_compare(const PipelineConfig& cfg)
{
    return in_stage("compare", [&] {
        const StageContext ctx = context(cfg);
        const Json fdoc = read_json(cfg.out_dir / artifact::float_model);
        const FloatSvmModel ovo = float_model_from_json(fdoc.at("model"));
        const Hyper hyper = hyper_from_json(fdoc.at("hyper"));
        const Dataset train = load_split(cfg, artifact::train_csv, fdoc);
        const Dataset test = load_split(cfg, artifact::test_csv, fdoc);
        const FloatSvmModel ova = train_ova(train, hyper, worker_count(cfg));
        const Ddag dag = build_ddag(ovo.n_classes);

        std::ostringstream os;
        os << "# " << banner(ctx.prov) << "\n";
        char line[160];
        std::snprintf(line, sizeof line, "%-14s %8s %10s %10s\n", "Multiclass", "Vectors", "Train", "Test");
        os << line;
        const auto row = [&](const char* name, std::size_t vectors, double tr, double te) {
            std::snprintf(line, sizeof line, "%-14s %8zu %10.4f %10.4f\n", name, vectors, tr, te);
            os << line;
        };
        row("ovo-vote", ovo.vectors.size(), accuracy(ovo, train), accuracy(ovo, test));
        row("ovo-ddag", ovo.vectors.size(),
            accuracy(train, [&](std::size_t i) { return ddag_infer_float(ovo, dag, train.row(i)); }),
            accuracy(test, [&](std::size_t i) { return ddag_infer_float(ovo, dag, test.row(i)); }));
        row("ova", ova.vectors.size(), accuracy(ova, train), accuracy(ova, test));

        const TechConfig tech = cfg.tech.empty() ? TechConfig{} : load_tech_config(cfg.tech);
        const LoadedModel lm = load_model(cfg);
        const StorageComparison both = compare_storage(lm.qm, lm.dag, tech, cfg.arch.adc_count);
        const CostReport parallel = compare_parallel(lm.qm, tech);
        const CostReport rows[] = {both.mux, both.rom, parallel};
        os << "\n" << cost_table(rows);
        const CostReport& seq = cfg.arch.storage == StorageKind::Rom ? both.rom : both.mux;
        os << "parallel/sequential area: " << fmt("%.2f", parallel.area_cm2 / seq.area_cm2) << "x\n";

        const std::string text = os.str();
        write_text(cfg.out_dir / artifact::compare_txt, text);
        return text;
    });
}

std::string summary_table(const PipelineConfig& cfg)
{
    return in_stage("summary", [&] {
        const Json q = require(cfg.out_dir / artifact::quant_report, "quantize");
        const Json m = require(cfg.out_dir / artifact::model, "quantize");
        const Json s = require(cfg.out_dir / artifact::sim_report, "simulate");
        const Json c = require(cfg.out_dir / artifact::cost_json, "cost");
        const Json& sel = c.at("selected");

        char line[256];
        std::ostringstream os;
        os << "# " << banner(context(cfg).prov) << "\n";
        std::snprintf(line, sizeof line, "%-20s %3s %4s %4s %4s %9s %9s %9s %10s %10s %7s %10s\n", "Dataset", "n",
                      "m", "Bits", "AccW", "AccFloat", "AccQuant", "AccSim", "Area(cm2)", "Power(mW)", "Cycles",
                      "Latency(s)");
        os << line;
        std::snprintf(line, sizeof line, "%-20s %3d %4d %4d %4d %9.4f %9.4f %9.4f %10.3f %10.3f %7llu %10.3f\n",
                      cfg.dataset.filename().string().c_str(), m.at("n_classes").get<int>(),
                      m.at("n_features").get<int>(), q.at("param_bits").get<int>(), m.at("acc_width").get<int>(),
                      q.at("float_accuracy").get<double>(), q.at("quantized_accuracy").get<double>(),
                      s.at("accuracy").get<double>(), sel.at("area_cm2").get<double>(),
                      sel.at("power_mw").get<double>(),
                      static_cast<unsigned long long>(sel.at("latency_cycles").get<std::uint64_t>()),
                      sel.at("latency_seconds").get<double>());
        os << line;
        if (q.at("max_precision_flag").get<bool>())
            os << "note: no precision up to " << cfg.max_param_bits
               << " bits met the accuracy budget; using the maximum\n";
        return os.str();
    });
}

std::string run(const PipelineConfig& cfg)
{
    stage_train(cfg);
    stage_quantize(cfg);
    stage_simulate(cfg);
    stage_gen_hdl(cfg);
    stage_cost(cfg);
    const std::string table = summary_table(cfg);
    write_text(cfg.out_dir / artifact::summary, table);
    return table;
}

}  // namespace seqsvm
