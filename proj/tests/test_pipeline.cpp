#include "seqsvm/pipeline.hpp"

#include "seqsvm/ddag.hpp"
#include "seqsvm/quant.hpp"

#include "support.hpp"

#include <doctest.h>

#include <fstream>

namespace fs = std::filesystem;
using namespace seqsvm;

namespace {

const fs::path kData = fs::path(SEQSVM_SOURCE_DIR) / "data";

PipelineConfig config(const std::string& dataset, const fs::path& out, std::uint64_t seed = 7)
{
    PipelineConfig cfg;
    cfg.dataset = kData / dataset;
    cfg.out_dir = out;
    cfg.seed = seed;
    cfg.trace_count = 2;
    cfg.golden_count = 50;
    return cfg;
}

// Every regular file under dir, relative path -> contents.
std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            out[fs::relative(e.path(), dir).string()] = read_text(e.path());
    return out;
}

}  // namespace

TEST_CASE("end-to-end run writes every artifact")
{
    const auto out = testing::temp_dir("pipe_e2e");
    const PipelineConfig cfg = config("blobs_c3_f21.csv", out);
    const std::string table = run(cfg);
    CHECK(table.find("blobs_c3_f21.csv") != std::string::npos);

    for (const char* name : {artifact::train_csv, artifact::test_csv, artifact::float_model, artifact::model,
                             artifact::quant_report, artifact::sim_report, artifact::stim, artifact::expect,
                             artifact::cost_json, artifact::cost_txt, artifact::summary})
        CHECK_MESSAGE(fs::exists(out / name), name);
    for (const char* name : {"blobs_c3_f21_top.v", "blobs_c3_f21_storage.v", "blobs_c3_f21_tb.v"})
        CHECK(fs::exists(out / artifact::hdl / name));
    CHECK(fs::exists(out / artifact::traces / "trace_0000.txt"));
    CHECK(fs::exists(out / artifact::traces / "trace_0001.txt"));
    CHECK(!fs::exists(out / artifact::traces / "trace_0002.txt"));

    const Json model = read_json(out / artifact::model);
    CHECK(model.at("n_classes").get<int>() == 3);
    CHECK(model.at("n_features").get<int>() == 21);
    const Json sim = read_json(out / artifact::sim_report);
    CHECK(sim.at("cycles_per_inference").get<int>() == 44);
    CHECK(sim.at("reference_agreement").get<std::size_t>() == read_json(out / artifact::float_model).at("test_samples").get<std::size_t>());
    const Json cost = read_json(out / artifact::cost_json);
    CHECK(cost.at("selected").at("latency_cycles").get<int>() == 44);
    CHECK(cost.at("selected").at("register_bits").get<int>() ==
          model.at("acc_width").get<int>() + 5 + 2);  // ceil(log2 23), ceil(log2 3)
}

TEST_CASE("every artifact carries the config hash and seed")
{
    const auto out = testing::temp_dir("pipe_prov");
    const PipelineConfig cfg = config("blobs_c3_f21.csv", out, 1234);
    run(cfg);
    const Json record = load_record(out);
    const Provenance prov = provenance_of(record);
    CHECK(prov.seed == 1234);
    CHECK(prov.config_hash.size() == 16);
    CHECK(record.at("dataset_digest").get<std::string>() == file_digest(cfg.dataset));

    for (const auto& [name, text] : snapshot(out)) {
        if (name.ends_with(".csv"))
            continue;  // plain data tables
        if (name.ends_with(".json")) {
            const Json j = Json::parse(text);
            CHECK_MESSAGE(provenance_from_json(j.at("provenance")) == prov, name);
        } else {
            CHECK_MESSAGE(text.find("config " + prov.config_hash + ", seed 1234") != std::string::npos, name);
        }
    }
}

TEST_CASE("rerun with the same seed is byte-identical")
{
    const auto a = testing::temp_dir("pipe_det_a");
    const auto b = testing::temp_dir("pipe_det_b");
    run(config("rings_c10_f17.csv", a));
    run(config("rings_c10_f17.csv", b));
    const auto sa = snapshot(a);
    const auto sb = snapshot(b);
    CHECK(sa.size() == sb.size());
    for (const auto& [name, text] : sa) {
        REQUIRE_MESSAGE(sb.count(name), name);
        CHECK_MESSAGE(sb.at(name) == text, name);
    }

    // a different seed changes the provenance
    const auto c = testing::temp_dir("pipe_det_c");
    run(config("rings_c10_f17.csv", c, 8));
    CHECK(read_text(c / artifact::model) != sa.at(artifact::model));
}

TEST_CASE("stages run separately equal the one-shot run")
{
    const auto once = testing::temp_dir("pipe_once");
    const auto staged = testing::temp_dir("pipe_staged");
    run(config("noisy_c6_f11.csv", once));
    const PipelineConfig cfg = config("noisy_c6_f11.csv", staged);
    stage_train(cfg);
    stage_quantize(cfg);
    stage_simulate(cfg);
    stage_gen_hdl(cfg);
    stage_cost(cfg);
    write_text(staged / artifact::summary, summary_table(cfg));
    CHECK(snapshot(once) == snapshot(staged));
}

TEST_CASE("quantize stage reproduces the precision search")
{
    const auto out = testing::temp_dir("pipe_quant");
    const PipelineConfig cfg = config("noisy_c6_f33.csv", out);
    stage_train(cfg);
    stage_quantize(cfg);

    const Json fdoc = read_json(out / artifact::float_model);
    const int n = fdoc.at("n_classes").get<int>();
    Dataset train = load_indexed_csv(out / artifact::train_csv, "label", n);
    Dataset test = load_indexed_csv(out / artifact::test_csv, "label", n);
    const FloatSvmModel model = float_model_from_json(fdoc.at("model"));
    const auto [qm, report] = search_param_bits(model, train, test, FxpFormat::unsigned_fmt(4, 4), 8);

    const Json saved = read_json(out / artifact::model);
    CHECK(saved.at("param_bits").get<int>() == qm.param_bits);
    CHECK(saved.at("acc_width").get<int>() == qm.acc_width);
    const QuantizedModel back = quantized_model_from_json(saved);
    REQUIRE(back.vectors.size() == qm.vectors.size());
    for (std::size_t r = 0; r < qm.vectors.size(); ++r) {
        CHECK(back.vectors[r].weights == qm.vectors[r].weights);
        CHECK(back.vectors[r].bias == qm.vectors[r].bias);
    }
    const Json rep = read_json(out / artifact::quant_report);
    CHECK(rep.at("quantized_accuracy").get<double>() == report.quantized_accuracy);
    CHECK(rep.at("float_accuracy").get<double>() == report.float_accuracy);
    CHECK((rep.at("accuracy_drop").get<double>() <= 0.005 + 1e-12 || rep.at("max_precision_flag").get<bool>()));
}

TEST_CASE("stage failures name the stage")
{
    const auto out = testing::temp_dir("pipe_fail");
    PipelineConfig cfg = config("does_not_exist.csv", out);
    try {
        run(cfg);
        FAIL("expected a stage failure");
    } catch (const StageError& e) {
        CHECK(e.stage() == "ingest");
        CHECK(std::string(e.what()).find("does_not_exist.csv") != std::string::npos);
    }

    std::ofstream(out / "bad.csv") << "a,b,label\n1,x,0\n";
    cfg.dataset = out / "bad.csv";
    try {
        stage_train(cfg);
        FAIL("expected a stage failure");
    } catch (const StageError& e) {
        CHECK(e.stage() == "ingest");
    }

    // downstream stages without upstream artifacts
    const auto empty = testing::temp_dir("pipe_fail_empty");
    cfg.out_dir = empty;
    try {
        stage_quantize(cfg);
        FAIL("expected a stage failure");
    } catch (const StageError& e) {
        CHECK(e.stage() == "quantize");
    }
}

TEST_CASE("config validation")
{
    PipelineConfig cfg;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // no seed
    cfg.seed = 1;
    CHECK_NOTHROW(cfg.validate());
    for (double s : {0.0, 1.0, -0.2})
        CHECK_THROWS_AS([&] { auto c = cfg; c.split = s; c.validate(); }(), std::invalid_argument);
    CHECK_THROWS_AS([&] { auto c = cfg; c.arch.adc_count = 5; c.validate(); }(), std::invalid_argument);
    CHECK_THROWS_AS([&] { auto c = cfg; c.max_param_bits = 1; c.validate(); }(), std::invalid_argument);
    CHECK_THROWS_AS([&] { auto c = cfg; c.budget = 0; c.validate(); }(), std::invalid_argument);
}

TEST_CASE("stored record overlays everything but explicit flags")
{
    PipelineConfig trained;
    trained.dataset = "x.csv";
    trained.seed = 5;
    trained.input_bits = 4;
    trained.max_param_bits = 6;
    trained.arch.storage = StorageKind::Rom;
    trained.arch.adc_count = 2;
    const Json record = config_record(trained, "d");

    PipelineConfig cfg;
    apply_record(cfg, record, {});
    CHECK(cfg.seed == 5u);
    CHECK(cfg.max_param_bits == 6);
    CHECK(cfg.arch.storage == StorageKind::Rom);
    CHECK(cfg.arch.adc_count == 2);
    CHECK(provenance_of(config_record(cfg, "d")) == provenance_of(record));

    PipelineConfig over;
    over.arch.storage = StorageKind::Mux;
    apply_record(over, record, {"storage"});
    CHECK(over.arch.storage == StorageKind::Mux);
    CHECK(over.arch.adc_count == 2);
    CHECK(provenance_of(config_record(over, "d")) != provenance_of(record));
}
