#include "seqsvm/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seqsvm {

std::string fnv1a_hex(const std::string& data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json to_json(const Provenance& p)
{
    return Json{{"config_hash", p.config_hash}, {"seed", p.seed}};
}

Provenance provenance_from_json(const Json& j)
{
    return {j.at("config_hash").get<std::string>(), j.at("seed").get<std::uint64_t>()};
}

Json to_json(const Hyper& h)
{
    return Json{{"lambda", h.lambda}, {"epochs", h.epochs}, {"seed", h.seed}};
}

Hyper hyper_from_json(const Json& j)
{
    return {j.at("lambda").get<double>(), j.at("epochs").get<int>(), j.at("seed").get<std::uint64_t>()};
}

Json to_json(const FloatSvmModel& m)
{
    Json vectors = Json::array();
    for (const auto& v : m.vectors) {
        vectors.push_back({{"class_a", v.class_a},
                           {"class_b", v.class_b},
                           {"bias", v.bias},
                           {"weights", v.weights},
                           {"degenerate", v.degenerate},
                           {"train_accuracy", v.train_accuracy}});
    }
    return Json{{"kind", to_string(m.kind)},
                {"n_classes", m.n_classes},
                {"n_features", m.n_features},
                {"vectors", std::move(vectors)}};
}

FloatSvmModel float_model_from_json(const Json& j)
{
    FloatSvmModel m;
    m.kind = multiclass_from_string(j.at("kind").get<std::string>());
    m.n_classes = j.at("n_classes").get<int>();
    m.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& v : j.at("vectors")) {
        FloatVector fv;
        fv.class_a = v.at("class_a").get<int>();
        fv.class_b = v.at("class_b").get<int>();
        fv.bias = v.at("bias").get<double>();
        fv.weights = v.at("weights").get<std::vector<double>>();
        fv.degenerate = v.value("degenerate", false);
        fv.train_accuracy = v.value("train_accuracy", 0.0);
        m.vectors.push_back(std::move(fv));
    }
    m.validate();
    return m;
}

namespace {

Json edge_json(const DdagEdge& e)
{
    return e.leaf ? Json{{"leaf", e.target}} : Json{{"state", e.target}};
}

DdagEdge edge_from_json(const Json& j)
{
    if (j.contains("leaf"))
        return {true, j.at("leaf").get<int>()};
    return {false, j.at("state").get<int>()};
}

}  // namespace

Json to_json(const Ddag& dag)
{
    Json nodes = Json::array();
    for (const auto& nd : dag.nodes) {
        nodes.push_back({{"state", nd.state},
                         {"row", nd.row},
                         {"class_a", nd.class_a},
                         {"class_b", nd.class_b},
                         {"if_a_wins", edge_json(nd.if_a_wins)},
                         {"if_b_wins", edge_json(nd.if_b_wins)}});
    }
    return Json{{"ordering", dag.ordering},
                {"n_classes", dag.n_classes},
                {"initial_state", dag.initial_state},
                {"state_bits", dag.state_bits},
                {"nodes", std::move(nodes)}};
}

Ddag ddag_from_json(const Json& j)
{
    Ddag dag;
    dag.ordering = j.at("ordering").get<std::string>();
    dag.n_classes = j.at("n_classes").get<int>();
    dag.initial_state = j.at("initial_state").get<int>();
    dag.state_bits = j.at("state_bits").get<int>();
    for (const auto& n : j.at("nodes")) {
        DdagNode nd;
        nd.state = n.at("state").get<int>();
        nd.row = n.at("row").get<int>();
        nd.class_a = n.at("class_a").get<int>();
        nd.class_b = n.at("class_b").get<int>();
        nd.if_a_wins = edge_from_json(n.at("if_a_wins"));
        nd.if_b_wins = edge_from_json(n.at("if_b_wins"));
        dag.nodes.push_back(nd);
    }
    dag.validate();
    return dag;
}

Json to_json(const QuantizedModel& qm, const Ddag& dag)
{
    Json norm = Json::array();
    for (const auto& r : qm.normalization)
        norm.push_back({r.min, r.max});
    Json vectors = Json::array();
    for (const auto& v : qm.vectors) {
        vectors.push_back({{"class_a", v.class_a},
                           {"class_b", v.class_b},
                           {"bias", v.bias},
                           {"weights", v.weights},
                           {"scale", v.scale},
                           {"zero", v.zero}});
    }
    return Json{{"n_classes", qm.n_classes},
                {"n_features", qm.n_features},
                {"input_format",
                 {{"total_bits", qm.input_fmt.total_bits},
                  {"frac_bits", qm.input_fmt.frac_bits},
                  {"signed", qm.input_fmt.is_signed}}},
                {"param_bits", qm.param_bits},
                {"bias_shift", qm.bias_shift},
                {"acc_width", qm.acc_width},
                {"counter_bits", qm.counter_bits()},
                {"normalization", std::move(norm)},
                {"vectors", std::move(vectors)},
                {"ddag", to_json(dag)}};
}

QuantizedModel quantized_model_from_json(const Json& j)
{
    QuantizedModel qm;
    qm.n_classes = j.at("n_classes").get<int>();
    qm.n_features = j.at("n_features").get<std::size_t>();
    const auto& f = j.at("input_format");
    qm.input_fmt = {f.at("total_bits").get<int>(), f.at("frac_bits").get<int>(), f.at("signed").get<bool>()};
    qm.param_bits = j.at("param_bits").get<int>();
    qm.bias_shift = j.at("bias_shift").get<int>();
    qm.acc_width = j.at("acc_width").get<int>();
    for (const auto& r : j.at("normalization"))
        qm.normalization.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    for (const auto& v : j.at("vectors")) {
        QuantVector qv;
        qv.class_a = v.at("class_a").get<int>();
        qv.class_b = v.at("class_b").get<int>();
        qv.bias = v.at("bias").get<std::int64_t>();
        qv.weights = v.at("weights").get<std::vector<std::int64_t>>();
        qv.scale = v.value("scale", 1.0);
        qv.zero = v.value("zero", false);
        qm.vectors.push_back(std::move(qv));
    }
    qm.validate();
    return qm;
}

Json to_json(const QuantReport& r)
{
    Json trials = Json::array();
    for (const auto& t : r.trials)
        trials.push_back({{"param_bits", t.param_bits}, {"accuracy", t.accuracy}});
    return Json{{"param_bits", r.param_bits},
                {"float_accuracy", r.float_accuracy},
                {"float_accuracy_exact_inputs", r.float_accuracy_exact_inputs},
                {"quantized_accuracy", r.quantized_accuracy},
                {"accuracy_drop", r.accuracy_drop},
                {"max_precision_flag", r.max_precision_flag},
                {"acc_width", r.acc_width},
                {"acc_min", r.acc_min},
                {"acc_max", r.acc_max},
                {"trials", std::move(trials)}};
}

Json to_json(const SimTrace& t)
{
    Json records = Json::array();
    for (const auto& r : t.records) {
        records.push_back({{"cycle", r.cycle},
                           {"fsm_state", r.fsm_state},
                           {"counter", r.counter},
                           {"row", r.row},
                           {"col", r.col},
                           {"word", r.word},
                           {"input", r.input},
                           {"acc", r.acc},
                           {"ready", r.ready},
                           {"y", r.y},
                           {"overflow", r.overflow}});
    }
    return Json{{"cycles", t.cycles},
                {"evaluations", t.evaluations},
                {"overflows", t.overflows},
                {"records", std::move(records)}};
}

Json to_json(const BatchResult& b)
{
    return Json{{"accuracy", b.accuracy},
                {"samples", b.predictions.size()},
                {"overflow_samples", b.overflow_samples},
                {"overflow_events", b.overflow_events},
                {"mean_cycles", b.mean_cycles}};
}

Json to_json(const CostReport& r)
{
    return Json{{"design", r.design},
                {"gate_equivalents",
                 {{"storage", r.ge.storage},
                  {"engine", r.ge.engine},
                  {"fsm", r.ge.fsm},
                  {"registers", r.ge.registers},
                  {"total", r.ge.total()}}},
                {"area_cm2", r.area_cm2},
                {"power_mw", r.power_mw},
                {"latency_cycles", r.latency_cycles},
                {"access_slots", r.access_slots},
                {"effective_cycles", r.effective_cycles},
                {"latency_seconds", r.latency_seconds},
                {"register_bits", r.register_bits},
                {"f_clk", r.f_clk}};
}

std::string dump(const Json& j)
{
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const std::filesystem::path& path)
{
    try {
        return Json::parse(read_text(path));
    } catch (const Json::exception& e) {
        throw std::runtime_error("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

}  // namespace seqsvm
