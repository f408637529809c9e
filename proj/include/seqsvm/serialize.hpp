#pragma once

#include "seqsvm/archsim.hpp"
#include "seqsvm/cost.hpp"
#include "seqsvm/ddag.hpp"
#include "seqsvm/quant.hpp"
#include "seqsvm/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace seqsvm {

using Json = nlohmann::ordered_json;

struct Provenance {
    std::string config_hash;  // 16 hex digits
    std::uint64_t seed = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

// 64-bit FNV-1a, rendered as 16 lower-case hex digits.
std::string fnv1a_hex(const std::string& data);

Json to_json(const Provenance& p);
Provenance provenance_from_json(const Json& j);

Json to_json(const Hyper& h);
Hyper hyper_from_json(const Json& j);

Json to_json(const FloatSvmModel& m);
FloatSvmModel float_model_from_json(const Json& j);

Json to_json(const Ddag& dag);
Ddag ddag_from_json(const Json& j);

// The quantized model document also carries the DDAG so every consumer sees
// one structure.
Json to_json(const QuantizedModel& qm, const Ddag& dag);
QuantizedModel quantized_model_from_json(const Json& j);

Json to_json(const QuantReport& r);
Json to_json(const SimTrace& t);
Json to_json(const BatchResult& b);
Json to_json(const CostReport& r);

// Pretty-printed with a trailing newline.
std::string dump(const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

}  // namespace seqsvm
