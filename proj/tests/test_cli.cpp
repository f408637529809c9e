// Drives the seqsvm executable.

#include "seqsvm/serialize.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cstdio>
#include <map>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace seqsvm;

namespace {

const std::string kData = std::string(SEQSVM_SOURCE_DIR) + "/data/";

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI with `args`, capturing stdout and stderr together.
Result cli(const std::string& args)
{
    const std::string cmd = std::string(SEQSVM_CLI) + " " + args + " 2>&1";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    while (const std::size_t n = fread(buf, 1, sizeof buf, p))
        r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            out[fs::relative(e.path(), dir).string()] = read_text(e.path());
    return out;
}

}  // namespace

TEST_CASE("usage errors exit 1")
{
    CHECK(cli("").code == 1);
    CHECK(cli("run --dataset " + kData + "blobs_c3_f21.csv").code == 1);  // no seed
    CHECK(cli("run --dataset " + kData + "blobs_c3_f21.csv --seed 1 --storage sram").code == 1);
    CHECK(cli("run --dataset " + kData + "blobs_c3_f21.csv --seed 1 --split 1.5").code == 1);
    CHECK(cli("run --dataset " + kData + "blobs_c3_f21.csv --seed 1 --adc 9").code == 1);
    CHECK(cli("run --dataset " + kData + "blobs_c3_f21.csv --seed 1 --tech /nonexistent").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("stage failures exit 2 and name the stage")
{
    const auto out = testing::temp_dir("cli_fail");
    const Result r = cli("run --dataset " + (out / "nope.csv").string() + " --seed 1 --out " + out.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("stage 'ingest'") != std::string::npos);

    const Result q = cli("quantize --out " + (out / "empty").string());
    CHECK(q.code == 2);
}

TEST_CASE("separate subcommands equal one run")
{
    const auto once = testing::temp_dir("cli_once");
    const auto staged = testing::temp_dir("cli_staged");
    const std::string ds = kData + "rings_c10_f17.csv";

    const Result r = cli("run --dataset " + ds + " --seed 3 --trace 2 --golden 30 --out " + once.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("rings_c10_f17.csv") != std::string::npos);

    REQUIRE(cli("train --dataset " + ds + " --seed 3 --out " + staged.string()).code == 0);
    REQUIRE(cli("quantize --out " + staged.string()).code == 0);
    REQUIRE(cli("simulate --trace 2 --out " + staged.string()).code == 0);
    REQUIRE(cli("gen-hdl --golden 30 --out " + staged.string()).code == 0);
    const Result c = cli("cost --out " + staged.string());
    REQUIRE(c.code == 0);
    CHECK(c.out.find("sequential-rom") != std::string::npos);

    auto a = snapshot(once);
    auto b = snapshot(staged);
    a.erase("summary.txt");  // only `run` writes the summary
    CHECK(a == b);
}

TEST_CASE("simulate writes the requested number of traces")
{
    const auto out = testing::temp_dir("cli_trace");
    REQUIRE(cli("run --dataset " + kData + "blobs_c3_f21.csv --seed 2 --trace 0 --out " + out.string()).code == 0);
    CHECK((!fs::exists(out / "traces") || fs::is_empty(out / "traces")));
    REQUIRE(cli("simulate --trace 5 --out " + out.string()).code == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(out / "traces")) {
        ++files;
        // header lines, then one line per cycle
        int cycles = 0;
        const std::string text = read_text(e.path());
        for (std::size_t pos = 0; (pos = text.find('\n', pos)) != std::string::npos; ++pos)
            ++cycles;
        CHECK(cycles >= 44);
    }
    CHECK(files == 5);
}

TEST_CASE("storage override is recorded in the provenance")
{
    const auto out = testing::temp_dir("cli_override");
    REQUIRE(cli("run --dataset " + kData + "blobs_c3_f21.csv --seed 2 --out " + out.string()).code == 0);
    const auto mux_hash = read_json(out / "cost_report.json").at("provenance").at("config_hash").get<std::string>();
    REQUIRE(cli("cost --storage rom --adc 1 --out " + out.string()).code == 0);
    const Json cost = read_json(out / "cost_report.json");
    CHECK(cost.at("storage").get<std::string>() == "rom");
    const int bits = read_json(out / "model.json").at("param_bits").get<int>();
    CHECK(cost.at("selected").at("access_slots").get<int>() == (bits + 1) / 2);  // one 2-bit ADC
    CHECK(cost.at("provenance").at("config_hash").get<std::string>() != mux_hash);
}

TEST_CASE("compare on two classes: one-vs-one equals one-vs-all")
{
    const auto out = testing::temp_dir("cli_compare");
    const std::string csv = (out / "two.csv").string();
    REQUIRE(cli("gen-data --kind noisy --classes 2 --features 5 --per-class 80 --seed 4 --output " + csv).code == 0);
    REQUIRE(cli("run --dataset " + csv + " --seed 4 --out " + out.string()).code == 0);
    const Result r = cli("compare --out " + out.string());
    REQUIRE(r.code == 0);

    std::map<std::string, std::pair<std::string, std::string>> rows;  // name -> (vectors, accuracies)
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) {
        std::istringstream ls(line);
        std::string name, vectors, train, test;
        if (ls >> name >> vectors >> train >> test)
            rows[name] = {vectors, train + " " + test};
    }
    REQUIRE(rows.count("ovo-vote"));
    REQUIRE(rows.count("ova"));
    CHECK(rows["ovo-vote"].first == "1");
    CHECK(rows["ova"].first == "2");
    CHECK(rows["ovo-vote"].second == rows["ova"].second);
    CHECK(rows["ovo-ddag"].second == rows["ovo-vote"].second);
    CHECK(r.out.find("parallel/sequential area:") != std::string::npos);
    CHECK(fs::exists(out / "compare.txt"));
}

TEST_CASE("gen-data is reproducible")
{
    const auto out = testing::temp_dir("cli_gen");
    REQUIRE(cli("gen-data --kind rings --classes 4 --features 3 --per-class 10 --seed 9 --output " +
                (out / "a.csv").string()).code == 0);
    REQUIRE(cli("gen-data --kind rings --classes 4 --features 3 --per-class 10 --seed 9 --output " +
                (out / "b.csv").string()).code == 0);
    CHECK(read_text(out / "a.csv") == read_text(out / "b.csv"));
    CHECK(cli("gen-data --kind rings --classes 4 --features 1 --seed 9 --output " + (out / "c.csv").string()).code ==
          2);
}
