#include "nidsrobust/datapipe.hpp"
#include "nidsrobust/neuralnet.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kTmp = fs::path(NIDSROBUST_TEST_TMP) / "cli";
const fs::path kData = NIDSROBUST_DATA_DIR;

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    fs::create_directories(kTmp);
    const auto log = kTmp / "last_output.txt";
    const std::string cmd = std::string("\"") + NIDSROBUST_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sample_prep_args(const fs::path& out) {
    return "prep --csv \"" + (kData / "sample_flows.csv").string() + "\" --schema \"" +
           (kData / "sample_schema.txt").string() + "\" --maps \"" + (kData / "maps").string() + "\" --out \"" +
           out.string() + "\" --seed 3";
}

// One small synthetic bundle shared by the model-level tests.
const fs::path& synth_bundle() {
    static const fs::path dir = [] {
        const auto d = kTmp / "synth";
        fs::remove_all(d);
        const auto r = cli("synth --n 1200 --d 20 --informative 5 --separation 2 --seed 4 --out \"" + d.string() + "\"");
        REQUIRE(r.code == 0);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(cli("").code != 0);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("train --no-such-flag").code == 2);
    CHECK(cli("report --store x --figure not_a_figure --out y").code == 2);
}

TEST_CASE("a missing schema is a schema error and a missing csv an io error") {
    const auto missing_schema = cli("prep --csv \"" + (kData / "sample_flows.csv").string() +
                                    "\" --schema /nonexistent/schema.txt --out \"" + (kTmp / "x").string() + "\"");
    CHECK(missing_schema.code == 2);
    const auto missing_csv = cli("prep --csv /nonexistent/flows.csv --schema \"" +
                                 (kData / "sample_schema.txt").string() + "\" --maps \"" + (kData / "maps").string() +
                                 "\" --out \"" + (kTmp / "x").string() + "\"");
    CHECK(missing_csv.code == 1);
}

TEST_CASE("prep writes a bundle and a report") {
    const auto out = kTmp / "prep";
    fs::remove_all(out);
    const auto r = cli(sample_prep_args(out));
    REQUIRE(r.code == 0);
    const auto report = json::parse(slurp(out / "prep_report.json"));
    // 7 varying numerics, protocol {6,17}, 8 port services including
    // "other", 6 regions including "unknown". Fwd URG Flags is constant.
    CHECK(report["feature_count"] == 23);
    CHECK(report["rows_read"] == 480);
    const auto dropped = report["columns_dropped"].get<std::vector<std::string>>();
    CHECK(dropped == std::vector<std::string>{"Timestamp", "Fwd URG Flags"});
    const auto bundle = nidsrobust::DatasetBundle::load((out / "bundle.bin").string());
    CHECK(bundle.train_x.features() == 23);
    CHECK(bundle.train_x.samples() + bundle.test_x.samples() + report["rows_dropped"].get<std::size_t>() == 480);
    CHECK(fs::exists(out / "preprocessor.json"));

    // Same seed, same bundle.
    const auto again = kTmp / "prep_again";
    fs::remove_all(again);
    REQUIRE(cli(sample_prep_args(again)).code == 0);
    CHECK(slurp(out / "bundle.bin") == slurp(again / "bundle.bin"));
}

TEST_CASE("prep undersampling balances the training split") {
    const auto out = kTmp / "prep_under";
    fs::remove_all(out);
    REQUIRE(cli(sample_prep_args(out) + " --undersample").code == 0);
    const auto bundle = nidsrobust::DatasetBundle::load((out / "bundle.bin").string());
    const auto counts = bundle.train_y.class_counts();
    REQUIRE(counts.size() == 2);
    CHECK(counts[0] == counts[1]);
}

TEST_CASE("train with a feature subset builds the preset architecture") {
    const auto& d = synth_bundle();
    REQUIRE(cli("rank --bundle \"" + (d / "bundle.bin").string() + "\" --out \"" + (d / "ranking.csv").string() +
                "\"")
                .code == 0);
    const auto model = kTmp / "m3.bin";
    const auto r = cli("train --bundle \"" + (d / "bundle.bin").string() + "\" --ranking \"" +
                       (d / "ranking.csv").string() + "\" --arch model3 --k 12 --epochs 2 --seed 1 --out \"" +
                       model.string() + "\"");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("hidden widths 64,128,128") != std::string::npos);
    const auto net = nidsrobust::DenseNetwork::load(model.string());
    CHECK(net.spec().input_dim == 12);
    CHECK(net.feature_names.size() == 12);
}

TEST_CASE("single-step bim and fgsm report the same attack success rate") {
    const auto& d = synth_bundle();
    const auto model = kTmp / "m1.bin";
    REQUIRE(cli("train --bundle \"" + (d / "bundle.bin").string() + "\" --arch model1 --epochs 3 --seed 2 --out \"" +
                model.string() + "\"")
                .code == 0);
    const auto base = "attack --model \"" + model.string() + "\" --bundle \"" + (d / "bundle.bin").string() +
                      "\" --eps 0.3 --seed 9 ";
    const auto f = cli(base + "--kind fgsm --out \"" + (kTmp / "fgsm.csv").string() + "\"");
    const auto b = cli(base + "--kind bim --iters 1 --alpha 0.3 --out \"" + (kTmp / "bim.csv").string() + "\"");
    REQUIRE(f.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(kTmp / "fgsm.csv") == slurp(kTmp / "bim.csv"));
    auto asr_line = [](const std::string& text) {
        const auto p = text.find("ASR");
        return p == std::string::npos ? std::string() : text.substr(p, text.find('\n', p) - p);
    };
    CHECK_FALSE(asr_line(f.out).empty());
    CHECK(asr_line(f.out) == asr_line(b.out));

    // An attack budget larger than the step is rejected as a schema error.
    CHECK(cli(base + "--kind bim --alpha 0.5 --out \"" + (kTmp / "bad.csv").string() + "\"").code == 2);
}

TEST_CASE("sweep and report round trip through the store") {
    const auto& d = synth_bundle();
    const auto spec = kTmp / "spec.json";
    {
        std::ofstream out(spec);
        out << R"({"depths":[1,2],"feature_counts":[12],"activations":["relu"],"dropouts":[0],)"
            << R"("attacks":["fgsm"],"epsilons":[0.1,0.3],"repeats":1,"base_seed":1,)"
            << R"("training":{"epochs":1,"batch_size":64,"learning_rate":0.005,"optimizer":"adam"}})";
    }
    const auto store = kTmp / "store";
    fs::remove_all(store);
    const auto sweep = "sweep --spec \"" + spec.string() + "\" --bundle \"" + (d / "bundle.bin").string() +
                       "\" --store \"" + store.string() + "\" --quiet";
    REQUIRE(cli(sweep + " --max-runs 1").code == 0);
    const auto resumed = cli(sweep);
    REQUIRE(resumed.code == 0);
    CHECK(resumed.out.find("skipped 1") != std::string::npos);

    const auto table = kTmp / "eps.csv";
    REQUIRE(cli("report --store \"" + store.string() + "\" --figure eps_asr --out \"" + table.string() + "\"").code ==
            0);
    std::istringstream in(slurp(table));
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    CHECK(line == "depth,epsilon,mean,ci95,n");
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);

    // The store was built from a different corpus than this one.
    const auto other = kTmp / "other";
    fs::remove_all(other);
    REQUIRE(cli("synth --n 300 --d 20 --seed 99 --out \"" + other.string() + "\"").code == 0);
    CHECK(cli("sweep --spec \"" + spec.string() + "\" --bundle \"" + (other / "bundle.bin").string() +
              "\" --store \"" + store.string() + "\" --quiet")
              .code == 2);
}
