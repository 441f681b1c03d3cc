#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xvann/cli/config.hpp"
#include "xvann/cli/io.hpp"
#include "xvann/cli/pipeline.hpp"
#include "xvann/errors.hpp"

using namespace xvann;
using namespace xvann::cli;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(XVANN_SOURCE_DIR) + "/configs/";

std::string value_of(const RunConfig& c, const std::string& key) {
    for (const auto& [k, v] : c.values)
        if (k == key) return v;
    return "<absent>";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("xvann_test_" + name);
    fs::remove_all(d);
    return d;
}

const char* kTiny = R"(
[run]
product = bermudan
[model]
domestic_forwards = 0.028
domestic_kappa = 0.01
domestic_sigma = 0.01
[grid]
steps_per_year = 4
[training]
steps = 5
paths = 64
holdout_paths = 64
[analysis]
knn_k = 5
)";

std::string error_of(const std::string& text, const std::map<std::string, std::string>& over = {}) {
    try {
        parse_config_text(text, over);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, UnknownKeyIsRejectedByName) {
    EXPECT_NE(error_of(std::string(kTiny) + "[nn]\ndepth = 3\n").find("nn.depth"), std::string::npos);
    EXPECT_NE(error_of(kTiny, {{"model.fx_spot", "0.7"}}).find("model.fx_spot"), std::string::npos);
}

TEST(Config, EmptyFileListsRequiredKeys) {
    const auto e = error_of("");
    for (const char* k : {"run.product", "model.domestic_forwards", "model.domestic_kappa", "model.fx_spot"})
        EXPECT_NE(e.find(k), std::string::npos) << k;
}

TEST(Config, BadValuesNameTheirKey) {
    EXPECT_NE(error_of(kTiny, {{"training.steps", "ten"}}).find("training.steps"), std::string::npos);
    EXPECT_NE(error_of(kTiny, {{"training.loss", "forward"}}).find("training.loss"), std::string::npos);
    EXPECT_NE(error_of(kTiny, {{"run.method", "proxy"}}).find("run.method"), std::string::npos);
    EXPECT_NE(error_of(kTiny, {{"analysis.bachelier_dates", "1.7"}}).find("analysis.bachelier_dates"),
              std::string::npos);
}

TEST(Config, ShippedBermudanEcho) {
    const auto c = parse_config(kConfigs + "bermudan_paper.cfg");
    EXPECT_EQ(value_of(c, "instrument.notional"), "10000");
    EXPECT_EQ(value_of(c, "instrument.fixed_rate"), "0.028");
    EXPECT_EQ(value_of(c, "model.domestic_kappa"), "0.01");
    EXPECT_EQ(c.berm.exercise_dates, (std::vector<double>{1.5, 2.0, 2.5, 3.0, 3.5}));
    EXPECT_DOUBLE_EQ(c.model.domestic.hw.kappa, 0.01);
    EXPECT_DOUBLE_EQ(c.berm.notional, 10000.0);
    EXPECT_DOUBLE_EQ(c.berm.fixed_rate, 0.028);
    // defaults are materialized
    EXPECT_EQ(value_of(c, "nn.activation"), "tanh");
    EXPECT_EQ(value_of(c, "exposure.cpty_recovery"), "0.4");
}

TEST(Config, ShippedXccyLowVolEcho) {
    const auto c = parse_config(kConfigs + "xccy_paper_lowvol.cfg");
    EXPECT_DOUBLE_EQ(c.model.domestic.hw.sigma(0.0), 0.001);
    EXPECT_DOUBLE_EQ(c.model.foreign[0].hw.sigma(0.0), 0.001);
    EXPECT_DOUBLE_EQ(c.model.fx[0].eta(0.0), 0.2);
    EXPECT_DOUBLE_EQ(c.model.fx[0].spot, 0.76);
    EXPECT_DOUBLE_EQ(c.model.domestic.curve.forward(1.0), 0.01);
    EXPECT_DOUBLE_EQ(c.model.foreign[0].curve.forward(1.0), 0.02);
    EXPECT_EQ(value_of(c, "model.rho_dom_for"), "0.149");
    EXPECT_EQ(value_of(c, "model.rho_dom_fx"), "0.139");
    EXPECT_EQ(value_of(c, "model.rho_for_fx"), "0.676");
    EXPECT_EQ(c.xccy.dates, (std::vector<double>{0, 0.25, 0.5, 0.75, 0.83}));
    EXPECT_EQ(c.projection_dates, (std::vector<double>{0.125}));
}

TEST(Config, EveryShippedConfigParses) {
    for (const auto& e : fs::directory_iterator(kConfigs))
        if (e.path().extension() == ".cfg") EXPECT_NO_THROW(parse_config(e.path().string())) << e.path();
}

TEST(Config, HashIgnoresThreadsOnly) {
    const auto a = parse_config_text(kTiny);
    EXPECT_EQ(a.hash.size(), 16u);
    EXPECT_EQ(a.hash, parse_config_text(kTiny, {{"run.threads", "4"}}).hash);
    EXPECT_NE(a.hash, parse_config_text(kTiny, {{"run.seed", "2"}}).hash);
    EXPECT_NE(a.hash, parse_config_text(kTiny, {{"run.method", "amc"}}).hash);
}

TEST(Config, HelpListsEveryKeyWithUnit) {
    const auto h = keys_help();
    for (const auto& k : config_keys()) {
        const auto name = k.key.substr(k.key.find('.') + 1);
        EXPECT_NE(h.find("  " + name + "  (" + k.unit + ")"), std::string::npos) << k.key;
    }
}

TEST(Config, OffGridCreditDateNamesKey) {
    const auto c = parse_config_text(kTiny, {{"exposure.credit_dates", "0.5, 0.6"}});
    try {
        Pipeline p(c, scratch("offgrid"));
        FAIL() << "expected a config error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("exposure.credit_dates"), std::string::npos);
    }
}

TEST(Io, ArrayRoundTrip) {
    const auto dir = scratch("array");
    fs::create_directories(dir);
    const std::vector<double> data{1.5, -2.0, 3.25, 1e-300, 4.0, 6.0};
    write_array(dir / "a.bin", "XVAPATHS", {1, 2, 3}, data, "0123456789abcdef");
    EXPECT_EQ(fs::file_size(dir / "a.bin"), 8u + 4 + 3 * 8 + 6 * 8 + 24);
    const auto a = read_array(dir / "a.bin", "XVAPATHS", 3);
    EXPECT_EQ(a.dims, (std::vector<std::uint64_t>{1, 2, 3}));
    EXPECT_EQ(a.data, data);
    EXPECT_EQ(a.hash, "0123456789abcdef");
    EXPECT_EQ(artifact_hash(dir / "a.bin"), "0123456789abcdef");
    EXPECT_THROW(read_array(dir / "a.bin", "XVANNPRM", 3), FormatError);
    EXPECT_THROW(write_array(dir / "b.bin", "XVAPATHS", {4}, data, "0123456789abcdef"), DimensionError);

    fs::resize_file(dir / "a.bin", fs::file_size(dir / "a.bin") - 9);
    EXPECT_THROW(read_array(dir / "a.bin", "XVAPATHS", 3), FormatError);
}

TEST(Io, MixedHashDirectoryIsRefused) {
    const auto dir = scratch("mixed");
    fs::create_directories(dir / "sub");
    write_text(dir / "x.csv", "a\n", "0123456789abcdef");
    EXPECT_NO_THROW(check_directory(dir, "0123456789abcdef"));
    write_array(dir / "sub" / "y.bin", "XVAPATHS", {1}, {2.0}, "fedcba9876543210");
    EXPECT_THROW(check_directory(dir, "0123456789abcdef"), OrchestrationError);
    EXPECT_THROW(read_text(dir / "x.csv", "fedcba9876543210"), OrchestrationError);
    EXPECT_EQ(read_text(dir / "x.csv", "0123456789abcdef"), "a\n");
}

TEST(Pipeline, StageParsing) {
    EXPECT_EQ(parse_stages("all").size(), 4u);
    EXPECT_EQ(parse_stages("expose,simulate"), (std::vector<Stage>{Stage::Simulate, Stage::Expose}));
    EXPECT_THROW(parse_stages("simulate,plot"), ConfigError);
}

TEST(Pipeline, MissingStageIsAnOrchestrationError) {
    const auto c = parse_config_text(kTiny);
    Pipeline p(c, scratch("missing"));
    EXPECT_THROW(p.run({Stage::Train}), OrchestrationError);
}

TEST(Pipeline, SimulateTwiceGivesIdenticalDumps) {
    const auto c = parse_config_text(kTiny);
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    Pipeline(c, a).run({Stage::Simulate});
    Pipeline(c, b).run({Stage::Simulate});
    for (const char* f : {"paths/train_x.bin", "paths/holdout_dw.bin", "paths/train_numeraire.bin",
                          "paths/train_exercise.bin"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Pipeline, ResumedStagesMatchOneRun) {
    const auto c = parse_config_text(kTiny);
    const auto a = scratch("whole"), b = scratch("resumed");
    Pipeline(c, a).run(parse_stages("all"));
    for (auto s : parse_stages("all")) Pipeline(c, b).run({s});
    for (const char* f : {"loss.csv", "exposure.csv", "values_post.bin", "fits.txt", "checkpoint/net_000.bin"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    // every artifact carries the hash
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) EXPECT_EQ(artifact_hash(e.path()), c.hash) << e.path();
}

TEST(Pipeline, CheckpointRoundTrip) {
    const auto c = parse_config_text(kTiny);
    const auto dir = scratch("ckpt");
    Pipeline(c, dir).run({Stage::Simulate, Stage::Train});
    const auto st = read_checkpoint(dir / "checkpoint", c.hash);
    write_checkpoint(dir / "again", st, c.hash);
    const auto back = read_checkpoint(dir / "again", c.hash);
    EXPECT_EQ(st.theta(), back.theta());
    EXPECT_EQ(st.input_mean(), back.input_mean());
    EXPECT_EQ(st.input_scale(), back.input_scale());
    EXPECT_EQ(st.time_scale(), back.time_scale());
}

TEST(Pipeline, ExposureHasPreAndPostRowsAtExercise) {
    const auto c = parse_config_text(kTiny);
    Pipeline p(c, scratch("rows"));
    p.run({Stage::Simulate, Stage::Train, Stage::Expose});
    std::size_t pre = 0;
    for (const auto& r : p.outputs().profile.rows) pre += r.side == exposure::Side::Pre;
    EXPECT_EQ(pre, 5u);
}
