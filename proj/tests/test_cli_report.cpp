#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "bmx/bmx.hpp"

using namespace bmx;
namespace fs = std::filesystem;

TEST(RunConfig, HashIsStableAndSensitive) {
    RunConfig a;
    a.command = "diagnose";
    a.target = "normal-location";
    a.hyper = {{"sigma_p", 1.0}};
    RunConfig b = a;
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    b.seed = 2;
    EXPECT_NE(a.hash(), b.hash());
    b = a;
    b.hyper["sigma_p"] = 1.0000000001;
    EXPECT_NE(a.hash(), b.hash());
    // Output formats do not change what is computed.
    b = a;
    b.formats = {"json"};
    EXPECT_EQ(a.hash(), b.hash());
}

TEST(CsvWriter, MetadataLineFirst) {
    RunConfig c;
    c.seed = 7;
    CsvWriter w(c, {"a", "b"});
    w.row({"1", "2"});
    std::istringstream in(w.str());
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    EXPECT_EQ(l1, "# config_hash=" + c.hash() + " seed=7 version=" + std::string(kVersion));
    EXPECT_EQ(l2, "a,b");
    EXPECT_EQ(l3, "1,2");
}

TEST(DatasetCsv, RoundTripKeepsBits) {
    auto y = simulate_grouped_data(2, 5, 0.7, 2.0, 1.0, 3);
    std::istringstream in(dataset_csv(y, "# comment"));
    auto back = parse_dataset_csv(in, "x");
    EXPECT_EQ(back.values, y.values);
    EXPECT_EQ(back.groups, y.groups);
    DataSet u = make_data({0.1, -1.0 / 3.0});
    std::istringstream in2(dataset_csv(u));
    auto ub = parse_dataset_csv(in2, "u");
    EXPECT_FALSE(ub.grouped());
    EXPECT_EQ(ub.values, u.values);
}

TEST(DatasetCsv, MalformedInputIsAUsageError) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return parse_dataset_csv(in, "bad");
    };
    EXPECT_THROW(parse("x,y,z\n0,0,1\n"), UsageError);
    EXPECT_THROW(parse("group,obs_index,value\n0,0,abc\n"), UsageError);
    EXPECT_THROW(parse("group,obs_index,value\n0,0,1\n,1,2\n"), UsageError);
    EXPECT_THROW(read_dataset_csv("/nonexistent/file.csv"), UsageError);
}

TEST(SvgScatter, ContainsReferenceAndComment) {
    SvgScatter s;
    s.title = "t";
    s.x = {0.0, 1.0};
    s.y = {0.2, 0.8};
    s.weight = {0.5, 0.5};
    s.reference = 0.5;
    s.comment = "config_hash=abc";
    auto svg = s.render();
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("<!-- config_hash=abc -->"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Json, CheckResultAndScheme) {
    CheckResult r;
    r.stat_name = "mean";
    r.marginal_p = 0.25;
    auto j = to_json(r);
    EXPECT_EQ(j["stat"], "mean");
    EXPECT_DOUBLE_EQ(j["marginal_p"].get<double>(), 0.25);
}

// ---------------------------------------------------------------------------
// The command-line tool, run as a subprocess.

namespace {
int run_cli(const std::string& args) {
    std::string cmd = std::string(BMX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("bmx-cli-test-" + name);
    fs::remove_all(p);
    return p;
}
}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("diagnose --model no-such-model"), 2);
    EXPECT_EQ(run_cli("diagnose --model normal-location --budget nonsense"), 2);
    EXPECT_EQ(run_cli("diagnose --model normal-location --hp sigma_p"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli("--help"), 0); }

TEST(Cli, DiagnoseWritesOutputs) {
    auto dir = scratch("diag");
    ASSERT_EQ(run_cli("diagnose --model normal-location --budget quick --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "diagnose.json"));
    EXPECT_TRUE(fs::exists(dir / "data.csv"));
    fs::remove_all(dir);
}

TEST(Cli, BootstrapNeedsGroupedData) {
    auto dir = scratch("boot");
    fs::create_directories(dir);
    write_file(dir / "u.csv", dataset_csv(make_data({1.0, 2.0, 3.0})));
    EXPECT_EQ(run_cli("bootstrap --budget quick --data " + (dir / "u.csv").string() + " --out " + (dir / "o").string()), 3);
    fs::remove_all(dir);
}
