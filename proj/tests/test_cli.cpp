#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "issgain/cli.hpp"

namespace {

struct Result {
    int code = 0;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "issgain");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = issgain::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("issgain_cli_" + name);
    std::ofstream(path) << content;
    return path.string();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

double column(const std::string& csv, std::size_t row, std::size_t col) {
    std::istringstream in(csv);
    std::string line;
    for (std::size_t i = 0; i <= row; ++i) std::getline(in, line);
    std::istringstream cells(line);
    std::string cell;
    for (std::size_t j = 0; j <= col; ++j) std::getline(cells, cell, ',');
    return std::stod(cell);
}

}  // namespace

TEST(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
    EXPECT_EQ(run({"simulate", "--help"}).code, 0);
}

TEST(Cli, SpectrumOfDefaultCase) {
    const auto r = run({"spectrum", "--modes", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(first_line(r.out), "n,lambda,phi_0,dphi_0,max_abs_phi");
    EXPECT_NEAR(column(r.out, 1, 1), 9.8696044, 1e-6);
    EXPECT_NEAR(column(r.out, 3, 1), 88.826439, 1e-4);
    EXPECT_NE(r.err.find("certified"), std::string::npos);
}

TEST(Cli, SpectrumFailingHypothesisExitsOne) {
    const auto r = run({"spectrum", "--case", "custom", "--q", "-20"});
    EXPECT_EQ(r.code, 1);
}

TEST(Cli, GainRoutesForBackstepping) {
    const auto r = run({"gain", "--case", "backstepping", "--c", "0", "--D", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (std::size_t row = 1; row <= 3; ++row) EXPECT_NEAR(column(r.out, row, 1), 0.57735026919, 1e-9);
}

TEST(Cli, GainKeyValueFormat) {
    const auto r = run({"gain", "--case", "transport", "--zeta", "1", "--a", "inf", "--format", "kv", "--eps", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("route = series"), std::string::npos);
    EXPECT_NE(r.out.find("epsilon = 2"), std::string::npos);
}

TEST(Cli, InadmissibleCaseExitsTwo) {
    EXPECT_EQ(run({"gain", "--case", "transport", "--v", "1", "--k", "-1"}).code, 2);
}

TEST(Cli, BadArgumentsExitThree) {
    EXPECT_EQ(run({"gain", "--no-such-flag"}).code, 3);
    EXPECT_EQ(run({"gain", "--case", "nonsense"}).code, 3);
    EXPECT_EQ(run({"gain", "--case", "transport", "--a", "abc"}).code, 3);
    EXPECT_EQ(run({"simulate", "--d-kind", "square"}).code, 3);
    EXPECT_EQ(run({"spectrum", "--resolution", "63"}).code, 3);
    EXPECT_EQ(run({}).code, 3);
}

TEST(Cli, SweepSummary) {
    const auto r = run({"sweep-fig1", "--points", "12"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(first_line(r.out), "zeta,G_a0,G_a1,G_ainf,G_advection");
    EXPECT_NEAR(column(r.out, 1, 0), 0.05, 1e-12);
    EXPECT_NEAR(column(r.out, 12, 0), 4.0, 1e-12);
    EXPECT_NE(r.err.find("holds"), std::string::npos);
    EXPECT_NE(r.err.find("crossovers"), std::string::npos);
}

TEST(Cli, SimulateWithEnvelopeCheck) {
    const auto r = run({"simulate", "--case", "transport", "--v", "1", "--solver", "spectral", "--d-kind", "sinusoid",
                        "--d-amplitude", "1", "--d-omega", "3", "--T", "1", "--store-every", "100", "--verify-iss"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(first_line(r.out), "t,norm_r,d");
    EXPECT_NE(r.out.find("epsilon,min_margin,argmin_t,pass"), std::string::npos);
    EXPECT_NE(r.err.find("ISS envelope: pass"), std::string::npos);
}

TEST(Cli, ClosedLoopWritesKernel) {
    const auto kernel = write_temp("kernel.csv", "");
    const auto r = run({"simulate", "--solver", "closed-loop", "--plant-p", "3", "--c", "1", "--d-kind", "sinusoid",
                        "--d-offset", "0", "--d-amplitude", "1", "--d-omega", "2", "--T", "0.5", "--resolution",
                        "64", "--kernel-out", kernel});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(first_line(r.out), "t,norm_r,d,u");
    std::ifstream in(kernel);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "z,s,k");
}

TEST(Cli, ConfigFileWithOverride) {
    const auto cfg =
        write_temp("run.cfg", "schema = issgain-config/1\ncommand = gain\ncase = transport\nzeta = 0.5\na = inf\n");
    const auto base = run({"--config", cfg});
    ASSERT_EQ(base.code, 0) << base.err;
    const auto over = run({"--config", cfg, "gain", "--zeta", "2"});
    ASSERT_EQ(over.code, 0) << over.err;
    const double g_half = column(base.out, 1, 1), g_two = column(over.out, 1, 1);
    EXPECT_NEAR(g_half, std::sqrt(issgain::transport_gain_squared_closed(0.5, issgain::ExitParameter::dirichlet())), 1e-9);
    EXPECT_NEAR(g_two, std::sqrt(issgain::transport_gain_squared_closed(2.0, issgain::ExitParameter::dirichlet())), 1e-9);

    const auto bad = write_temp("bad.cfg", "command = gain\n");
    EXPECT_EQ(run({"--config", bad}).code, 3);
    const auto flags = write_temp("flags.cfg", "schema = issgain-config/1\ncommand = simulate\nT = 0.01\nwide = maybe\n");
    EXPECT_EQ(run({"--config", flags}).code, 3);
}

TEST(Cli, OutputFile) {
    const auto path = write_temp("sweep.csv", "");
    const auto r = run({"sweep-fig1", "--points", "3", "--output", path});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "zeta,G_a0,G_a1,G_ainf,G_advection");
}
