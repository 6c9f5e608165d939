#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cqtf/cli.hpp"

using namespace cqtf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch() {
    // Per process: ctest runs each case as its own process, possibly in parallel.
    const auto d = fs::temp_directory_path() / ("cqtf_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

const std::string thermo_header =
    "L,eps,energy,energy_gap,mu,mu_gap,kinetic,linf_err_interior,tail_probe,laplacian_sup,iterations,residual";

// The reference sweep, produced once per test binary.
const fs::path& reference_csv() {
    static const fs::path p = [] {
        const auto path = scratch() / "reference.csv";
        const auto r = cli({"sweep-thermo", "--dim", "1", "--rho", "0.5", "--L", "4,8,16,32,64", "--n", "8192",
                            "--out", path.string()});
        if (r.code != 0) throw std::runtime_error("reference sweep failed: " + r.err);
        return path;
    }();
    return p;
}

} // namespace

TEST(Cli, TfJson) {
    const auto r = cli({"tf", "--dim", "1", "--rho", "0.5", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["energy"].get<double>(), -0.09375);
    EXPECT_EQ(j["multiplier"].get<double>(), -0.1875);
    EXPECT_NEAR(j["plateau_radius"].get<double>(), 2.0 / 3.0, 1e-15);
    EXPECT_NE(r.out.find("0.6666666666666666"), std::string::npos);
}

TEST(Cli, TfCsvIsTwoLines) {
    const auto r = cli({"tf", "--dim", "2", "--rho", "0.25"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream ss(r.out);
    std::string head, vals, extra;
    std::getline(ss, head);
    std::getline(ss, vals);
    EXPECT_FALSE(std::getline(ss, extra));
    EXPECT_EQ(std::count(head.begin(), head.end(), ','), std::count(vals.begin(), vals.end(), ','));
    EXPECT_EQ(head.substr(0, 8), "dim,rho,");
}

TEST(Cli, DensityAboveThreeQuartersIsRejected) {
    for (const char* cmd : {"solve", "tf", "sweep-thermo"}) {
        const auto r = cli({cmd, "--dim", "1", "--rho", "0.9", "--L", "16"});
        EXPECT_EQ(r.code, 2) << cmd;
        EXPECT_NE(r.err.find("rho <= 3/4"), std::string::npos) << r.err;
        EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << "one-line diagnostic";
    }
}

TEST(Cli, ValidationErrorsExitTwo) {
    EXPECT_EQ(cli({"tf", "--bogus"}).code, 2);
    EXPECT_EQ(cli({"tf", "--dim", "x"}).code, 2);
    EXPECT_EQ(cli({"tf", "--dim", "4"}).code, 2);
    EXPECT_EQ(cli({"frobnicate"}).code, 2);
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"tf", "--format", "xml"}).code, 2);
    EXPECT_EQ(cli({"solve", "--L", "4,8"}).code, 2);
    EXPECT_EQ(cli({"solve", "--L", "16", "--n", "8"}).code, 2);
    EXPECT_EQ(cli({"solve", "--L", "16", "--tau", "-1"}).code, 2);
    EXPECT_EQ(cli({"sweep-thermo", "--L", "4,8"}).code, 2);
    EXPECT_EQ(cli({"sweep-tf", "--N", "4,8,16", "--trunc", "0.5"}).code, 2);
    EXPECT_EQ(cli({"tf", "--out", "/nonexistent-dir/x/out.csv"}).code, 2);
    EXPECT_EQ(cli({"tf", "--config", "/nonexistent-dir/config.json"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
    const auto r = cli({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("sweep-thermo"), std::string::npos);
}

TEST(Cli, NonConvergenceExitsThree) {
    const auto r = cli({"solve", "--dim", "1", "--rho", "0.5", "--L", "16", "--n", "1024", "--max-iter", "2"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("did not converge"), std::string::npos);
}

TEST(Cli, SolveJsonAndCsv) {
    const auto j = cli({"solve", "--dim", "1", "--rho", "0.5", "--L", "16", "--n", "2048", "--format", "json"});
    ASSERT_EQ(j.code, 0) << j.err;
    const auto doc = nlohmann::json::parse(j.out);
    EXPECT_GT(doc["energy"].get<double>(), -3.0 / 32.0);
    EXPECT_TRUE(doc["monotone"].get<bool>());
    EXPECT_EQ(doc["u"].size(), 2049u);
    const auto c = cli({"solve", "--dim", "1", "--rho", "0.5", "--L", "16", "--n", "2048"});
    ASSERT_EQ(c.code, 0);
    EXPECT_EQ(c.out.substr(0, 4), "r,u\n");
    const auto ws = cli({"solve", "--dim", "1", "--N", "16", "--n", "2048", "--format", "json"});
    ASSERT_EQ(ws.code, 0) << ws.err;
    EXPECT_EQ(nlohmann::json::parse(ws.out)["trunc"].get<double>(), 6.0);
}

TEST(Cli, SolitonJson) {
    const auto r = cli({"soliton", "--dim", "1", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(nlohmann::json::parse(r.out)["mass"].get<double>(), 2.0 * std::sqrt(3.0), 1e-4);
}

TEST(Cli, SweepHeaderAndDeterminism) {
    const auto first = slurp(reference_csv());
    EXPECT_EQ(first.substr(0, first.find('\n')), thermo_header);
    const auto again = scratch() / "again.csv";
    ASSERT_EQ(cli({"sweep-thermo", "--dim", "1", "--rho", "0.5", "--L", "4,8,16,32,64", "--n", "8192", "--out",
                   again.string()})
                  .code,
              0);
    EXPECT_EQ(slurp(again), first);
}

TEST(Cli, ThreadsDoNotChangeColdSweeps) {
    const std::vector<std::string> args{"sweep-thermo", "--dim", "1", "--rho", "0.5", "--L", "4,8,16",
                                        "--n", "1024", "--no-warm-start"};
    ::setenv("CQ_THREADS", "1", 1);
    const auto one = cli(args);
    ::setenv("CQ_THREADS", "3", 1);
    const auto three = cli(args);
    ::setenv("CQ_THREADS", "zero", 1);
    const auto bad = cli(args);
    ::unsetenv("CQ_THREADS");
    ASSERT_EQ(one.code, 0);
    EXPECT_EQ(one.out, three.out);
    EXPECT_EQ(bad.code, 2);
}

TEST(Cli, GoldenReferenceSweep) {
    const auto golden = read_table(fs::path(CQTF_TEST_DATA) / "sweep_thermo_reference.csv");
    const auto fresh = read_table(reference_csv());
    ASSERT_EQ(golden.rows.size(), fresh.rows.size());
    auto close = [](double a, double b) {
        if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
        return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)) + 1e-15;
    };
    for (std::size_t i = 0; i < golden.rows.size(); ++i) {
        const auto& g = golden.rows[i];
        const auto& f = fresh.rows[i];
        EXPECT_EQ(g.control, f.control);
        EXPECT_TRUE(close(g.energy, f.energy)) << i;
        EXPECT_TRUE(close(g.energy_gap, f.energy_gap)) << i;
        EXPECT_TRUE(close(g.mu, f.mu)) << i;
        EXPECT_TRUE(close(g.linf_err_interior, f.linf_err_interior)) << i;
        EXPECT_TRUE(close(g.tail_probe, f.tail_probe)) << i;
        EXPECT_NEAR(g.iterations, f.iterations, 2) << i;
    }
}

TEST(Cli, ReportOnReferenceSweepPasses) {
    const auto r = cli({"report", reference_csv().string()});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
}

TEST(Cli, ReportExitCodes) {
    const auto text = slurp(reference_csv());
    std::istringstream ss(text);
    std::string header, line;
    std::getline(ss, header);
    std::vector<std::string> lines;
    while (std::getline(ss, line)) lines.push_back(line);

    const auto two = scratch() / "two.csv";
    std::ofstream(two) << header << '\n' << lines[0] << '\n' << lines[1] << '\n';
    EXPECT_EQ(cli({"report", two.string()}).code, 2);

    // Negate the energy_gap column.
    const auto neg = scratch() / "negated.csv";
    {
        std::ofstream f(neg);
        f << header << '\n';
        for (const auto& l : lines) {
            std::vector<std::string> cells;
            std::stringstream ls(l);
            std::string c;
            while (std::getline(ls, c, ',')) cells.push_back(c);
            cells[3] = "-" + cells[3];
            for (std::size_t i = 0; i < cells.size(); ++i) f << (i ? "," : "") << cells[i];
            f << '\n';
        }
    }
    const auto r = cli({"report", neg.string()});
    EXPECT_EQ(r.code, 4) << r.out << r.err;
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);

    const auto junk = scratch() / "junk.csv";
    std::ofstream(junk) << "not,a,sweep\n1,2,3\n";
    EXPECT_EQ(cli({"report", junk.string()}).code, 2);
    EXPECT_EQ(cli({"report", (scratch() / "missing.csv").string()}).code, 2);
    EXPECT_EQ(cli({"report"}).code, 2);
}

TEST(Cli, ReportAcceptsJsonAndWholeSpaceSweeps) {
    const auto json = scratch() / "ref.json";
    ASSERT_EQ(cli({"sweep-thermo", "--dim", "1", "--rho", "0.5", "--L", "4,8,16,32,64", "--format", "json", "--out",
                   json.string()})
                  .code,
              0);
    EXPECT_EQ(cli({"report", json.string()}).code, 0);
    const auto tf = scratch() / "tf.csv";
    ASSERT_EQ(cli({"sweep-tf", "--dim", "1", "--N", "4,8,16,32,64", "--out", tf.string()}).code, 0);
    const auto r = cli({"report", tf.string(), json.string()});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("flagged N: none"), std::string::npos) << r.out;

    // Too tight a truncation leaves the small-N tails on the boundary.
    const auto tight = scratch() / "tight.csv";
    ASSERT_EQ(cli({"sweep-tf", "--dim", "1", "--N", "4,8,16,32,64", "--trunc", "2.0", "--out", tight.string()}).code,
              0);
    const auto t = cli({"report", tight.string()});
    EXPECT_EQ(t.code, 4);
    EXPECT_NE(t.out.find("flagged N: 4,8"), std::string::npos) << t.out;
}

TEST(Cli, ConfigFileAndFlagOverride) {
    const auto cfg = scratch() / "config.json";
    std::ofstream(cfg) << R"({"command": "tf", "dim": 3, "rho": 0.75, "format": "json"})";
    const auto a = cli({"--config", cfg.string()});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(nlohmann::json::parse(a.out)["dim"], 3);
    const auto b = cli({"tf", "--config", cfg.string(), "--dim", "2"});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(nlohmann::json::parse(b.out)["dim"], 2);
    EXPECT_EQ(nlohmann::json::parse(b.out)["rho"], 0.75);

    const auto list = scratch() / "list.json";
    std::ofstream(list) << R"({"dim": 1, "rho": 0.5, "L": [4, 8, 16], "n": 1024, "warm_start": false})";
    const auto c = cli({"sweep-thermo", "--config", list.string()});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_EQ(std::count(c.out.begin(), c.out.end(), '\n'), 4);

    const auto bad = scratch() / "bad.json";
    std::ofstream(bad) << R"({"dim": 1, "colour": "blue"})";
    EXPECT_EQ(cli({"tf", "--config", bad.string()}).code, 2);
    std::ofstream(bad) << "{ not json";
    EXPECT_EQ(cli({"tf", "--config", bad.string()}).code, 2);
    std::ofstream(bad) << R"({"dim": "one"})";
    EXPECT_EQ(cli({"tf", "--config", bad.string()}).code, 2);
}

TEST(Cli, PlotDirectory) {
    const auto dir = scratch() / "plots";
    fs::remove_all(dir);
    ASSERT_EQ(cli({"sweep-thermo", "--L", "4,8,16", "--n", "1024", "--plot-dir", dir.string()}).code, 0);
    EXPECT_TRUE(fs::exists(dir / "energy_gap.dat"));
    EXPECT_TRUE(fs::exists(dir / "tail_probe.dat"));
}
