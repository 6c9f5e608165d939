#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "cqtf/table_io.hpp"

using namespace cqtf;

namespace {

SweepTable sample_table(SweepKind kind) {
    SweepTable t;
    t.kind = kind;
    for (int i = 0; i < 3; ++i) {
        SweepRow r;
        r.control = 4 << i;
        r.eps = 1.0 / (r.control * r.control);
        r.energy = -0.09 + 0.01 / r.control;
        r.energy_gap = r.energy + 3.0 / 32.0;
        r.mu = -0.1875 + 0.1 / r.control;
        r.mu_gap = 0.1 / r.control;
        r.kinetic = 0.3 / r.control;
        r.linf_err_interior = 0.1 / std::sqrt(r.control);
        r.tail_probe = (i == 1) ? std::nan("") : std::exp(-r.control);
        r.laplacian_sup = 0.2 * r.control;
        r.iterations = 10 * (i + 1);
        r.residual = 1e-10;
        if (kind == SweepKind::tf_limit) {
            r.truncation_delta = i == 0 ? 1e-3 : 1e-12;
            r.truncation_ok = r.truncation_delta <= 1e-8;
        }
        t.rows.push_back(r);
    }
    return t;
}

void expect_same(const SweepRow& a, const SweepRow& b) {
    auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    EXPECT_TRUE(same(a.control, b.control));
    EXPECT_TRUE(same(a.eps, b.eps));
    EXPECT_TRUE(same(a.energy, b.energy));
    EXPECT_TRUE(same(a.energy_gap, b.energy_gap));
    EXPECT_TRUE(same(a.mu, b.mu));
    EXPECT_TRUE(same(a.mu_gap, b.mu_gap));
    EXPECT_TRUE(same(a.kinetic, b.kinetic));
    EXPECT_TRUE(same(a.linf_err_interior, b.linf_err_interior));
    EXPECT_TRUE(same(a.tail_probe, b.tail_probe));
    EXPECT_TRUE(same(a.laplacian_sup, b.laplacian_sup));
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_TRUE(same(a.residual, b.residual));
    EXPECT_TRUE(same(a.truncation_delta, b.truncation_delta));
    EXPECT_EQ(a.truncation_ok, b.truncation_ok);
}

} // namespace

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(-0.09375), "-0.09375");
    EXPECT_EQ(format_number(4.0), "4");
    EXPECT_EQ(format_number(std::nan("")), "nan");
    EXPECT_EQ(format_number(INFINITY), "inf");
    EXPECT_EQ(format_number(-INFINITY), "-inf");
    std::mt19937_64 gen(1);
    for (int i = 0; i < 10000; ++i) {
        double x;
        const auto bits = gen();
        std::memcpy(&x, &bits, sizeof x);
        if (!std::isfinite(x)) continue;
        const auto s = format_number(x);
        EXPECT_LE(s.size(), 24u);
        EXPECT_EQ(std::strtod(s.c_str(), nullptr), x) << s;
    }
}

TEST(Csv, HeaderIsExact) {
    std::ostringstream os;
    write_csv(os, sample_table(SweepKind::thermo));
    const auto text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "L,eps,energy,energy_gap,mu,mu_gap,kinetic,linf_err_interior,tail_probe,laplacian_sup,iterations,residual");
    EXPECT_EQ(text.find('\r'), std::string::npos);
    std::ostringstream tf;
    write_csv(tf, sample_table(SweepKind::tf_limit));
    EXPECT_EQ(tf.str().substr(0, tf.str().find('\n')),
              "N,eps,energy,energy_gap,mu,mu_gap,kinetic,linf_err_interior,tail_probe,laplacian_sup,iterations,residual,"
              "truncation_delta");
}

TEST(Csv, RoundTripIsExact) {
    for (auto kind : {SweepKind::thermo, SweepKind::tf_limit}) {
        const auto t = sample_table(kind);
        std::ostringstream os;
        write_csv(os, t);
        const auto back = parse_csv(os.str());
        EXPECT_EQ(back.kind, kind);
        ASSERT_EQ(back.rows.size(), t.rows.size());
        for (std::size_t i = 0; i < t.rows.size(); ++i) expect_same(back.rows[i], t.rows[i]);
    }
}

TEST(Json, RoundTripIsExactAndNanIsNull) {
    for (auto kind : {SweepKind::thermo, SweepKind::tf_limit}) {
        const auto t = sample_table(kind);
        const auto j = to_json(t);
        EXPECT_TRUE(j[1]["tail_probe"].is_null());
        EXPECT_EQ(j[0]["iterations"], 10);
        std::ostringstream os;
        write_json(os, t);
        const auto back = parse_json(os.str());
        EXPECT_EQ(back.kind, kind);
        ASSERT_EQ(back.rows.size(), t.rows.size());
        for (std::size_t i = 0; i < t.rows.size(); ++i) expect_same(back.rows[i], t.rows[i]);
    }
}

TEST(Csv, MalformedInputs) {
    EXPECT_THROW(parse_csv(""), table_error);
    EXPECT_THROW(parse_csv("a,b,c\n1,2,3\n"), table_error);
    const std::string header =
        "L,eps,energy,energy_gap,mu,mu_gap,kinetic,linf_err_interior,tail_probe,laplacian_sup,iterations,residual\n";
    EXPECT_THROW(parse_csv(header + "1,2,3\n"), table_error);
    EXPECT_THROW(parse_csv(header + "4,1,1,1,1,1,1,1,1,1,x,1\n"), table_error);
    EXPECT_THROW(parse_csv(header + "4,1,1,1,1,1,1,1,1,1,1.5,1\n"), table_error);
    EXPECT_THROW(parse_csv(header + "4,1,1,1,1,1,1,1,1,1,1,1 \n"), table_error);
    EXPECT_NO_THROW(parse_csv(header + "4,1,1,1,1,1,1,1,nan,1,3,1\r\n"));
}

TEST(Json, MalformedInputs) {
    EXPECT_THROW(parse_json("{"), table_error);
    EXPECT_THROW(parse_json("{}"), table_error);
    EXPECT_THROW(parse_json("[]"), table_error);
    EXPECT_THROW(parse_json("[{\"L\": 1}]"), table_error);
}

TEST(ReadTable, DetectsFormatAndReportsMissingFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "cqtf_table_io_test";
    std::filesystem::create_directories(dir);
    const auto t = sample_table(SweepKind::thermo);
    {
        std::ofstream f(dir / "a.csv");
        write_csv(f, t);
        std::ofstream g(dir / "a.json");
        write_json(g, t);
    }
    EXPECT_EQ(read_table(dir / "a.csv").rows.size(), 3u);
    EXPECT_EQ(read_table(dir / "a.json").rows.size(), 3u);
    EXPECT_THROW(read_table(dir / "missing.csv"), table_error);
}

TEST(PlotData, TwoColumnsPerQuantity) {
    const auto dir = std::filesystem::temp_directory_path() / "cqtf_plot_test";
    std::filesystem::remove_all(dir);
    write_plot_data(dir, sample_table(SweepKind::thermo));
    std::ifstream f(dir / "energy_gap.dat");
    ASSERT_TRUE(f);
    std::string line;
    std::getline(f, line);
    EXPECT_EQ(line, "# L energy_gap");
    int rows = 0;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        double a, b;
        ASSERT_TRUE(ss >> a >> b) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 3);
    EXPECT_FALSE(std::filesystem::exists(dir / "iterations.dat"));
}
