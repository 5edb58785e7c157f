#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "perfspline/app/config.hpp"
#include "perfspline/app/pipeline.hpp"
#include "perfspline/app/plot.hpp"

namespace fs = std::filesystem;
using namespace perfspline;
using namespace perfspline::app;

namespace {

const fs::path samples{PERFSPLINE_SAMPLES};

json canonical_json() {
    return json::parse(R"({
      "r": 2, "m": 1,
      "nodes": [
        {"x": 1.5707963267948966, "weight": "box", "half_width": 0.1},
        {"x": 3.141592653589793, "weight": "box", "half_width": 0.1},
        {"x": 4.71238898038469, "weight": "box", "half_width": 0.1}
      ],
      "function": {"kind": "builtin", "name": "sin"}
    })");
}

ErrorCode parse_error_code(const json& j) {
    try {
        (void)parse_config(j);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

std::vector<std::vector<double>> read_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

/// Fresh scratch directory holding copies of the top-level sample configs.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("perfspline_app_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& e : fs::directory_iterator(samples)) {
        if (e.is_regular_file()) fs::copy_file(e.path(), dir / e.path().filename());
    }
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + PERFSPLINE_CLI + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, ParsesCanonical) {
    const RunConfig cfg = parse_config(canonical_json());
    EXPECT_EQ(cfg.order, 2);
    EXPECT_EQ(cfg.m, 1);
    ASSERT_EQ(cfg.nodes.size(), 3u);
    EXPECT_EQ(cfg.nodes[1].weight, WeightKind::box);
    EXPECT_DOUBLE_EQ(cfg.nodes[1].half_width, 0.1);
    EXPECT_EQ(cfg.grid, 2048u);
    EXPECT_EQ(cfg.bandwidth, 4096u);
    EXPECT_DOUBLE_EQ(cfg.smoothing, 1e-3);
    EXPECT_EQ(cfg.effective_refine_bandwidth(), 4096u);
    const auto f = compile(cfg.function);
    EXPECT_NEAR(f(0.7), std::sin(0.7), 1e-15);
}

TEST(Config, RefineBandwidthDefaults) {
    auto j = canonical_json();
    j["r"] = 1;
    EXPECT_EQ(parse_config(j).effective_refine_bandwidth(), 65536u);
    j["refine_bandwidth"] = 1024;
    EXPECT_EQ(parse_config(j).effective_refine_bandwidth(), 1024u);
}

TEST(Config, HarmonicTerms) {
    auto j = canonical_json();
    j["function"] = json::parse(R"({"kind": "harmonic", "terms": [{"frequency": 0, "cos": 0.5}, {"frequency": 2, "sin": 3}]})");
    const auto f = compile(parse_config(j).function);
    EXPECT_NEAR(f(0.4), 0.5 + 3.0 * std::sin(0.8), 1e-14);
}

TEST(Config, RejectsMalformedInput) {
    auto missing = canonical_json();
    missing.erase("m");
    EXPECT_EQ(parse_error_code(missing), ErrorCode::ParseError);

    auto wrong_count = canonical_json();
    wrong_count["m"] = 2;
    EXPECT_EQ(parse_error_code(wrong_count), ErrorCode::ParseError);

    auto overlap = canonical_json();
    overlap["nodes"][0]["half_width"] = 1.0;
    overlap["nodes"][1]["half_width"] = 1.0;
    EXPECT_EQ(parse_error_code(overlap), ErrorCode::ParseError);

    auto bad_weight = canonical_json();
    bad_weight["nodes"][0]["weight"] = "gauss";
    EXPECT_EQ(parse_error_code(bad_weight), ErrorCode::ParseError);

    auto bad_builtin = canonical_json();
    bad_builtin["function"]["name"] = "tan";
    EXPECT_EQ(parse_error_code(bad_builtin), ErrorCode::ParseError);

    auto bad_order = canonical_json();
    bad_order["r"] = 0;
    EXPECT_EQ(parse_error_code(bad_order), ErrorCode::ParseError);

    auto wrong_type = canonical_json();
    wrong_type["r"] = "two";
    EXPECT_EQ(parse_error_code(wrong_type), ErrorCode::ParseError);
}

TEST(Config, SampleFilesLoad) {
    for (const char* name : {"canonical.json", "points.json", "triangle_r3.json", "constant.json"}) {
        EXPECT_NO_THROW((void)load_config(samples / name)) << name;
    }
    EXPECT_THROW((void)load_config(samples / "invalid" / "overlapping.json"), Error);
    try {
        (void)load_config(samples / "missing.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
}

TEST(SplineJson, RoundTripIsExact) {
    const PerfectSpline s(3, {0.1234567890123, 1.5, 2.75, 6.0}, -1, 0.3333333333333333, -1e-17);
    const auto back = spline_from_json(json::parse(dump(spline_to_json(s))));
    EXPECT_TRUE(back.approx_equal(s, 0.0));
}

TEST(SplineJson, RejectsOddKnotCount) {
    auto j = spline_to_json(PerfectSpline(2, {1.0, 2.0}, 1, 1.0, 0.0));
    j["knots"] = {1.0, 2.0, 3.0};
    try {
        (void)spline_from_json(j);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
    j["knots"] = {2.0, 1.0};
    EXPECT_THROW((void)spline_from_json(j), Error);
}

TEST(Pipeline, ConstantFunctionShortcut) {
    const auto run = run_pipeline(load_config(samples / "constant.json"));
    EXPECT_TRUE(run.outcome.constant_shortcut);
    EXPECT_EQ(run.spline.amplitude(), 0.0);
    EXPECT_NEAR(run.spline.offset(), 2.5, 1e-15);
    EXPECT_TRUE(run.spline.knots().empty());
    EXPECT_TRUE(run.report.pass);
    EXPECT_FALSE(run.report.delta_sign_changes.has_value());
}

TEST(Pipeline, CanonicalReportPasses) {
    const auto run = run_pipeline(load_config(samples / "canonical.json"));
    EXPECT_TRUE(run.report.pass) << run.report.diagnosis;
    EXPECT_LE(std::abs(run.report.xi), 1.0 + 1e-6);
    EXPECT_LE(run.report.max_residual, 1e-8);
    EXPECT_EQ(run.report.knot_count, 2u);
    ASSERT_TRUE(run.report.delta_sign_changes.has_value());
    EXPECT_GE(*run.report.delta_sign_changes, 3u);
    const auto j = report_to_json(run.report);
    EXPECT_TRUE(j.at("pass").get<bool>());
    EXPECT_TRUE(j.at("delta_sign_change_bound_holds").get<bool>());
}

TEST(Pipeline, SamplesPass) {
    for (const char* name : {"points.json", "triangle_r3.json"}) {
        const auto run = run_pipeline(load_config(samples / name));
        EXPECT_TRUE(run.report.pass) << name << ": " << run.report.diagnosis;
    }
}

TEST(Pipeline, Deterministic) {
    const auto cfg = load_config(samples / "canonical.json");
    const auto a = run_pipeline(cfg);
    const auto b = run_pipeline(cfg);
    EXPECT_EQ(dump(spline_to_json(a.spline)), dump(spline_to_json(b.spline)));
    EXPECT_EQ(dump(report_to_json(a.report)), dump(report_to_json(b.report)));
}

TEST(Pipeline, TamperedSplineFailsVerification) {
    const auto cfg = load_config(samples / "canonical.json");
    const auto run = run_pipeline(cfg);
    const auto& s = run.spline;
    const PerfectSpline doubled(s.order(), s.knots(), s.lead_sign(), 2.0 * s.amplitude(), s.offset());
    const auto rep = run_verify(doubled, cfg);
    EXPECT_FALSE(rep.pass);
    EXPECT_FALSE(rep.residual_ok);
    EXPECT_FALSE(rep.extremal_ok);
    EXPECT_FALSE(rep.diagnosis.empty());
}

TEST(Pipeline, VerifyRejectsOrderMismatch) {
    const auto cfg = load_config(samples / "canonical.json");
    EXPECT_THROW((void)run_verify(PerfectSpline::constant(3, 0.0), cfg), Error);
}

TEST(Plot, CsvHasClosedGrid) {
    const PerfectSpline s(2, {1.0, 1.0 + pi}, 1, 0.5, 0.0);
    const auto rows = read_csv(plot_csv(s, PeriodicFunction::harmonic(1, 0.0, 1.0), 64));
    ASSERT_EQ(rows.size(), 65u);
    EXPECT_EQ(rows.front()[0], 0.0);
    EXPECT_NEAR(rows.back()[0], two_pi, 1e-15);
    EXPECT_NEAR(rows.front()[1], rows.back()[1], 1e-12);
    for (const auto& row : rows) {
        ASSERT_EQ(row.size(), 4u);
        EXPECT_NEAR(row[2], std::sin(row[0]), 1e-14);
    }
}

TEST(Plot, ConstantSplineHasZeroDerivativeColumn) {
    const auto rows = read_csv(plot_csv(PerfectSpline::constant(2, 1.5), PeriodicFunction::constant(1.5), 32));
    for (const auto& row : rows) {
        EXPECT_EQ(row[3], 0.0);
        EXPECT_EQ(row[1], 1.5);
    }
}

TEST(Plot, DerivativeColumnAlternates) {
    const PerfectSpline s(2, {1.0, 2.0, 4.0, 5.0 + 0.0}, 1, 0.7, 0.0);
    const auto rows = read_csv(plot_csv(s, PeriodicFunction::constant(0.0), 600));
    for (const auto& row : rows) {
        const double x = row[0];
        if (std::abs(x - 1.0) < 1e-2 || std::abs(x - 2.0) < 1e-2 || std::abs(x - 4.0) < 1e-2 ||
            std::abs(x - 5.0) < 1e-2) {
            continue;
        }
        const bool positive = (x > 1.0 && x < 2.0) || (x > 4.0 && x < 5.0);
        EXPECT_EQ(row[3], positive ? 0.7 : -0.7) << x;
    }
    const auto knots = read_csv(knots_csv(s));
    ASSERT_EQ(knots.size(), 4u);
    EXPECT_EQ(knots[0][2], 0.7);
    EXPECT_EQ(knots[1][2], -0.7);
}

TEST(Plot, SvgIsWellFormed) {
    const PerfectSpline s(2, {1.0, 1.0 + pi}, 1, 0.5, 0.0);
    const std::string svg = plot_svg(s, PeriodicFunction::harmonic(1, 0.0, 1.0), 128);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Cli, SolveVerifyPlot) {
    const fs::path dir = scratch("solve");
    EXPECT_EQ(run_cli("solve --config \"" + (dir / "canonical.json").string() + "\""), 0);
    ASSERT_TRUE(fs::exists(dir / "canonical.spline.json"));
    ASSERT_TRUE(fs::exists(dir / "canonical.report.json"));
    EXPECT_TRUE(read_json_file(dir / "canonical.report.json").at("pass").get<bool>());
    const std::string pair =
        "--spline \"" + (dir / "canonical.spline.json").string() + "\" --config \"" + (dir / "canonical.json").string() + "\"";
    EXPECT_EQ(run_cli("verify " + pair), 0);
    EXPECT_EQ(run_cli("plot " + pair + " --svg --out \"" + (dir / "plot.csv").string() + "\""), 0);
    EXPECT_TRUE(fs::exists(dir / "plot.csv"));
    EXPECT_TRUE(fs::exists(dir / "plot.knots.csv"));
    EXPECT_TRUE(fs::exists(dir / "plot.svg"));
}

TEST(Cli, TamperedSplineExitsOne) {
    const fs::path dir = scratch("tamper");
    ASSERT_EQ(run_cli("solve --config \"" + (dir / "canonical.json").string() + "\""), 0);
    auto j = read_json_file(dir / "canonical.spline.json");
    j["xi"] = 2.0 * j.at("xi").get<double>();
    write_text_file(dir / "tampered.spline", dump(j));
    EXPECT_EQ(run_cli("verify --spline \"" + (dir / "tampered.spline").string() + "\" --config \"" +
                      (dir / "canonical.json").string() + "\""),
              1);
}

TEST(Cli, MalformedConfigExitsTwo) {
    EXPECT_EQ(run_cli("solve --config \"" + (samples / "invalid" / "overlapping.json").string() + "\" --out-spline /dev/null --out-report /dev/null"), 2);
    const fs::path dir = scratch("malformed");
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(run_cli("solve --config \"" + (dir / "broken.json").string() + "\""), 2);
}

TEST(Cli, BatchSolvesEverySample) {
    const fs::path dir = scratch("batch");
    EXPECT_EQ(run_cli("batch --dir \"" + dir.string() + "\""), 0);
    for (const char* stem : {"canonical", "points", "triangle_r3", "constant"}) {
        EXPECT_TRUE(read_json_file(dir / (std::string(stem) + ".report.json")).at("pass").get<bool>()) << stem;
    }
    // outputs from the first run are not picked up as configs
    EXPECT_EQ(run_cli("batch --dir \"" + dir.string() + "\""), 0);
}

TEST(Cli, UsageErrors) {
    EXPECT_NE(run_cli(""), 0);
    EXPECT_NE(run_cli("solve"), 0);
}
