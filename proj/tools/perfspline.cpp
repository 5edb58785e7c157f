// Command-line front end: solve, verify, plot, batch.
//
// Exit codes: 0 report passes, 1 verification failed, 2 parse/solver error.

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perfspline/app/config.hpp"
#include "perfspline/app/pipeline.hpp"
#include "perfspline/app/plot.hpp"

namespace fs = std::filesystem;
using namespace perfspline;
using namespace perfspline::app;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_verify_failed = 1;
constexpr int exit_error = 2;

fs::path sibling(const fs::path& config, const char* suffix) {
    fs::path p = config;
    p.replace_extension();
    return p.string() + suffix;
}

struct SolveFiles {
    fs::path spline;
    fs::path report;
};

int solve_one(const fs::path& config_path, const std::string& spline_override, const std::string& report_override,
              SolveFiles* used = nullptr) {
    const RunConfig cfg = load_config(config_path);
    const fs::path spline_path =
        !spline_override.empty() ? fs::path(spline_override)
        : cfg.out_spline          ? fs::path(*cfg.out_spline)
                                  : sibling(config_path, ".spline.json");
    const fs::path report_path =
        !report_override.empty() ? fs::path(report_override)
        : cfg.out_report          ? fs::path(*cfg.out_report)
                                  : sibling(config_path, ".report.json");
    const RunArtifacts run = run_pipeline(cfg);
    write_text_file(spline_path, dump(spline_to_json(run.spline)));
    write_text_file(report_path, dump(report_to_json(run.report)));
    if (used != nullptr) *used = {spline_path, report_path};
    return run.report.pass ? exit_pass : exit_verify_failed;
}

bool is_config_file(const fs::path& p) {
    const std::string name = p.filename().string();
    auto ends_with = [&name](const std::string& s) {
        return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    return p.extension() == ".json" && !ends_with(".spline.json") && !ends_with(".report.json");
}

int report_error(const Error& e) {
    std::cerr << dump(error_to_json(e));
    return exit_error;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Periodic perfect splines interpolating in the mean"};
    cli.require_subcommand(1);

    std::string config;
    std::string out_spline;
    std::string out_report;
    auto* solve = cli.add_subcommand("solve", "construct the spline for a config and write spline + report JSON");
    solve->add_option("--config", config, "problem config (JSON)")->required()->check(CLI::ExistingFile);
    solve->add_option("--out-spline", out_spline, "spline output path");
    solve->add_option("--out-report", out_report, "report output path");

    std::string spline_file;
    auto* verify_cmd = cli.add_subcommand("verify", "recompute the verification report for a spline file");
    verify_cmd->add_option("--spline", spline_file, "spline JSON")->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("--config", config, "problem config (JSON)")->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("--out-report", out_report, "also write the report here");

    std::string plot_out;
    bool svg = false;
    auto* plot = cli.add_subcommand("plot", "sample s, f and s^(r) to CSV (and optionally SVG)");
    plot->add_option("--spline", spline_file, "spline JSON")->required()->check(CLI::ExistingFile);
    plot->add_option("--config", config, "problem config (JSON)")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "CSV output path")->required();
    plot->add_flag("--svg", svg, "also write an SVG chart next to the CSV");

    std::string batch_dir;
    auto* batch = cli.add_subcommand("batch", "solve every config in a directory concurrently");
    batch->add_option("--dir", batch_dir, "directory of config JSON files")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(cli, argc, argv);

    try {
        if (*solve) return solve_one(config, out_spline, out_report);

        if (*verify_cmd) {
            const RunConfig cfg = load_config(config);
            const PerfectSpline s = spline_from_json(read_json_file(spline_file));
            const VerificationReport rep = run_verify(s, cfg);
            const std::string text = dump(report_to_json(rep));
            if (!out_report.empty()) write_text_file(out_report, text);
            std::cout << text;
            return rep.pass ? exit_pass : exit_verify_failed;
        }

        if (*plot) {
            const RunConfig cfg = load_config(config);
            const PerfectSpline s = spline_from_json(read_json_file(spline_file));
            run_plot(s, cfg, plot_out, svg);
            return exit_pass;
        }

        if (*batch) {
            std::vector<fs::path> configs;
            for (const auto& entry : fs::directory_iterator(batch_dir)) {
                if (entry.is_regular_file() && is_config_file(entry.path())) configs.push_back(entry.path());
            }
            std::sort(configs.begin(), configs.end());
            std::vector<std::future<int>> jobs;
            jobs.reserve(configs.size());
            for (const auto& path : configs) {
                jobs.push_back(std::async(std::launch::async, [path] {
                    try {
                        return solve_one(path, "", "");
                    } catch (const Error& e) {
                        std::cerr << path.string() << ": " << e.what() << '\n';
                        return exit_error;
                    }
                }));
            }
            int worst = exit_pass;
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                const int code = jobs[i].get();
                std::cout << configs[i].filename().string() << '\t'
                          << (code == exit_pass ? "pass" : code == exit_verify_failed ? "fail" : "error") << '\n';
                worst = std::max(worst, code);
            }
            return worst;
        }
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << dump(json{{"error", "Internal"}, {"message", e.what()}});
        return exit_error;
    }
    return exit_pass;
}
