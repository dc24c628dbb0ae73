// Command-line front end: solve, study, phantom, validate.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "multibang/io.hpp"
#include "multibang/oracle.hpp"
#include "multibang/phantom.hpp"
#include "multibang/regpath.hpp"
#include "multibang/run_config.hpp"

namespace fs = std::filesystem;
using namespace multibang;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string level_tag(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", index);
    return buf;
}

void write_dual_image(const ScalarField& p, const fs::path& path) {
    double lo = *std::min_element(p.values().begin(), p.values().end());
    double hi = *std::max_element(p.values().begin(), p.values().end());
    if (!(lo < hi)) {
        lo -= 0.5;
        hi += 0.5;
    }
    write_field_image(p, lo, hi, path);
}

PhantomSpec phantom_of(const RunConfig& cfg) { return {cfg.phantom, cfg.values}; }

void print_row(const StudyRow& row) {
    std::cout << "delta_rel " << sci(row.delta_rel) << "  alpha " << sci(row.alpha) << "  e2 "
              << sci(row.e2) << "  einf " << sci(row.einf) << "  singular " << row.singular_nodes
              << "  newton " << row.newton_total << "  " << format_flags(row.flags) << '\n';
}

int cmd_solve(const RunConfig& cfg) {
    const Grid grid(cfg.grid);
    const ScalarField u_true = build_phantom(phantom_of(cfg), grid);
    const double level = cfg.noise_levels.empty() ? std::ldexp(1.0, -5) : cfg.noise_levels.front();
    const NoisyData data = make_noisy_data(forward_data(u_true), level, cfg.seed);
    const MorozovResult sel =
        cfg.alpha ? solve_fixed_alpha(data.y_delta, *cfg.alpha, cfg.values, cfg.solver)
                  : select_alpha_morozov(data.y_delta, data.delta_eff, cfg.values,
                                         cfg.discrepancy, cfg.solver);
    const StudyRow row = make_study_row(level, data, sel, u_true, cfg.values);

    ensure_dir(cfg.out);
    write_field_image(sel.solution.u, cfg.values.front(), cfg.values.back(), cfg.out / "u.pgm");
    write_dual_image(sel.solution.state.p, cfg.out / "p.pgm");
    write_label_image(sel.solution.u, cfg.values, cfg.out / "labels.pgm");
    write_study_csv({row}, cfg.out / "solve.csv");
    print_row(row);
    return 0;
}

int cmd_study(const RunConfig& cfg) {
    const Grid grid(cfg.grid);
    const ScalarField u_true = build_phantom(phantom_of(cfg), grid);
    NoiseModel noise{cfg.noise_levels, cfg.seed};
    if (noise.rel_levels.empty()) noise = NoiseModel::dyadic(0, 20, cfg.seed);

    ensure_dir(cfg.out);
    write_field_image(u_true, cfg.values.front(), cfg.values.back(), cfg.out / "phantom.pgm");
    const auto rows = run_noise_study(
        u_true, cfg.values, noise, cfg.discrepancy, cfg.solver,
        [&](std::size_t index, const StudyRow& row, const MorozovResult& sel) {
            const std::string tag = level_tag(index);
            write_field_image(sel.solution.u, cfg.values.front(), cfg.values.back(),
                              cfg.out / ("u_" + tag + ".pgm"));
            write_label_image(sel.solution.u, cfg.values, cfg.out / ("labels_" + tag + ".pgm"));
            print_row(row);
        });
    write_study_csv(rows, cfg.out / "study.csv");
    const bool failed = std::any_of(rows.begin(), rows.end(),
                                    [](const StudyRow& r) { return r.flags & kRowSolverError; });
    return failed ? kExitRuntime : 0;
}

int cmd_phantom(const RunConfig& cfg) {
    const Grid grid(cfg.grid);
    const ScalarField u_true = build_phantom(phantom_of(cfg), grid);
    ensure_dir(cfg.out);
    write_field_image(u_true, cfg.values.front(), cfg.values.back(), cfg.out / "phantom.pgm");
    write_label_image(u_true, cfg.values, cfg.out / "phantom_labels.pgm");
    return 0;
}

int cmd_validate() {
    bool ok = true;
    for (const auto& check : oracle::run_suite()) {
        std::printf("%-26s %s  %6.2fs  %s\n", check.name.c_str(), check.passed ? "PASS" : "FAIL",
                    check.seconds, check.detail.c_str());
        ok = ok && check.passed;
    }
    std::cout << (ok ? "all checks passed" : "some checks FAILED") << '\n';
    return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-bang regularization for the Poisson inverse source problem"};
    app.require_subcommand(1);
    app.fallthrough();

    std::map<std::string, std::string> flags;
    const std::map<std::string, std::string> help{
        {"grid", "Interior grid points per direction (default 64)"},
        {"values", "Admissible values, comma separated, increasing (default 0,0.1,0.15)"},
        {"phantom", "two-disks | two-disks-linear (default two-disks)"},
        {"alpha", "Fixed regularization parameter; omit to use the discrepancy principle"},
        {"tau", "Discrepancy factor (default 1.1)"},
        {"noise-levels", "Relative noise levels, e.g. 2^-1:2^-14 or 0.1,0.05"},
        {"seed", "Noise seed (default 0)"},
        {"gamma0", "First continuation parameter (default 1)"},
        {"gamma-factor", "Continuation reduction factor (default 0.1)"},
        {"gamma-min", "Last continuation parameter (default 1e-12)"},
        {"max-newton", "Newton iterations allowed per stage (default 100)"},
        {"out", "Output directory (default out)"},
    };
    for (const auto& key : config_keys()) app.add_option("--" + key, flags[key], help.at(key));
    std::string config_path;
    app.add_option("--config", config_path, "key = value file; flags override it");

    auto* solve = app.add_subcommand("solve", "One reconstruction; writes images and a CSV row");
    auto* study = app.add_subcommand("study", "Noise-level study; writes the CSV table");
    auto* phantom = app.add_subcommand("phantom", "Write the true parameter image");
    auto* validate = app.add_subcommand("validate", "Run the oracle check suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) {
            for (const auto& [key, value] : read_config_file(config_path)) {
                apply_setting(cfg, key, value);
            }
        }
        for (const auto& key : config_keys()) {
            if (app.count("--" + key) > 0) apply_setting(cfg, key, flags[key]);
        }
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*solve) return cmd_solve(cfg);
        if (*study) return cmd_study(cfg);
        if (*phantom) return cmd_phantom(cfg);
        if (*validate) return cmd_validate();
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << " (residual " << sci(e.achieved_residual())
                  << ")\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
