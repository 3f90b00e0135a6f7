#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "torsionlab/errors.hpp"
#include "torsionlab/harness/config.hpp"
#include "torsionlab/harness/report.hpp"
#include "torsionlab/harness/suite.hpp"

using namespace torsionlab;
using namespace torsionlab::harness;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 2;

void print_summary(const Report& report, int finest) {
    const Summary& s = report.summary;
    std::printf("cases %zu, verdicts %d: satisfied %d, violated %d (%d at the finest level, %d warnings below it), case errors %d\n",
                report.cases.size(), s.verdicts, s.satisfied, s.violated, s.violated_finest, s.warnings, s.case_errors);
    for (const CaseRecord& c : report.cases) {
        std::string key = c.domain + " level " + std::to_string(c.level) + " " + c.stage;
        if (c.b) key += " b=" + std::to_string(*c.b);
        if (c.p) key += " p=" + std::to_string(*c.p);
        if (!c.error.empty()) std::printf("  ERROR %s: %s\n", key.c_str(), c.error.c_str());
        for (const BoundVerdict& v : c.verdicts) {
            if (v.satisfied) continue;
            std::printf("  %s %s: %s [%s] lhs %.6g rhs %.6g\n", c.level >= finest ? "VIOLATED" : "warning", key.c_str(),
                        v.name.c_str(), v.anchor.c_str(), v.lhs, v.rhs);
        }
    }
    for (const ConvergenceTable& t : report.convergence) {
        std::printf("  convergence %s %s: estimated order %s\n", t.domain.c_str(), t.quantity.c_str(),
                    t.estimated_order ? std::to_string(*t.estimated_order).c_str() : "n/a");
    }
}

int execute(const RunConfig& config, const std::string& out_dir, std::optional<int> workers, bool quiet) {
    RunOptions options;
    options.workers = workers;
    if (config.write_meshes && !out_dir.empty()) options.mesh_dir = std::filesystem::path(out_dir) / "meshes";
    if (!quiet) options.log = [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); };
    const Report report = run_suite(config, options);
    print_summary(report, config.refinement_levels - 1);
    if (!out_dir.empty()) {
        for (const auto& path : emit_report(report, out_dir, config.formats)) std::printf("wrote %s\n", path.string().c_str());
    }
    return report.exit_code();
}

void print_table(const ConvergenceTable& t) {
    std::printf("%s %s (%s), reference %.10g\n", t.domain.c_str(), t.quantity.c_str(), t.bc.c_str(), t.reference);
    std::printf("%6s %10s %9s %18s %12s %8s %11s\n", "level", "h", "nodes", "value", "error", "order", "richardson");
    for (const ConvergenceRow& r : t.rows) {
        std::printf("%6d %10.5f %9zu %18.12g %12.4e %8s %11s\n", r.level, r.h, r.nodes, r.value, r.error,
                    r.order ? std::to_string(*r.order).substr(0, 6).c_str() : "-",
                    r.richardson_order ? std::to_string(*r.richardson_order).substr(0, 6).c_str() : "-");
    }
    std::printf("estimated order %s\n", t.estimated_order ? std::to_string(*t.estimated_order).c_str() : "n/a");
    if (t.monotone) std::printf("monotone under refinement: %s\n", *t.monotone ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Torsion function and spectral bound verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    auto* run = app.add_subcommand("run", "Run the checks of a configuration file");
    std::string config_path;
    std::string out_dir;
    std::optional<int> workers;
    bool quiet = false;
    run->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory (defaults to the config's output_dir)");
    run->add_option("--workers", workers, "Concurrent (domain, level) units")->check(CLI::PositiveNumber);
    run->add_flag("--quiet", quiet, "No progress on stderr");

    auto* verify = app.add_subcommand("verify", "Single-domain shortcut with one b and one p");
    std::string domain = "disk";
    double b = 1.0;
    double p = 2.0;
    int levels = 3;
    std::uint64_t seed = 1;
    double base_h = 0.2;
    std::string verify_out;
    verify->add_option("--domain", domain, "unit_square|square, rectangle, disk_polygon|disk, annulus_polygon|annulus, l_shape");
    verify->add_option("--b", b, "Robin parameter");
    verify->add_option("--p", p, "p-Laplacian exponent");
    verify->add_option("--levels", levels, "Refinement levels")->check(CLI::PositiveNumber);
    verify->add_option("--seed", seed, "Run seed");
    verify->add_option("--base-h", base_h, "Mesh size at level 0");
    verify->add_option("--out", verify_out, "Write reports to this directory");
    verify->add_option("--workers", workers, "Concurrent (domain, level) units")->check(CLI::PositiveNumber);
    verify->add_flag("--quiet", quiet, "No progress on stderr");

    auto* converge = app.add_subcommand("converge", "Convergence study on the disk or the unit square");
    std::string quantity = "lambda1";
    converge->add_option("--domain", domain, "disk or square");
    converge->add_option("--quantity", quantity, "lambda1, sup_norm or rigidity");
    converge->add_option("--levels", levels, "Refinement levels (at least 3)");
    converge->add_option("--base-h", base_h, "Mesh size at level 0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_error;
    }

    try {
        if (*run) {
            const RunConfig config = load_config(config_path);
            return execute(config, out_dir.empty() ? config.output_dir : out_dir, workers, quiet);
        }
        if (*verify) {
            RunConfig config = default_config(seed);
            config.corpus = {default_domain(domain)};
            config.b_values = {b};
            config.p_values = {p};
            config.refinement_levels = levels;
            config.base_h = base_h;
            config.write_meshes = !verify_out.empty();
            config.validate();
            return execute(config, verify_out, workers, quiet);
        }
        if (*converge) {
            RunConfig config = default_config(seed);
            config.corpus = {default_domain(domain)};
            config.refinement_levels = levels;
            config.base_h = base_h;
            config.validate();
            print_table(convergence_study(config, parse_quantity(quantity)));
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return exit_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_error;
    }
    return exit_error;
}
