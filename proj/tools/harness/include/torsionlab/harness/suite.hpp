#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "torsionlab/bounds.hpp"
#include "torsionlab/harness/config.hpp"

namespace torsionlab::harness {

struct LevelInfo {
    int level = 0;
    double h_target = 0.0;
    std::size_t nodes = 0;
    std::size_t triangles = 0;
    double h_max = 0.0;
    double min_angle_deg = 0.0;
    double area = 0.0;       ///< of the mesh
    double perimeter = 0.0;  ///< of the mesh
};

struct DomainRecord {
    std::string label;
    std::string kind;
    std::vector<double> params;
    double area = 0.0;  ///< of the polygon
    double perimeter = 0.0;
    double diameter = 0.0;
    std::vector<LevelInfo> levels;
    std::string error;
};

/// One unit of work: a stage run for a (domain, level, b, p) key. Values are
/// named scalars; violated verdicts are data, failures land in `error`.
struct CaseRecord {
    std::string domain;
    int level = 0;
    std::string stage;
    std::string bc;  ///< "dirichlet", "robin" or empty
    std::optional<double> b;
    std::optional<double> p;
    std::map<std::string, double> values;
    std::vector<BoundVerdict> verdicts;
    std::string error;
};

struct WosProbe {
    std::string domain;
    int level = 0;
    Vec2 point;
    double fem = 0.0;
    double wos_mean = 0.0;
    double wos_standard_error = 0.0;
    int n_walks = 0;
    int capped_walks = 0;
    double eps_shell = 0.0;
};

/// Field values along the horizontal line through the centre of the
/// bounding box; missing entries lie outside the domain.
struct CrossSection {
    std::string domain;
    std::string bc;
    int level = 0;
    Vec2 start;
    Vec2 end;
    std::vector<double> s;
    std::vector<std::optional<double>> values;
};

enum class Quantity { lambda1, sup_norm, rigidity };
Quantity parse_quantity(std::string_view name);
std::string_view to_string(Quantity q);

struct ConvergenceRow {
    int level = 0;
    double h = 0.0;
    std::size_t nodes = 0;
    double value = 0.0;
    double error = 0.0;                    ///< |value - reference|
    std::optional<double> order;           ///< log2(error_{l-1} / error_l)
    std::optional<double> richardson_order;  ///< log2(d_{l-1} / d_l), d_l = value_l - value_{l-1}
};

struct ConvergenceTable {
    std::string domain;
    std::string quantity;
    std::string bc = "dirichlet";
    double reference = 0.0;  ///< closed form of the smooth domain
    std::vector<ConvergenceRow> rows;
    std::optional<double> estimated_order;  ///< Richardson order at the finest level
    std::optional<bool> monotone;           ///< lambda1 only: nonincreasing under refinement
    std::string error;
};

struct Summary {
    int verdicts = 0;
    int satisfied = 0;
    int violated = 0;
    int violated_finest = 0;  ///< mandatory failures
    int warnings = 0;         ///< violations below the finest level
    int case_errors = 0;
};

struct Report {
    std::string tool_version;
    std::string timestamp;
    nlohmann::json config;
    std::vector<DomainRecord> domains;
    std::vector<CaseRecord> cases;
    std::vector<WosProbe> wos;
    std::vector<CrossSection> cross_sections;
    std::vector<ConvergenceTable> convergence;
    Summary summary;

    /// 0 when every mandatory verdict holds, 1 for violations at the finest
    /// level, 2 when a case failed with an error.
    int exit_code() const;
};

/// Counts verdicts by severity. Records at level < finest_level only warn.
Summary summarize(const std::vector<CaseRecord>& cases, int finest_level);

struct RunOptions {
    std::optional<int> workers;  ///< overrides the config
    std::optional<std::filesystem::path> mesh_dir;
    std::function<void(const std::string&)> log;
};

/// Runs every check of the configuration. Meshing happens once per
/// (domain, level); (domain, level) units run concurrently and are merged in
/// (domain, level, b, p) order, so the report does not depend on the worker
/// count. Seeds derive from the run seed and the case identity only.
Report run_suite(const RunConfig& config, const RunOptions& options = {});

/// Dirichlet convergence of one quantity on the first disk_polygon or
/// unit_square of the corpus. Throws ConfigError with fewer than 3 levels or
/// no such domain.
ConvergenceTable convergence_study(const RunConfig& config, Quantity quantity);

/// Seed for a named sub-stream of the run.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

std::string_view tool_version();

}  // namespace torsionlab::harness
