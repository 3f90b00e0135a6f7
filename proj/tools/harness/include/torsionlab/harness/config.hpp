#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "torsionlab/geometry.hpp"

namespace torsionlab::harness {

struct DomainSpec {
    CanonicalKind kind = CanonicalKind::unit_square;
    std::vector<double> params;
    std::string label;  ///< unique within a corpus; defaults to kind(params)

    PolygonalDomain build() const;
    /// Label derived from kind and parameters, e.g. "rectangle(2,1)".
    static std::string default_label(CanonicalKind kind, const std::vector<double>& params);
};

/// Domain with the parameters used by the default corpus: rectangle(2,1),
/// disk_polygon(1,256), annulus_polygon(0.5,1,256), l_shape(1). Also accepts
/// the short names disk, square and annulus.
DomainSpec default_domain(std::string_view name);

struct WosSettings {
    int n_walks = 20000;
    double eps_shell = 0.0;  ///< <= 0 selects 1e-4 times the domain diameter
    std::optional<std::uint64_t> seed;  ///< defaults to the run seed
    int probes = 5;
    int step_cap = 10000;
};

struct Tolerances {
    double bounds = 0.02;          ///< relative slack on proved inequalities
    double small_b_limit = 0.02;   ///< |lambda / (b P/A) - 1|
    double wos_agreement = 0.02;   ///< relative part of max(rel, 3 sigma)
    double levelset_grid = 0.005;  ///< t-grid doubling change
    double ratio_stability = 0.05; ///< sup-ratio change between the two finest levels
};

struct RunConfig {
    std::vector<DomainSpec> corpus;
    std::vector<double> b_values;
    std::vector<double> p_values;
    std::optional<double> limit_b;  ///< b of the small-b limit checks; defaults to min(b_values)
    int refinement_levels = 3;
    double base_h = 0.2;
    int eigen_count = 10;
    std::vector<double> heat_times{0.1, 0.5, 1.0, 2.0};
    int inequality_samples = 1000;
    int caccioppoli_cutoffs = 100;
    int levelset_intervals = 128;
    WosSettings wos;
    Tolerances tolerances;
    std::uint64_t seed = 0;
    std::string output_dir = "torsionlab-out";
    std::vector<std::string> formats{"json", "csv", "svg"};
    bool write_meshes = true;
    int workers = 1;

    std::uint64_t wos_seed() const { return wos.seed.value_or(seed); }
    double small_b() const;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Default corpus and grids with the given seed.
RunConfig default_config(std::uint64_t seed);

/// Parses and validates a JSON document. Unknown keys and type mismatches
/// raise ConfigError with the JSON pointer of the offending entry; `source`
/// prefixes the location.
RunConfig parse_config(const nlohmann::json& doc, std::string_view source = "config");

/// Reads a JSON file and parses it. Syntax errors report the byte offset.
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& config);

}  // namespace torsionlab::harness
