#include "torsionlab/harness/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/bessel.hpp>

#include "torsionlab/errors.hpp"
#include "torsionlab/fem.hpp"
#include "torsionlab/mesh.hpp"
#include "torsionlab/plaplace.hpp"
#include "torsionlab/torsion_linear.hpp"
#include "torsionlab/wos.hpp"

#ifndef TORSIONLAB_VERSION
#define TORSIONLAB_VERSION "0.0.0"
#endif

namespace torsionlab::harness {

namespace {

constexpr int planar = 2;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string sanitize(std::string_view s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

CaseRecord make_record(const std::string& domain, int level, std::string stage, std::string bc,
                       std::optional<double> b = std::nullopt, std::optional<double> p = std::nullopt) {
    CaseRecord r;
    r.domain = domain;
    r.level = level;
    r.stage = std::move(stage);
    r.bc = std::move(bc);
    r.b = b;
    r.p = p;
    return r;
}

std::string seed_tag(const CaseRecord& r) {
    std::string tag = r.domain + "/L" + std::to_string(r.level) + "/" + r.stage;
    if (r.b) tag += "/b=" + fmt(*r.b);
    if (r.p) tag += "/p=" + fmt(*r.p);
    return tag;
}

/// Runs `body`, turning any exception into the record's error.
template <class F>
void guarded(CaseRecord& record, F&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        record.error = e.what();
    }
}

void append(std::vector<BoundVerdict>& to, std::vector<BoundVerdict> from) {
    for (BoundVerdict& v : from) to.push_back(std::move(v));
}

double robin_small_b_ratio(double lambda, double b, double perimeter, double area) {
    return lambda / (b * perimeter / area);
}

struct UnitResult {
    std::vector<CaseRecord> cases;
    std::vector<WosProbe> wos;
    std::vector<CrossSection> sections;
    std::optional<LevelInfo> info;
};

CrossSection cross_section(const FemSystem& fem, const std::string& domain, int level, const std::string& bc,
                           std::span<const double> values) {
    const TriangleMesh& mesh = *fem.mesh;
    Vec2 lo = mesh.nodes.front();
    Vec2 hi = lo;
    for (Vec2 v : mesh.nodes) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    CrossSection cs;
    cs.domain = domain;
    cs.bc = bc;
    cs.level = level;
    const double y = 0.5 * (lo.y + hi.y);
    cs.start = {lo.x, y};
    cs.end = {hi.x, y};
    const PointLocator locator(mesh);
    constexpr int samples = 201;
    for (int i = 0; i < samples; ++i) {
        const double s = static_cast<double>(i) / (samples - 1);
        const Vec2 x{lo.x + s * (hi.x - lo.x), y};
        cs.s.push_back(s * (hi.x - lo.x));
        cs.values.push_back(evaluate(mesh, locator, values, x));
    }
    return cs;
}

class UnitRunner {
public:
    UnitRunner(const RunConfig& config, const DomainSpec& spec, const PolygonalDomain& domain, MeshPtr mesh, int level)
        : config_(config), spec_(spec), domain_(domain), fem_(std::move(mesh)), level_(level),
          finest_(level == config.refinement_levels - 1) {}

    UnitResult run() {
        LevelInfo info;
        info.level = level_;
        info.h_target = config_.base_h * std::ldexp(1.0, -level_);
        info.nodes = fem_.mesh->node_count();
        info.triangles = fem_.mesh->triangle_count();
        info.h_max = longest_edge(*fem_.mesh);
        info.min_angle_deg = min_angle_deg(*fem_.mesh);
        info.area = fem_.measures.area;
        info.perimeter = fem_.measures.boundary_length;
        out_.info = info;

        dirichlet_linear();
        for (double p : config_.p_values) dirichlet_p(p);
        if (finest_ && config_.wos.probes > 0) wos_comparison();
        for (double b : config_.b_values) {
            robin_linear(b);
            for (double p : config_.p_values) robin_p(b, p);
        }
        small_b_limit();
        return std::move(out_);
    }

private:
    const std::string& label() const { return spec_.label; }
    double tol() const { return config_.tolerances.bounds; }

    void dirichlet_linear() {
        CaseRecord r = make_record(label(), level_, "dirichlet_torsion", "dirichlet");
        guarded(r, [&] {
            TorsionSolution sol = solve_torsion(fem_, BoundaryCondition::dirichlet());
            r.values = {{"lambda1", sol.lambda1},
                        {"sup_norm", sol.sup_norm},
                        {"rigidity", torsional_rigidity(sol)},
                        {"cg_iterations", static_cast<double>(sol.cg.iterations)}};
            r.verdicts = sup_norm_verdicts(sol, tol());
            if (finest_) out_.sections.push_back(cross_section(fem_, label(), level_, "dirichlet", sol.field.values));
            dirichlet_ = std::move(sol);
        });
        out_.cases.push_back(std::move(r));
    }

    void dirichlet_p(double p) {
        CaseRecord r = make_record(label(), level_, "dirichlet_p_torsion", "dirichlet", std::nullopt, p);
        guarded(r, [&] {
            const PTorsionSolution w = solve_p_torsion(fem_, p, BoundaryCondition::dirichlet());
            const PEigenResult eig = p_eigenvalue_2d(fem_, p, BoundaryCondition::dirichlet());
            const double ratio = dirichlet_p_ratio(w, eig.lambda);
            r.values = {{"sup_norm", w.sup_norm},
                        {"l1_norm", w.l1_norm},
                        {"energy", w.energy},
                        {"iterations", static_cast<double>(w.iterations)},
                        {"converged", w.converged ? 1.0 : 0.0},
                        {"lambda_p", eig.lambda},
                        {"eigen_converged", eig.converged ? 1.0 : 0.0},
                        {"sup_ratio", ratio}};
            if (p == 2.0) {
                const BoundPair bounds = dirichlet_sup_bound(planar, eig.lambda);
                const std::vector<std::pair<std::string, double>> inputs{{"m", planar}, {"lambda1", eig.lambda}};
                r.verdicts.push_back(make_verdict("p=2 torsion sup norm lower bound", std::string(anchors::dirichlet_sup),
                                                  bounds.lower, w.sup_norm, tol(), inputs));
                r.verdicts.push_back(make_verdict("p=2 torsion sup norm upper bound", std::string(anchors::dirichlet_sup),
                                                  w.sup_norm, bounds.upper, tol(), inputs, std::string(natural_log_note)));
                if (dirichlet_) r.values["linear_sup_rel_diff"] = std::abs(w.sup_norm - dirichlet_->sup_norm) / dirichlet_->sup_norm;
            }
            if (config_.caccioppoli_cutoffs > 0) {
                const double c1 = std::pow(2.0, p - 1.0) + 1.0;
                CaccioppoliSweep sweep = caccioppoli_sweep(*fem_.mesh, w.field.values, p, c1, config_.caccioppoli_cutoffs,
                                                           derive_seed(config_.seed, seed_tag(r) + "/cutoffs"));
                r.values["caccioppoli_satisfied"] = sweep.satisfied;
                r.values["caccioppoli_nontrivial"] = sweep.nontrivial;
                // the worst cutoff stands for the sweep; a violation anywhere shows in the note
                sweep.worst.satisfied = sweep.worst.satisfied && sweep.satisfied == sweep.cutoffs;
                r.verdicts.push_back(std::move(sweep.worst));
            }
        });
        out_.cases.push_back(std::move(r));
    }

    void wos_comparison() {
        CaseRecord r = make_record(label(), level_, "wos_comparison", "dirichlet");
        guarded(r, [&] {
            if (!dirichlet_) throw NoConvergence("Dirichlet torsion unavailable for the comparison");
            const double diam = domain_.diameter();
            const auto probes = interior_probe_points(domain_, config_.wos.probes, 0.02 * diam);
            const PointLocator locator(*fem_.mesh);
            WosOptions options;
            options.n_walks = config_.wos.n_walks;
            options.eps_shell = config_.wos.eps_shell;
            options.step_cap = config_.wos.step_cap;
            for (std::size_t i = 0; i < probes.size(); ++i) {
                options.seed = derive_seed(config_.wos_seed(), seed_tag(r) + "/probe" + std::to_string(i));
                const WosEstimate est = wos_exit_time(domain_, probes[i], options);
                const auto fem_value = evaluate(*fem_.mesh, locator, dirichlet_->field.values, probes[i]);
                if (!fem_value) throw InvalidParameter("probe point outside the mesh");
                WosProbe probe{label(), level_, probes[i], *fem_value, est.mean, est.standard_error, est.n_walks,
                               est.capped_walks, est.eps_shell};
                const double allowed = std::max(config_.tolerances.wos_agreement * std::abs(est.mean), 3.0 * est.standard_error);
                r.verdicts.push_back(make_verdict("fem vs walk-on-spheres at (" + fmt(probes[i].x) + ", " + fmt(probes[i].y) + ")",
                                                  std::string(anchors::exit_time), std::abs(*fem_value - est.mean), allowed, 0.0,
                                                  {{"x", probes[i].x},
                                                   {"y", probes[i].y},
                                                   {"fem", *fem_value},
                                                   {"wos_mean", est.mean},
                                                   {"wos_standard_error", est.standard_error},
                                                   {"n_walks", static_cast<double>(est.n_walks)},
                                                   {"capped_walks", static_cast<double>(est.capped_walks)}}));
                out_.wos.push_back(probe);
            }
            r.values["probes"] = static_cast<double>(probes.size());
        });
        out_.cases.push_back(std::move(r));
    }

    void robin_linear(double b) {
        CaseRecord r = make_record(label(), level_, "robin_torsion", "robin", b);
        guarded(r, [&] {
            TorsionSolution sol = solve_torsion(fem_, BoundaryCondition::robin(b));
            const SpectralSet spec = robin_spectrum(fem_, b, config_.eigen_count);
            r.values = {{"lambda1", sol.lambda1}, {"sup_norm", sol.sup_norm}, {"rigidity", torsional_rigidity(sol)}};
            const auto lambdas = spec.eigenvalues();
            for (std::size_t j = 0; j < lambdas.size(); ++j) r.values["lambda_" + std::to_string(j + 1)] = lambdas[j];
            if (spec.cluster_warning) r.values["cluster_warning"] = 1.0;
            r.verdicts = sup_norm_verdicts(sol, tol());
            append(r.verdicts, robin_eigen_verdicts(fem_, sol, spec, config_.heat_times));
            if (config_.inequality_samples > 0) {
                const InequalityMargins m = functional_inequality_margins(fem_, b, lambdas.front(), config_.inequality_samples,
                                                                          derive_seed(config_.seed, seed_tag(r) + "/fields"));
                r.values["inequality_samples"] = m.samples;
                r.values["nash_strong_branch"] = m.nash_strong ? 1.0 : 0.0;
                append(r.verdicts, functional_inequality_verdicts(m, b, lambdas.front()));
            }
            if (finest_ && std::abs(b - closest_to_one()) == 0.0)
                out_.sections.push_back(cross_section(fem_, label(), level_, BoundaryCondition::robin(b).describe(), sol.field.values));
            robin_sup_[b] = sol.sup_norm;
        });
        out_.cases.push_back(std::move(r));
    }

    void robin_p(double b, double p) {
        CaseRecord r = make_record(label(), level_, "robin_p_torsion", "robin", b, p);
        guarded(r, [&] {
            const PTorsionSolution u = solve_p_torsion(fem_, p, BoundaryCondition::robin(b));
            const PEigenResult eig = p_eigenvalue_2d(fem_, p, BoundaryCondition::robin(b));
            r.values = {{"sup_norm", u.sup_norm},
                        {"rigidity", u.l1_norm},
                        {"energy", u.energy},
                        {"iterations", static_cast<double>(u.iterations)},
                        {"converged", u.converged ? 1.0 : 0.0},
                        {"lambda_p", eig.lambda},
                        {"eigen_converged", eig.converged ? 1.0 : 0.0}};
            if (p == 2.0 && robin_sup_.count(b))
                r.values["linear_sup_rel_diff"] = std::abs(u.sup_norm - robin_sup_[b]) / robin_sup_[b];
            r.verdicts = rigidity_verdicts(u, fem_.measures, eig.lambda, tol());
            const LevelsetIntegralCheck ls = levelset_integral_check(u, eig.lambda, config_.levelset_intervals, tol(),
                                                                     config_.tolerances.levelset_grid);
            r.values["levelset_lhs_coarse"] = ls.lhs_coarse;
            r.values["levelset_lhs_fine"] = ls.lhs_fine;
            r.values["levelset_grid_change"] = ls.grid_change;
            r.verdicts.push_back(ls.verdict);
        });
        out_.cases.push_back(std::move(r));
    }

    void small_b_limit() {
        const double b = config_.small_b();
        CaseRecord r = make_record(label(), level_, "small_b_limit", "robin", b);
        guarded(r, [&] {
            const SpectralSet spec = robin_spectrum(fem_, b, 1);
            const double lambda = spec.pairs.front().eigenvalue;
            const double ratio = robin_small_b_ratio(lambda, b, fem_.measures.boundary_length, fem_.measures.area);
            r.values = {{"lambda1", lambda}, {"lambda_over_b", lambda / b}, {"perimeter_over_area", fem_.measures.boundary_length / fem_.measures.area}};
            r.verdicts.push_back(make_verdict("lambda/b against perimeter/area", std::string(anchors::small_b_limit),
                                              std::abs(ratio - 1.0), config_.tolerances.small_b_limit, 0.0,
                                              {{"b", b}, {"lambda1", lambda}, {"ratio", ratio}},
                                              "lhs is |lambda / (b |dOmega| / |Omega|) - 1|"));
        });
        out_.cases.push_back(std::move(r));
    }

    double closest_to_one() const {
        return *std::min_element(config_.b_values.begin(), config_.b_values.end(),
                                 [](double a, double c) { return std::abs(std::log(a)) < std::abs(std::log(c)); });
    }

    const RunConfig& config_;
    const DomainSpec& spec_;
    const PolygonalDomain& domain_;
    FemSystem fem_;
    int level_;
    bool finest_;
    std::optional<TorsionSolution> dirichlet_;
    std::map<double, double> robin_sup_;
    UnitResult out_;
};

std::vector<CaseRecord> ball_limit_records(const RunConfig& config) {
    std::vector<CaseRecord> out;
    const double b = config.small_b();
    for (int m : {2, 3}) {
        CaseRecord r = make_record("radial_ball_m" + std::to_string(m), config.refinement_levels - 1, "ball_small_b_limit", "robin", b);
        guarded(r, [&] {
            const double lambda = radial_p_eigenvalue(m, 2.0, 1.0, BoundaryCondition::robin(b));
            const double ratio = lambda / (b * m);
            r.values = {{"m", static_cast<double>(m)}, {"radius", 1.0}, {"lambda1", lambda}, {"lambda_over_b", lambda / b}};
            r.verdicts.push_back(make_verdict("ball lambda/b against m/R", std::string(anchors::ball_small_b_limit),
                                              std::abs(ratio - 1.0), config.tolerances.small_b_limit, 0.0,
                                              {{"m", static_cast<double>(m)}, {"b", b}, {"lambda1", lambda}},
                                              "lhs is |lambda / (b m / R) - 1| for the unit ball"));
        });
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CaseRecord> ratio_stability_records(const RunConfig& config, const std::vector<CaseRecord>& cases) {
    std::vector<CaseRecord> out;
    if (config.refinement_levels < 2) return out;
    const int fine = config.refinement_levels - 1;
    for (const DomainSpec& d : config.corpus) {
        for (double p : config.p_values) {
            auto find = [&](int level) -> const CaseRecord* {
                for (const CaseRecord& c : cases)
                    if (c.domain == d.label && c.level == level && c.stage == "dirichlet_p_torsion" && c.p == p && c.error.empty())
                        return &c;
                return nullptr;
            };
            CaseRecord r = make_record(d.label, fine, "ratio_stability", "dirichlet", std::nullopt, p);
            const CaseRecord* coarse = find(fine - 1);
            const CaseRecord* finer = find(fine);
            if (!coarse || !finer) {
                r.error = "p-torsion ratio missing at one of the two finest levels";
            } else {
                const double rc = coarse->values.at("sup_ratio");
                const double rf = finer->values.at("sup_ratio");
                r.values = {{"ratio_coarse", rc}, {"ratio_fine", rf}};
                r.verdicts.push_back(make_verdict("sup-ratio change between the two finest levels", std::string(anchors::p_torsion_ratio),
                                                  std::abs(rf / rc - 1.0), config.tolerances.ratio_stability, 0.0,
                                                  {{"p", p}, {"ratio_coarse", rc}, {"ratio_fine", rf}},
                                                  "lhs is the relative change of sup w lambda_p^{1/(p-1)}"));
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

double square_series(bool centre_value) {
    // Dirichlet torsion of the unit square as a double sine series
    double sum = 0.0;
    constexpr int terms = 2001;
    const double pi = std::numbers::pi;
    for (int i = 1; i <= terms; i += 2) {
        for (int j = 1; j <= terms; j += 2) {
            const double di = i;
            const double dj = j;
            const double denom = di * dj * (di * di + dj * dj);
            if (centre_value) {
                const double sign = ((i + j) / 2 - 1) % 2 == 0 ? 1.0 : -1.0;
                sum += sign / denom;
            } else {
                sum += 1.0 / (di * dj * denom);
            }
        }
    }
    const double pi6 = std::pow(pi, 6);
    return centre_value ? 16.0 / std::pow(pi, 4) * sum : 64.0 / pi6 * sum;
}

std::optional<double> reference_value(const DomainSpec& spec, Quantity q) {
    if (spec.kind == CanonicalKind::disk_polygon) {
        const double r = spec.params.empty() ? 1.0 : spec.params[0];
        const double j = boost::math::cyl_bessel_j_zero(0.0, 1);
        switch (q) {
            case Quantity::lambda1: return j * j / (r * r);
            case Quantity::sup_norm: return r * r / 4.0;
            case Quantity::rigidity: return std::numbers::pi * std::pow(r, 4) / 8.0;
        }
    }
    if (spec.kind == CanonicalKind::unit_square) {
        switch (q) {
            case Quantity::lambda1: return 2.0 * std::numbers::pi * std::numbers::pi;
            case Quantity::sup_norm: return square_series(true);
            case Quantity::rigidity: return square_series(false);
        }
    }
    return std::nullopt;
}

ConvergenceTable build_table(const DomainSpec& spec, Quantity q, const std::vector<LevelInfo>& levels,
                             const std::vector<double>& values) {
    ConvergenceTable t;
    t.domain = spec.label;
    t.quantity = std::string(to_string(q));
    t.reference = reference_value(spec, q).value();
    for (std::size_t l = 0; l < values.size(); ++l) {
        ConvergenceRow row;
        row.level = levels[l].level;
        row.h = levels[l].h_max;
        row.nodes = levels[l].nodes;
        row.value = values[l];
        row.error = std::abs(values[l] - t.reference);
        if (l >= 1 && row.error > 0 && t.rows.back().error > 0) row.order = std::log2(t.rows.back().error / row.error);
        if (l >= 2) {
            const double d_prev = values[l - 1] - values[l - 2];
            const double d = values[l] - values[l - 1];
            if (d != 0.0 && d_prev / d > 0) row.richardson_order = std::log2(d_prev / d);
        }
        t.rows.push_back(row);
    }
    if (!t.rows.empty()) t.estimated_order = t.rows.back().richardson_order;
    if (q == Quantity::lambda1) {
        bool monotone = true;
        // nested P1 spaces: the discrete eigenvalue can only decrease, up to the eigensolver tolerance
        for (std::size_t l = 1; l < values.size(); ++l) monotone = monotone && values[l] <= values[l - 1] * (1.0 + 1e-8);
        t.monotone = monotone;
    }
    return t;
}

const char* quantity_key(Quantity q) {
    switch (q) {
        case Quantity::lambda1: return "lambda1";
        case Quantity::sup_norm: return "sup_norm";
        case Quantity::rigidity: return "rigidity";
    }
    return "";
}

MeshPtr level_mesh(const TriangleMesh& base, int level) {
    return std::make_shared<const TriangleMesh>(refine(base, level));
}

}  // namespace

Quantity parse_quantity(std::string_view name) {
    if (name == "lambda1") return Quantity::lambda1;
    if (name == "sup_norm") return Quantity::sup_norm;
    if (name == "rigidity") return Quantity::rigidity;
    throw ConfigError("quantity", "expected lambda1, sup_norm or rigidity, got '" + std::string(name) + "'");
}

std::string_view to_string(Quantity q) { return quantity_key(q); }

std::string_view tool_version() { return TORSIONLAB_VERSION; }

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // splitmix64 finalizer over the combination
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (h | 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Summary summarize(const std::vector<CaseRecord>& cases, int finest_level) {
    Summary s;
    for (const CaseRecord& c : cases) {
        if (!c.error.empty()) ++s.case_errors;
        for (const BoundVerdict& v : c.verdicts) {
            ++s.verdicts;
            if (v.satisfied) {
                ++s.satisfied;
                continue;
            }
            ++s.violated;
            if (c.level >= finest_level)
                ++s.violated_finest;
            else
                ++s.warnings;
        }
    }
    return s;
}

int Report::exit_code() const {
    if (summary.case_errors > 0) return 2;
    if (summary.violated_finest > 0) return 1;
    return 0;
}

Report run_suite(const RunConfig& config, const RunOptions& options) {
    config.validate();
    std::mutex log_mutex;
    auto log = [&](const std::string& msg) {
        if (!options.log) return;
        std::lock_guard lock(log_mutex);
        options.log(msg);
    };

    Report report;
    report.tool_version = std::string(tool_version());
    report.timestamp = utc_timestamp();
    report.config = to_json(config);

    const std::size_t n_domains = config.corpus.size();
    const int levels = config.refinement_levels;
    std::vector<PolygonalDomain> domains(n_domains);
    std::vector<std::optional<TriangleMesh>> bases(n_domains);
    report.domains.resize(n_domains);
    for (std::size_t d = 0; d < n_domains; ++d) {
        const DomainSpec& spec = config.corpus[d];
        DomainRecord& rec = report.domains[d];
        rec.label = spec.label;
        rec.kind = std::string(to_string(spec.kind));
        rec.params = spec.params;
        try {
            domains[d] = spec.build();
            const Measures m = measures(domains[d]);
            rec.area = m.area;
            rec.perimeter = m.boundary_length;
            rec.diameter = domains[d].diameter();
            bases[d] = triangulate(domains[d], config.base_h);
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
    }

    struct Unit {
        std::size_t domain;
        int level;
    };
    std::vector<Unit> units;
    for (std::size_t d = 0; d < n_domains; ++d)
        if (bases[d])
            for (int l = 0; l < levels; ++l) units.push_back({d, l});

    std::vector<UnitResult> results(units.size());
    auto run_unit = [&](std::size_t i) {
        const Unit& u = units[i];
        const DomainSpec& spec = config.corpus[u.domain];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            MeshPtr mesh = level_mesh(*bases[u.domain], u.level);
            if (options.mesh_dir) {
                std::filesystem::create_directories(*options.mesh_dir);
                std::ofstream out(*options.mesh_dir / (sanitize(spec.label) + "_L" + std::to_string(u.level) + ".mesh"));
                write_mesh(out, *mesh);
                if (!out) throw Error("cannot write mesh file in " + options.mesh_dir->string());
            }
            UnitRunner runner(config, spec, domains[u.domain], std::move(mesh), u.level);
            results[i] = runner.run();
        } catch (const std::exception& e) {
            CaseRecord r = make_record(spec.label, u.level, "mesh", "");
            r.error = e.what();
            results[i].cases.push_back(std::move(r));
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream msg;
        msg << spec.label << " level " << u.level;
        if (results[i].info) msg << " (" << results[i].info->nodes << " nodes)";
        msg << " done in " << fmt(std::round(dt * 100) / 100) << " s";
        log(msg.str());
    };

    const int workers = std::clamp(options.workers.value_or(config.workers), 1, std::max<int>(1, static_cast<int>(units.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < units.size(); ++i) run_unit(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < units.size(); i = next++) run_unit(i);
            });
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < units.size(); ++i) {
        UnitResult& r = results[i];
        if (r.info) report.domains[units[i].domain].levels.push_back(*r.info);
        for (CaseRecord& c : r.cases) report.cases.push_back(std::move(c));
        for (WosProbe& w : r.wos) report.wos.push_back(std::move(w));
        for (CrossSection& s : r.sections) report.cross_sections.push_back(std::move(s));
    }
    for (std::size_t d = 0; d < n_domains; ++d) {
        if (!report.domains[d].error.empty()) {
            CaseRecord r = make_record(config.corpus[d].label, 0, "mesh", "");
            r.error = report.domains[d].error;
            report.cases.push_back(std::move(r));
        }
    }

    for (CaseRecord& c : ratio_stability_records(config, report.cases)) report.cases.push_back(std::move(c));
    for (CaseRecord& c : ball_limit_records(config)) report.cases.push_back(std::move(c));

    if (levels >= 3) {
        for (std::size_t d = 0; d < n_domains; ++d) {
            const DomainSpec& spec = config.corpus[d];
            if (!reference_value(spec, Quantity::lambda1)) continue;
            for (Quantity q : {Quantity::lambda1, Quantity::sup_norm, Quantity::rigidity}) {
                std::vector<double> values;
                for (const CaseRecord& c : report.cases)
                    if (c.domain == spec.label && c.stage == "dirichlet_torsion" && c.error.empty())
                        values.push_back(c.values.at(quantity_key(q)));
                if (values.size() != report.domains[d].levels.size() || values.size() < 3) continue;
                report.convergence.push_back(build_table(spec, q, report.domains[d].levels, values));
            }
        }
    }

    report.summary = summarize(report.cases, levels - 1);
    return report;
}

ConvergenceTable convergence_study(const RunConfig& config, Quantity quantity) {
    if (config.refinement_levels < 3) throw ConfigError("refinement_levels", "a convergence study needs at least 3 levels");
    const DomainSpec* spec = nullptr;
    for (const DomainSpec& d : config.corpus)
        if (reference_value(d, quantity)) {
            spec = &d;
            break;
        }
    if (!spec) throw ConfigError("corpus", "a convergence study needs a disk_polygon or unit_square domain");
    const PolygonalDomain domain = spec->build();
    const TriangleMesh base = triangulate(domain, config.base_h);
    std::vector<LevelInfo> levels;
    std::vector<double> values;
    for (int l = 0; l < config.refinement_levels; ++l) {
        const FemSystem fem(level_mesh(base, l));
        const TorsionSolution sol = solve_torsion(fem, BoundaryCondition::dirichlet());
        LevelInfo info;
        info.level = l;
        info.h_target = config.base_h * std::ldexp(1.0, -l);
        info.nodes = fem.mesh->node_count();
        info.triangles = fem.mesh->triangle_count();
        info.h_max = longest_edge(*fem.mesh);
        levels.push_back(info);
        switch (quantity) {
            case Quantity::lambda1: values.push_back(sol.lambda1); break;
            case Quantity::sup_norm: values.push_back(sol.sup_norm); break;
            case Quantity::rigidity: values.push_back(torsional_rigidity(sol)); break;
        }
    }
    return build_table(*spec, quantity, levels, values);
}

}  // namespace torsionlab::harness
