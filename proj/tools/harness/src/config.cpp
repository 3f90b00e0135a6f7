#include "torsionlab/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace torsionlab::harness {

using nlohmann::json;

namespace {

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

/// Walks a JSON document keeping the pointer of the current node for errors.
class Reader {
public:
    Reader(const json& node, std::string pointer, std::string_view source)
        : node_(node), pointer_(std::move(pointer)), source_(source) {}

    [[noreturn]] void fail(const std::string& reason) const {
        throw ConfigError(std::string(source_) + ":" + (pointer_.empty() ? "/" : pointer_), reason);
    }

    Reader child(std::string_view key) const { return {node_.at(std::string(key)), pointer_ + "/" + std::string(key), source_}; }
    Reader element(std::size_t i) const { return {node_.at(i), pointer_ + "/" + std::to_string(i), source_}; }

    bool has(std::string_view key) const { return node_.contains(std::string(key)); }

    void require_object(std::initializer_list<std::string_view> allowed) const {
        if (!node_.is_object()) fail("expected an object");
        for (const auto& [key, value] : node_.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                Reader(value, pointer_ + "/" + key, source_).fail("unknown key '" + key + "'");
        }
    }

    std::size_t array_size() const {
        if (!node_.is_array()) fail("expected an array");
        return node_.size();
    }

    double number() const {
        if (!node_.is_number()) fail("expected a number");
        const double v = node_.get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }

    long long integer() const {
        if (!node_.is_number_integer()) fail("expected an integer");
        return node_.get<long long>();
    }

    std::uint64_t unsigned_integer() const {
        if (node_.is_number_unsigned()) return node_.get<std::uint64_t>();
        if (node_.is_number_integer() && node_.get<long long>() >= 0) return static_cast<std::uint64_t>(node_.get<long long>());
        fail("expected a nonnegative integer");
    }

    std::string string() const {
        if (!node_.is_string()) fail("expected a string");
        return node_.get<std::string>();
    }

    bool boolean() const {
        if (!node_.is_boolean()) fail("expected true or false");
        return node_.get<bool>();
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < array_size(); ++i) out.push_back(element(i).number());
        return out;
    }

private:
    const json& node_;
    std::string pointer_;
    std::string_view source_;
};

int bounded_int(const Reader& r, long long lo, long long hi) {
    const long long v = r.integer();
    if (v < lo || v > hi) r.fail("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

void check_tolerance(std::string_view field, double v) {
    if (!(v > 0.0 && v <= 0.1)) throw ConfigError(std::string("tolerances.") + std::string(field), "must lie in (0, 0.1]");
}

}  // namespace

PolygonalDomain DomainSpec::build() const {
    PolygonalDomain d = make_canonical_domain(kind, params);
    d.name = label;
    return d;
}

std::string DomainSpec::default_label(CanonicalKind kind, const std::vector<double>& params) {
    std::string s(to_string(kind));
    if (params.empty()) return s;
    s += "(";
    for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + format_number(params[i]);
    return s + ")";
}

DomainSpec default_domain(std::string_view name) {
    DomainSpec spec;
    if (name == "disk") name = "disk_polygon";
    if (name == "square") name = "unit_square";
    if (name == "annulus") name = "annulus_polygon";
    spec.kind = parse_canonical_kind(name);
    switch (spec.kind) {
        case CanonicalKind::unit_square: break;
        case CanonicalKind::rectangle: spec.params = {2.0, 1.0}; break;
        case CanonicalKind::disk_polygon: spec.params = {1.0, 256.0}; break;
        case CanonicalKind::annulus_polygon: spec.params = {0.5, 1.0, 256.0}; break;
        case CanonicalKind::l_shape: spec.params = {1.0}; break;
    }
    spec.label = DomainSpec::default_label(spec.kind, spec.params);
    return spec;
}

double RunConfig::small_b() const {
    if (limit_b) return *limit_b;
    return b_values.empty() ? 0.0 : *std::min_element(b_values.begin(), b_values.end());
}

void RunConfig::validate() const {
    if (corpus.empty()) throw ConfigError("corpus", "must not be empty");
    std::set<std::string> labels;
    for (const DomainSpec& d : corpus) {
        if (d.label.empty()) throw ConfigError("corpus", "domain label must not be empty");
        if (!labels.insert(d.label).second) throw ConfigError("corpus", "duplicate domain label '" + d.label + "'");
        try {
            d.build().validate();
        } catch (const InvalidParameter& e) {
            throw ConfigError("corpus", d.label + ": " + e.what());
        }
    }
    if (b_values.empty()) throw ConfigError("b_values", "must not be empty");
    for (double b : b_values)
        if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("b_values", "entries must be finite and strictly positive");
    if (limit_b && !(*limit_b > 0.0)) throw ConfigError("limit_b", "must be strictly positive");
    if (p_values.empty()) throw ConfigError("p_values", "must not be empty");
    for (double p : p_values)
        if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p_values", "entries must be finite and greater than 1");
    if (refinement_levels < 1) throw ConfigError("refinement_levels", "must be at least 1");
    if (!(base_h > 0.0)) throw ConfigError("base_h", "must be strictly positive");
    if (eigen_count < 1) throw ConfigError("eigen_count", "must be at least 1");
    if (heat_times.empty()) throw ConfigError("heat_times", "must not be empty");
    for (double t : heat_times)
        if (!(t > 0.0)) throw ConfigError("heat_times", "entries must be strictly positive");
    if (inequality_samples < 0) throw ConfigError("inequality_samples", "must be nonnegative");
    if (caccioppoli_cutoffs < 0) throw ConfigError("caccioppoli_cutoffs", "must be nonnegative");
    if (levelset_intervals < 16) throw ConfigError("levelset_intervals", "must be at least 16");
    if (wos.n_walks < 1) throw ConfigError("wos.n_walks", "must be at least 1");
    if (wos.probes < 0) throw ConfigError("wos.probes", "must be nonnegative");
    if (wos.step_cap < 1) throw ConfigError("wos.step_cap", "must be at least 1");
    check_tolerance("bounds", tolerances.bounds);
    check_tolerance("small_b_limit", tolerances.small_b_limit);
    check_tolerance("wos_agreement", tolerances.wos_agreement);
    check_tolerance("levelset_grid", tolerances.levelset_grid);
    check_tolerance("ratio_stability", tolerances.ratio_stability);
    for (const std::string& f : formats)
        if (f != "json" && f != "csv" && f != "svg") throw ConfigError("formats", "unknown format '" + f + "'");
    if (workers < 1) throw ConfigError("workers", "must be at least 1");
}

RunConfig default_config(std::uint64_t seed) {
    RunConfig c;
    for (const char* name : {"unit_square", "rectangle", "disk_polygon", "annulus_polygon", "l_shape"})
        c.corpus.push_back(default_domain(name));
    c.b_values = {0.1, 1.0, 10.0};
    c.limit_b = 1e-3;
    c.p_values = {1.5, 2.0, 3.0};
    c.seed = seed;
    return c;
}

RunConfig parse_config(const json& doc, std::string_view source) {
    const Reader root(doc, "", source);
    root.require_object({"corpus", "b_values", "p_values", "limit_b", "refinement_levels", "base_h", "eigen_count",
                         "heat_times", "inequality_samples", "caccioppoli_cutoffs", "levelset_intervals", "wos",
                         "tolerances", "seed", "output_dir", "formats", "write_meshes", "workers"});
    RunConfig c;
    if (!root.has("seed")) root.fail("missing required key 'seed'");
    c.seed = root.child("seed").unsigned_integer();

    if (!root.has("corpus")) root.fail("missing required key 'corpus'");
    const Reader corpus = root.child("corpus");
    for (std::size_t i = 0; i < corpus.array_size(); ++i) {
        const Reader entry = corpus.element(i);
        entry.require_object({"kind", "params", "label"});
        if (!entry.has("kind")) entry.fail("missing required key 'kind'");
        DomainSpec spec;
        try {
            spec.kind = parse_canonical_kind(entry.child("kind").string());
        } catch (const InvalidParameter& e) {
            entry.child("kind").fail(e.what());
        }
        if (entry.has("params")) spec.params = entry.child("params").numbers();
        spec.label = entry.has("label") ? entry.child("label").string() : DomainSpec::default_label(spec.kind, spec.params);
        c.corpus.push_back(std::move(spec));
    }

    for (const char* key : {"b_values", "p_values"})
        if (!root.has(key)) root.fail(std::string("missing required key '") + key + "'");
    c.b_values = root.child("b_values").numbers();
    c.p_values = root.child("p_values").numbers();
    if (root.has("limit_b")) c.limit_b = root.child("limit_b").number();
    if (root.has("refinement_levels")) c.refinement_levels = bounded_int(root.child("refinement_levels"), 1, 8);
    if (root.has("base_h")) c.base_h = root.child("base_h").number();
    if (root.has("eigen_count")) c.eigen_count = bounded_int(root.child("eigen_count"), 1, 200);
    if (root.has("heat_times")) c.heat_times = root.child("heat_times").numbers();
    if (root.has("inequality_samples")) c.inequality_samples = bounded_int(root.child("inequality_samples"), 0, 10'000'000);
    if (root.has("caccioppoli_cutoffs")) c.caccioppoli_cutoffs = bounded_int(root.child("caccioppoli_cutoffs"), 0, 1'000'000);
    if (root.has("levelset_intervals")) c.levelset_intervals = bounded_int(root.child("levelset_intervals"), 16, 1'000'000);

    if (root.has("wos")) {
        const Reader w = root.child("wos");
        w.require_object({"n_walks", "eps_shell", "seed", "probes", "step_cap"});
        if (w.has("n_walks")) c.wos.n_walks = bounded_int(w.child("n_walks"), 1, 100'000'000);
        if (w.has("eps_shell")) c.wos.eps_shell = w.child("eps_shell").number();
        if (w.has("seed")) c.wos.seed = w.child("seed").unsigned_integer();
        if (w.has("probes")) c.wos.probes = bounded_int(w.child("probes"), 0, 1000);
        if (w.has("step_cap")) c.wos.step_cap = bounded_int(w.child("step_cap"), 1, 100'000'000);
    }
    if (root.has("tolerances")) {
        const Reader t = root.child("tolerances");
        t.require_object({"bounds", "small_b_limit", "wos_agreement", "levelset_grid", "ratio_stability"});
        if (t.has("bounds")) c.tolerances.bounds = t.child("bounds").number();
        if (t.has("small_b_limit")) c.tolerances.small_b_limit = t.child("small_b_limit").number();
        if (t.has("wos_agreement")) c.tolerances.wos_agreement = t.child("wos_agreement").number();
        if (t.has("levelset_grid")) c.tolerances.levelset_grid = t.child("levelset_grid").number();
        if (t.has("ratio_stability")) c.tolerances.ratio_stability = t.child("ratio_stability").number();
    }
    if (root.has("output_dir")) c.output_dir = root.child("output_dir").string();
    if (root.has("formats")) {
        const Reader f = root.child("formats");
        c.formats.clear();
        for (std::size_t i = 0; i < f.array_size(); ++i) c.formats.push_back(f.element(i).string());
    }
    if (root.has("write_meshes")) c.write_meshes = root.child("write_meshes").boolean();
    if (root.has("workers")) c.workers = bounded_int(root.child("workers"), 1, 1024);

    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(source) + ":" + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), std::string("parse error at byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    return parse_config(doc, path.string());
}

json to_json(const RunConfig& c) {
    json corpus = json::array();
    for (const DomainSpec& d : c.corpus) corpus.push_back({{"kind", std::string(to_string(d.kind))}, {"params", d.params}, {"label", d.label}});
    json wos = {{"n_walks", c.wos.n_walks}, {"eps_shell", c.wos.eps_shell}, {"probes", c.wos.probes}, {"step_cap", c.wos.step_cap}};
    if (c.wos.seed) wos["seed"] = *c.wos.seed;
    json out = {
        {"corpus", corpus},
        {"b_values", c.b_values},
        {"p_values", c.p_values},
        {"refinement_levels", c.refinement_levels},
        {"base_h", c.base_h},
        {"eigen_count", c.eigen_count},
        {"heat_times", c.heat_times},
        {"inequality_samples", c.inequality_samples},
        {"caccioppoli_cutoffs", c.caccioppoli_cutoffs},
        {"levelset_intervals", c.levelset_intervals},
        {"wos", wos},
        {"tolerances",
         {{"bounds", c.tolerances.bounds},
          {"small_b_limit", c.tolerances.small_b_limit},
          {"wos_agreement", c.tolerances.wos_agreement},
          {"levelset_grid", c.tolerances.levelset_grid},
          {"ratio_stability", c.tolerances.ratio_stability}}},
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"formats", c.formats},
        {"write_meshes", c.write_meshes},
        {"workers", c.workers},
    };
    if (c.limit_b) out["limit_b"] = *c.limit_b;
    return out;
}

}  // namespace torsionlab::harness
