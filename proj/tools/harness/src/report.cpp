#include "torsionlab/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace torsionlab::harness {

using nlohmann::json;

namespace {

json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double get_num(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw Error("report: expected a number, got '" + s + "'");
    }
    return j.get<double>();
}

json opt_num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::optional<double> get_opt(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get_num(j.at(key));
}

json vec_json(Vec2 v) { return json::array({num(v.x), num(v.y)}); }
Vec2 get_vec(const json& j) { return {get_num(j.at(0)), get_num(j.at(1))}; }

json verdict_json(const BoundVerdict& v) {
    json inputs = json::array();
    for (const auto& [k, x] : v.inputs) inputs.push_back(json::array({k, num(x)}));
    return {{"name", v.name},          {"anchor", v.anchor},       {"lhs", num(v.lhs)},
            {"rhs", num(v.rhs)},       {"margin", num(v.margin)},  {"satisfied", v.satisfied},
            {"tolerance", num(v.tolerance)}, {"inputs", inputs},   {"note", v.note}};
}

BoundVerdict verdict_from(const json& j) {
    BoundVerdict v;
    v.name = j.at("name").get<std::string>();
    v.anchor = j.at("anchor").get<std::string>();
    v.lhs = get_num(j.at("lhs"));
    v.rhs = get_num(j.at("rhs"));
    v.margin = get_num(j.at("margin"));
    v.satisfied = j.at("satisfied").get<bool>();
    v.tolerance = get_num(j.at("tolerance"));
    for (const json& in : j.at("inputs")) v.inputs.emplace_back(in.at(0).get<std::string>(), get_num(in.at(1)));
    v.note = j.at("note").get<std::string>();
    return v;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::string full(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string short_num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string sanitize(std::string_view s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
    return out;
}

}  // namespace

json report_to_json(const Report& report) {
    json domains = json::array();
    for (const DomainRecord& d : report.domains) {
        json levels = json::array();
        for (const LevelInfo& l : d.levels)
            levels.push_back({{"level", l.level},
                              {"h_target", num(l.h_target)},
                              {"nodes", l.nodes},
                              {"triangles", l.triangles},
                              {"h_max", num(l.h_max)},
                              {"min_angle_deg", num(l.min_angle_deg)},
                              {"area", num(l.area)},
                              {"perimeter", num(l.perimeter)}});
        json params = json::array();
        for (double p : d.params) params.push_back(num(p));
        domains.push_back({{"label", d.label},
                           {"kind", d.kind},
                           {"params", params},
                           {"area", num(d.area)},
                           {"perimeter", num(d.perimeter)},
                           {"diameter", num(d.diameter)},
                           {"levels", levels},
                           {"error", d.error}});
    }
    json cases = json::array();
    for (const CaseRecord& c : report.cases) {
        json values = json::object();
        for (const auto& [k, v] : c.values) values[k] = num(v);
        json verdicts = json::array();
        for (const BoundVerdict& v : c.verdicts) verdicts.push_back(verdict_json(v));
        cases.push_back({{"domain", c.domain},
                         {"level", c.level},
                         {"stage", c.stage},
                         {"bc", c.bc},
                         {"b", opt_num(c.b)},
                         {"p", opt_num(c.p)},
                         {"values", values},
                         {"verdicts", verdicts},
                         {"error", c.error}});
    }
    json wos = json::array();
    for (const WosProbe& w : report.wos)
        wos.push_back({{"domain", w.domain},
                       {"level", w.level},
                       {"point", vec_json(w.point)},
                       {"fem", num(w.fem)},
                       {"wos_mean", num(w.wos_mean)},
                       {"wos_standard_error", num(w.wos_standard_error)},
                       {"n_walks", w.n_walks},
                       {"capped_walks", w.capped_walks},
                       {"eps_shell", num(w.eps_shell)}});
    json sections = json::array();
    for (const CrossSection& s : report.cross_sections) {
        json ss = json::array();
        json vs = json::array();
        for (double x : s.s) ss.push_back(num(x));
        for (const auto& v : s.values) vs.push_back(opt_num(v));
        sections.push_back({{"domain", s.domain},
                            {"bc", s.bc},
                            {"level", s.level},
                            {"start", vec_json(s.start)},
                            {"end", vec_json(s.end)},
                            {"s", ss},
                            {"values", vs}});
    }
    json convergence = json::array();
    for (const ConvergenceTable& t : report.convergence) {
        json rows = json::array();
        for (const ConvergenceRow& r : t.rows)
            rows.push_back({{"level", r.level},
                            {"h", num(r.h)},
                            {"nodes", r.nodes},
                            {"value", num(r.value)},
                            {"error", num(r.error)},
                            {"order", opt_num(r.order)},
                            {"richardson_order", opt_num(r.richardson_order)}});
        convergence.push_back({{"domain", t.domain},
                               {"quantity", t.quantity},
                               {"bc", t.bc},
                               {"reference", num(t.reference)},
                               {"rows", rows},
                               {"estimated_order", opt_num(t.estimated_order)},
                               {"monotone", t.monotone ? json(*t.monotone) : json(nullptr)},
                               {"error", t.error}});
    }
    const Summary& s = report.summary;
    return {{"tool", "torsionlab"},
            {"tool_version", report.tool_version},
            {"timestamp", report.timestamp},
            {"config", report.config},
            {"domains", domains},
            {"cases", cases},
            {"wos", wos},
            {"cross_sections", sections},
            {"convergence", convergence},
            {"summary",
             {{"verdicts", s.verdicts},
              {"satisfied", s.satisfied},
              {"violated", s.violated},
              {"violated_finest", s.violated_finest},
              {"warnings", s.warnings},
              {"case_errors", s.case_errors},
              {"exit_code", report.exit_code()}}}};
}

Report report_from_json(const json& doc) {
    Report r;
    r.tool_version = doc.at("tool_version").get<std::string>();
    r.timestamp = doc.at("timestamp").get<std::string>();
    r.config = doc.at("config");
    for (const json& d : doc.at("domains")) {
        DomainRecord rec;
        rec.label = d.at("label").get<std::string>();
        rec.kind = d.at("kind").get<std::string>();
        for (const json& p : d.at("params")) rec.params.push_back(get_num(p));
        rec.area = get_num(d.at("area"));
        rec.perimeter = get_num(d.at("perimeter"));
        rec.diameter = get_num(d.at("diameter"));
        rec.error = d.at("error").get<std::string>();
        for (const json& l : d.at("levels")) {
            LevelInfo info;
            info.level = l.at("level").get<int>();
            info.h_target = get_num(l.at("h_target"));
            info.nodes = l.at("nodes").get<std::size_t>();
            info.triangles = l.at("triangles").get<std::size_t>();
            info.h_max = get_num(l.at("h_max"));
            info.min_angle_deg = get_num(l.at("min_angle_deg"));
            info.area = get_num(l.at("area"));
            info.perimeter = get_num(l.at("perimeter"));
            rec.levels.push_back(info);
        }
        r.domains.push_back(std::move(rec));
    }
    for (const json& c : doc.at("cases")) {
        CaseRecord rec;
        rec.domain = c.at("domain").get<std::string>();
        rec.level = c.at("level").get<int>();
        rec.stage = c.at("stage").get<std::string>();
        rec.bc = c.at("bc").get<std::string>();
        rec.b = get_opt(c, "b");
        rec.p = get_opt(c, "p");
        for (const auto& [k, v] : c.at("values").items()) rec.values[k] = get_num(v);
        for (const json& v : c.at("verdicts")) rec.verdicts.push_back(verdict_from(v));
        rec.error = c.at("error").get<std::string>();
        r.cases.push_back(std::move(rec));
    }
    for (const json& w : doc.at("wos")) {
        WosProbe p;
        p.domain = w.at("domain").get<std::string>();
        p.level = w.at("level").get<int>();
        p.point = get_vec(w.at("point"));
        p.fem = get_num(w.at("fem"));
        p.wos_mean = get_num(w.at("wos_mean"));
        p.wos_standard_error = get_num(w.at("wos_standard_error"));
        p.n_walks = w.at("n_walks").get<int>();
        p.capped_walks = w.at("capped_walks").get<int>();
        p.eps_shell = get_num(w.at("eps_shell"));
        r.wos.push_back(p);
    }
    for (const json& s : doc.at("cross_sections")) {
        CrossSection cs;
        cs.domain = s.at("domain").get<std::string>();
        cs.bc = s.at("bc").get<std::string>();
        cs.level = s.at("level").get<int>();
        cs.start = get_vec(s.at("start"));
        cs.end = get_vec(s.at("end"));
        for (const json& x : s.at("s")) cs.s.push_back(get_num(x));
        for (const json& v : s.at("values")) cs.values.push_back(v.is_null() ? std::nullopt : std::optional<double>(get_num(v)));
        r.cross_sections.push_back(std::move(cs));
    }
    for (const json& t : doc.at("convergence")) {
        ConvergenceTable table;
        table.domain = t.at("domain").get<std::string>();
        table.quantity = t.at("quantity").get<std::string>();
        table.bc = t.at("bc").get<std::string>();
        table.reference = get_num(t.at("reference"));
        table.estimated_order = get_opt(t, "estimated_order");
        if (!t.at("monotone").is_null()) table.monotone = t.at("monotone").get<bool>();
        table.error = t.at("error").get<std::string>();
        for (const json& row : t.at("rows")) {
            ConvergenceRow cr;
            cr.level = row.at("level").get<int>();
            cr.h = get_num(row.at("h"));
            cr.nodes = row.at("nodes").get<std::size_t>();
            cr.value = get_num(row.at("value"));
            cr.error = get_num(row.at("error"));
            cr.order = get_opt(row, "order");
            cr.richardson_order = get_opt(row, "richardson_order");
            table.rows.push_back(cr);
        }
        r.convergence.push_back(std::move(table));
    }
    const json& s = doc.at("summary");
    r.summary.verdicts = s.at("verdicts").get<int>();
    r.summary.satisfied = s.at("satisfied").get<int>();
    r.summary.violated = s.at("violated").get<int>();
    r.summary.violated_finest = s.at("violated_finest").get<int>();
    r.summary.warnings = s.at("warnings").get<int>();
    r.summary.case_errors = s.at("case_errors").get<int>();
    return r;
}

std::string report_csv(const Report& report) {
    std::ostringstream os;
    os << "name,anchor,domain,b,p,level,lhs,rhs,margin,satisfied\n";
    for (const CaseRecord& c : report.cases)
        for (const BoundVerdict& v : c.verdicts)
            os << csv_field(v.name) << ',' << csv_field(v.anchor) << ',' << csv_field(c.domain) << ','
               << (c.b ? full(*c.b) : "") << ',' << (c.p ? full(*c.p) : "") << ',' << c.level << ',' << full(v.lhs) << ','
               << full(v.rhs) << ',' << full(v.margin) << ',' << (v.satisfied ? "true" : "false") << '\n';
    return os.str();
}

std::string domain_svg(const Report& report, const std::string& domain) {
    constexpr double width = 720;
    constexpr double panel = 300;
    constexpr double pad = 50;
    std::vector<const CrossSection*> sections;
    for (const CrossSection& s : report.cross_sections)
        if (s.domain == domain) sections.push_back(&s);

    int finest = -1;
    for (const CaseRecord& c : report.cases)
        if (c.domain == domain) finest = std::max(finest, c.level);
    std::map<std::string, std::pair<double, bool>> worst;  // anchor -> (relative margin, satisfied)
    for (const CaseRecord& c : report.cases) {
        if (c.domain != domain || c.level != finest) continue;
        for (const BoundVerdict& v : c.verdicts) {
            const double rel = v.margin / std::max(std::abs(v.rhs), 1e-300);
            auto [it, inserted] = worst.try_emplace(v.anchor, rel, v.satisfied);
            if (!inserted && rel < it->second.first) it->second = {rel, v.satisfied};
        }
    }

    const double bar_height = 22;
    const double chart_height = pad + bar_height * std::max<std::size_t>(worst.size(), 1) + pad;
    const double height = pad + panel + chart_height;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << pad << "\" y=\"24\" font-size=\"15\">" << xml_escape(domain) << ": torsion function along the centre line</text>\n";

    // cross-section panel
    const double x0 = pad + 20;
    const double x1 = width - pad;
    const double y0 = pad;
    const double y1 = pad + panel - 30;
    double smax = 0.0;
    double vmax = 0.0;
    for (const CrossSection* s : sections) {
        if (!s->s.empty()) smax = std::max(smax, s->s.back());
        for (const auto& v : s->values)
            if (v) vmax = std::max(vmax, *v);
    }
    if (smax <= 0) smax = 1;
    if (vmax <= 0) vmax = 1;
    os << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << x1 - x0 << "\" height=\"" << y1 - y0
       << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<text x=\"" << x0 - 6 << "\" y=\"" << y0 + 4 << "\" text-anchor=\"end\">" << short_num(vmax) << "</text>\n";
    os << "<text x=\"" << x0 - 6 << "\" y=\"" << y1 << "\" text-anchor=\"end\">0</text>\n";
    os << "<text x=\"" << x1 << "\" y=\"" << y1 + 16 << "\" text-anchor=\"end\">" << short_num(smax) << "</text>\n";
    const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (std::size_t k = 0; k < sections.size(); ++k) {
        const CrossSection& s = *sections[k];
        const char* colour = colours[k % 4];
        std::string path;
        bool pen = false;
        for (std::size_t i = 0; i < s.s.size(); ++i) {
            if (!s.values[i]) {
                pen = false;
                continue;
            }
            const double px = x0 + (x1 - x0) * s.s[i] / smax;
            const double py = y1 - (y1 - y0) * *s.values[i] / vmax;
            path += (pen ? " L" : " M") + short_num(px) + " " + short_num(py);
            pen = true;
        }
        os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << x0 + 10 << "\" y=\"" << y0 + 18 + 16 * k << "\" fill=\"" << colour << "\">"
           << xml_escape(s.bc) << ", level " << s.level << "</text>\n";
    }

    // margin chart
    const double cy = pad + panel;
    os << "<text x=\"" << pad << "\" y=\"" << cy + 10
       << "\" font-size=\"15\">smallest relative margin (rhs - lhs) / |rhs| per inequality, level " << finest << "</text>\n";
    const double label_w = 260;
    const double bx0 = pad + label_w;
    const double bx1 = width - pad;
    double lo = 0.0;
    for (const auto& [anchor, w] : worst) lo = std::min(lo, std::max(w.first, -1.0));
    const double scale = (bx1 - bx0) / (1.0 - lo);
    const double zero = bx0 - lo * scale;
    std::size_t row = 0;
    for (const auto& [anchor, w] : worst) {
        const double y = cy + 30 + bar_height * row++;
        const double v = std::clamp(w.first, -1.0, 1.0);
        const double xa = std::min(zero, zero + v * scale);
        os << "<text x=\"" << bx0 - 8 << "\" y=\"" << y + 14 << "\" text-anchor=\"end\">" << xml_escape(anchor) << "</text>\n";
        os << "<rect x=\"" << short_num(xa) << "\" y=\"" << y + 3 << "\" width=\"" << short_num(std::max(std::abs(v) * scale, 1.0))
           << "\" height=\"" << bar_height - 6 << "\" fill=\"" << (w.second ? "#4c9a2a" : "#c0392b") << "\"/>\n";
        os << "<text x=\"" << short_num(std::max(zero, zero + v * scale) + 4) << "\" y=\"" << y + 14 << "\">"
           << short_num(w.first) << "</text>\n";
    }
    os << "<line x1=\"" << zero << "\" y1=\"" << cy + 26 << "\" x2=\"" << zero << "\" y2=\"" << cy + 34 + bar_height * row
       << "\" stroke=\"#333\"/>\n";
    os << "</svg>\n";
    return os.str();
}

std::vector<std::filesystem::path> emit_report(const Report& report, const std::filesystem::path& dir,
                                               const std::vector<std::string>& formats) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    auto write = [&](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path);
        out << text;
        out.close();
        if (!out) throw Error("cannot write " + path.string());
        written.push_back(path);
    };
    for (const std::string& f : formats) {
        if (f == "json") {
            write(dir / "report.json", report_to_json(report).dump(2) + "\n");
        } else if (f == "csv") {
            write(dir / "verdicts.csv", report_csv(report));
        } else if (f == "svg") {
            for (const DomainRecord& d : report.domains) write(dir / (sanitize(d.label) + ".svg"), domain_svg(report, d.label));
        } else {
            throw InvalidParameter("unknown report format '" + f + "'");
        }
    }
    return written;
}

}  // namespace torsionlab::harness
