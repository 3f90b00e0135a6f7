// Constrained Delaunay triangulation with Ruppert refinement.
//
// The triangulation lives inside a large super-triangle so that every
// inserted point has a containing triangle. Input segments are recovered by
// midpoint splitting (conforming recovery), then marked as constrained so
// Lawson flips never remove them. Triangles are classified inside/outside by
// flood fill across unconstrained edges; only inside triangles are refined.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include "torsionlab/errors.hpp"
#include "torsionlab/mesh.hpp"

namespace torsionlab {

namespace {

constexpr int next(int i) { return (i + 1) % 3; }
constexpr int prev(int i) { return (i + 2) % 3; }

double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    return alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) + clift * (adx * bdy - ady * bdx);
}

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 ab = b - a;
    const Vec2 ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = dot(ab, ab);
    const double ac2 = dot(ac, ac);
    return a + Vec2{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
}

double min_angle(Vec2 a, Vec2 b, Vec2 c) {
    const double la = norm(b - c), lb = norm(c - a), lc = norm(a - b);
    auto angle = [](double opp, double s1, double s2) {
        const double cosv = std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2 * s1 * s2), -1.0, 1.0);
        return std::acos(cosv);
    };
    return std::min({angle(la, lb, lc), angle(lb, la, lc), angle(lc, la, lb)});
}

struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> nbr{-1, -1, -1};  // nbr[e] lies across the edge opposite v[e]
    std::array<bool, 3> fixed{};
    bool inside = false;
};

struct Segment {
    int a = 0;
    int b = 0;
    int loop = 0;
    bool alive = true;
};

struct Location {
    int tri = -1;
    int edge = -1;    // >= 0 when the point lies on this edge
    int vertex = -1;  // >= 0 when the point coincides with an existing vertex
};

class Refiner {
public:
    Refiner(const PolygonalDomain& domain, double h_target, const TriangulateOptions& options)
        : domain_(domain), h_target_(h_target), options_(options) {
        Vec2 lo = domain.outer.front(), hi = lo;
        for (Vec2 p : domain.outer) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        scale_ = std::max(hi.x - lo.x, hi.y - lo.y);
        const Vec2 mid = 0.5 * (lo + hi);
        const double r = 20.0 * scale_;
        pts_ = {mid + Vec2{-r, -r}, mid + Vec2{r, -r}, mid + Vec2{0, r}};
        vtri_ = {0, 0, 0};
        Tri t;
        t.v = {0, 1, 2};
        tris_.push_back(t);
    }

    TriangleMesh run() {
        insert_boundary();
        classify();
        refine_quality();
        return extract();
    }

private:
    // ---- topology helpers -------------------------------------------------

    int index_in(int t, int v) const {
        const auto& tv = tris_[t].v;
        for (int i = 0; i < 3; ++i)
            if (tv[i] == v) return i;
        return -1;
    }

    void relink(int t, int old_nbr, int new_nbr) {
        if (t < 0) return;
        for (int& n : tris_[t].nbr)
            if (n == old_nbr) {
                n = new_nbr;
                return;
            }
    }

    void touch(int t) {
        for (int v : tris_[t].v) vtri_[v] = t;
    }

    /// Triangles around vertex v in counterclockwise order.
    std::vector<int> star(int v) const {
        std::vector<int> out;
        const int start = vtri_[v];
        int t = start;
        do {
            out.push_back(t);
            const int i = index_in(t, v);
            t = tris_[t].nbr[prev(i)];
        } while (t != start && t >= 0 && out.size() < 4096);
        return out;
    }

    /// Returns (triangle, edge) for the edge {a, b}, or (-1, -1).
    std::pair<int, int> find_edge(int a, int b) const {
        for (int t : star(a)) {
            const int i = index_in(t, a);
            if (tris_[t].v[next(i)] == b) return {t, prev(i)};
            if (tris_[t].v[prev(i)] == b) return {t, next(i)};
        }
        return {-1, -1};
    }

    double edge_tol(Vec2 a, Vec2 b) const { return 1e-12 * norm(b - a) * scale_; }

    // ---- point location ---------------------------------------------------

    Location classify_in(int t, Vec2 p) const {
        Location loc{t, -1, -1};
        const auto& tv = tris_[t].v;
        for (int i = 0; i < 3; ++i)
            if (norm(pts_[tv[i]] - p) <= 1e-13 * scale_) {
                loc.vertex = tv[i];
                return loc;
            }
        for (int e = 0; e < 3; ++e) {
            const Vec2 a = pts_[tv[next(e)]];
            const Vec2 b = pts_[tv[prev(e)]];
            if (std::abs(orient2d(a, b, p)) <= edge_tol(a, b)) loc.edge = e;
        }
        return loc;
    }

    bool contains(int t, Vec2 p) const {
        const auto& tv = tris_[t].v;
        for (int e = 0; e < 3; ++e) {
            const Vec2 a = pts_[tv[next(e)]];
            const Vec2 b = pts_[tv[prev(e)]];
            if (orient2d(a, b, p) < -edge_tol(a, b)) return false;
        }
        return true;
    }

    Location locate(Vec2 p, int hint) {
        int t = (hint >= 0 && hint < static_cast<int>(tris_.size())) ? hint : 0;
        const std::size_t cap = 4 * tris_.size() + 64;
        for (std::size_t step = 0; step < cap; ++step) {
            const int start = static_cast<int>(rng_() % 3);
            int move_to = -1;
            for (int k = 0; k < 3; ++k) {
                const int e = (start + k) % 3;
                const Vec2 a = pts_[tris_[t].v[next(e)]];
                const Vec2 b = pts_[tris_[t].v[prev(e)]];
                if (orient2d(a, b, p) < -edge_tol(a, b)) {
                    move_to = tris_[t].nbr[e];
                    break;
                }
            }
            if (move_to < 0) {
                if (contains(t, p)) return classify_in(t, p);
                break;
            }
            t = move_to;
        }
        for (int s = 0; s < static_cast<int>(tris_.size()); ++s)
            if (contains(s, p)) return classify_in(s, p);
        throw MeshingFailure("point location failed");
    }

    // ---- insertion --------------------------------------------------------

    int add_vertex(Vec2 p) {
        pts_.push_back(p);
        vtri_.push_back(-1);
        return static_cast<int>(pts_.size()) - 1;
    }

    /// Inserts p; returns the vertex index (an existing one if p coincides).
    int insert(Vec2 p, int hint) {
        const Location loc = locate(p, hint);
        if (loc.vertex >= 0) return loc.vertex;
        if (loc.edge >= 0) return split_edge(loc.tri, loc.edge, p);
        return split_triangle(loc.tri, p);
    }

    int split_triangle(int t, Vec2 p) {
        const int v = add_vertex(p);
        const Tri old = tris_[t];
        const int a = old.v[0], b = old.v[1], c = old.v[2];
        const int tb = static_cast<int>(tris_.size());
        const int tc = tb + 1;
        tris_.resize(tris_.size() + 2);

        Tri& ta = tris_[t];
        ta.v = {v, b, c};
        ta.nbr = {old.nbr[0], tb, tc};
        ta.fixed = {old.fixed[0], false, false};

        Tri& tbr = tris_[tb];
        tbr.v = {v, c, a};
        tbr.nbr = {old.nbr[1], tc, t};
        tbr.fixed = {old.fixed[1], false, false};
        tbr.inside = old.inside;

        Tri& tcr = tris_[tc];
        tcr.v = {v, a, b};
        tcr.nbr = {old.nbr[2], t, tb};
        tcr.fixed = {old.fixed[2], false, false};
        tcr.inside = old.inside;

        relink(old.nbr[1], t, tb);
        relink(old.nbr[2], t, tc);
        touch(t);
        touch(tb);
        touch(tc);
        legalize({{t, 0}, {tb, 0}, {tc, 0}});
        return v;
    }

    int split_edge(int t, int e, Vec2 p) {
        const int v = add_vertex(p);
        const Tri old_t = tris_[t];
        const int x = old_t.v[e], y = old_t.v[next(e)], z = old_t.v[prev(e)];
        const int u = old_t.nbr[e];
        const bool seg = old_t.fixed[e];

        const int t2 = static_cast<int>(tris_.size());
        tris_.emplace_back();
        int u1 = -1, u2 = -1;
        Tri old_u;
        int f = -1;
        if (u >= 0) {
            old_u = tris_[u];
            for (int i = 0; i < 3; ++i)
                if (old_u.nbr[i] == t) f = i;
            u1 = u;
            u2 = static_cast<int>(tris_.size());
            tris_.emplace_back();
        }

        // t1 = {x, y, v}, t2 = {x, v, z}
        Tri& r1 = tris_[t];
        r1.v = {x, y, v};
        r1.nbr = {u2, t2, old_t.nbr[prev(e)]};
        r1.fixed = {seg, false, old_t.fixed[prev(e)]};
        r1.inside = old_t.inside;

        Tri& r2 = tris_[t2];
        r2.v = {x, v, z};
        r2.nbr = {u1, old_t.nbr[next(e)], t};
        r2.fixed = {seg, old_t.fixed[next(e)], false};
        r2.inside = old_t.inside;
        relink(old_t.nbr[next(e)], t, t2);

        if (u >= 0) {
            const int w = old_u.v[f];
            // old_u = {w, z, y} up to rotation: v[next(f)] == z, v[prev(f)] == y
            Tri& s1 = tris_[u1];
            s1.v = {w, z, v};
            s1.nbr = {t2, u2, old_u.nbr[prev(f)]};
            s1.fixed = {seg, false, old_u.fixed[prev(f)]};
            s1.inside = old_u.inside;

            Tri& s2 = tris_[u2];
            s2.v = {w, v, y};
            s2.nbr = {t, old_u.nbr[next(f)], u1};
            s2.fixed = {seg, old_u.fixed[next(f)], false};
            s2.inside = old_u.inside;
            relink(old_u.nbr[next(f)], u, u2);
            touch(u1);
            touch(u2);
        }
        touch(t);
        touch(t2);

        if (seg) split_segment_record(y, z, v);

        std::vector<std::pair<int, int>> todo{{t, 2}, {t2, 1}};
        if (u >= 0) {
            todo.emplace_back(u1, 2);
            todo.emplace_back(u2, 1);
        }
        legalize(todo);
        return v;
    }

    /// Lawson flips. Each stack entry (t, e) names an edge whose opposite
    /// vertex in t is the newly inserted point.
    void legalize(std::vector<std::pair<int, int>> stack) {
        while (!stack.empty()) {
            auto [t, e] = stack.back();
            stack.pop_back();
            if (tris_[t].fixed[e]) continue;
            const int n = tris_[t].nbr[e];
            if (n < 0) continue;
            int f = -1;
            for (int i = 0; i < 3; ++i)
                if (tris_[n].nbr[i] == t) f = i;
            if (f < 0) continue;
            const int p = tris_[t].v[e];
            const int x = tris_[t].v[next(e)];
            const int y = tris_[t].v[prev(e)];
            const int d = tris_[n].v[f];
            const Vec2 pp = pts_[p], px = pts_[x], py = pts_[y], pd = pts_[d];
            const double s = std::max({norm(px - pp), norm(py - pp), norm(pd - pp)});
            if (incircle(pp, px, py, pd) <= 1e-12 * s * s * s * s) continue;
            if (orient2d(pp, px, pd) <= 0 || orient2d(pp, pd, py) <= 0) continue;

            const Tri old_t = tris_[t];
            const Tri old_n = tris_[n];
            const int A = old_t.nbr[next(e)], B = old_t.nbr[prev(e)];
            const int C = old_n.nbr[next(f)], D = old_n.nbr[prev(f)];

            Tri& nt = tris_[t];
            nt.v = {p, x, d};
            nt.nbr = {C, n, B};
            nt.fixed = {old_n.fixed[next(f)], false, old_t.fixed[prev(e)]};

            Tri& nn = tris_[n];
            nn.v = {p, d, y};
            nn.nbr = {D, A, t};
            nn.fixed = {old_n.fixed[prev(f)], old_t.fixed[next(e)], false};

            relink(C, n, t);
            relink(A, t, n);
            touch(t);
            touch(n);
            stack.emplace_back(t, 0);
            stack.emplace_back(n, 0);
        }
    }

    // ---- segments -----------------------------------------------------------

    static std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

    void split_segment_record(int a, int b, int m) {
        auto it = seg_index_.find(key(a, b));
        if (it == seg_index_.end()) return;
        Segment s = segments_[it->second];
        segments_[it->second].alive = false;
        seg_index_.erase(it);
        add_segment(s.a, m, s.loop);
        add_segment(m, s.b, s.loop);
    }

    void add_segment(int a, int b, int loop) {
        seg_index_[key(a, b)] = segments_.size();
        segments_.push_back({a, b, loop, true});
        seg_queue_.push_back(segments_.size() - 1);
    }

    void fix_edge(int a, int b) {
        auto [t, e] = find_edge(a, b);
        tris_[t].fixed[e] = true;
        const int n = tris_[t].nbr[e];
        if (n >= 0)
            for (int i = 0; i < 3; ++i)
                if (tris_[n].nbr[i] == t) tris_[n].fixed[i] = true;
    }

    void recover(int a, int b, int loop, int depth) {
        if (depth > 60) throw MeshingFailure("segment recovery did not terminate");
        if (find_edge(a, b).first >= 0) {
            fix_edge(a, b);
            add_segment(a, b, loop);
            return;
        }
        const int m = insert(0.5 * (pts_[a] + pts_[b]), vtri_[a]);
        if (m == a || m == b) throw MeshingFailure("degenerate boundary segment");
        recover(a, m, loop, depth + 1);
        recover(m, b, loop, depth + 1);
    }

    void insert_boundary() {
        std::vector<std::vector<int>> loops;
        for (std::size_t l = 0; l < domain_.loop_count(); ++l) {
            const Loop& lp = domain_.loop(l);
            std::vector<int> ids;
            for (std::size_t i = 0; i < lp.size(); ++i) {
                const Vec2 a = lp[i];
                const Vec2 b = lp[(i + 1) % lp.size()];
                const int pieces = std::max(1, static_cast<int>(std::ceil(norm(b - a) / h_target_ - 1e-9)));
                for (int k = 0; k < pieces; ++k) {
                    const double s = static_cast<double>(k) / pieces;
                    const int hint = ids.empty() ? 0 : vtri_[ids.back()];
                    ids.push_back(insert(a + s * (b - a), hint));
                }
            }
            loops.push_back(std::move(ids));
        }
        for (std::size_t l = 0; l < loops.size(); ++l) {
            const auto& ids = loops[l];
            for (std::size_t i = 0; i < ids.size(); ++i)
                recover(ids[i], ids[(i + 1) % ids.size()], static_cast<int>(l), 0);
        }
        seg_queue_.clear();
    }

    void classify() {
        std::vector<int> region(tris_.size(), -1);
        int regions = 0;
        for (int s = 0; s < static_cast<int>(tris_.size()); ++s) {
            if (region[s] >= 0) continue;
            std::vector<int> members{s};
            region[s] = regions;
            for (std::size_t k = 0; k < members.size(); ++k) {
                const int t = members[k];
                for (int e = 0; e < 3; ++e) {
                    const int n = tris_[t].nbr[e];
                    if (n < 0 || tris_[t].fixed[e] || region[n] >= 0) continue;
                    region[n] = regions;
                    members.push_back(n);
                }
            }
            const auto& v = tris_[s].v;
            const bool touches_super = v[0] < 3 || v[1] < 3 || v[2] < 3;
            const Vec2 c = (1.0 / 3.0) * (pts_[v[0]] + pts_[v[1]] + pts_[v[2]]);
            const bool in = !touches_super && domain_.contains(c);
            for (int t : members) tris_[t].inside = in;
            ++regions;
        }
    }

    // ---- Ruppert refinement -------------------------------------------------

    bool encroaches(Vec2 q, const Segment& s) const {
        const Vec2 a = pts_[s.a], b = pts_[s.b];
        const double len2 = dot(b - a, b - a);
        return dot(a - q, b - q) < -1e-12 * len2;
    }

    bool segment_encroached(const Segment& s) const {
        auto [t, e] = find_edge(s.a, s.b);
        if (t < 0) throw MeshingFailure("lost a constrained segment");
        const int n = tris_[t].nbr[e];
        if (tris_[t].inside && encroaches(pts_[tris_[t].v[e]], s)) return true;
        if (n >= 0 && tris_[n].inside) {
            for (int i = 0; i < 3; ++i)
                if (tris_[n].nbr[i] == t && encroaches(pts_[tris_[n].v[i]], s)) return true;
        }
        return false;
    }

    int split_segment(std::size_t id) {
        const Segment s = segments_[id];
        auto [t, e] = find_edge(s.a, s.b);
        const int v = split_edge(t, e, 0.5 * (pts_[s.a] + pts_[s.b]));
        after_insert(v);
        return v;
    }

    bool is_bad(int t) const {
        const Tri& tr = tris_[t];
        if (!tr.inside) return false;
        const Vec2 a = pts_[tr.v[0]], b = pts_[tr.v[1]], c = pts_[tr.v[2]];
        const double longest = std::max({norm(b - a), norm(c - b), norm(a - c)});
        if (longest > h_target_) return true;
        return min_angle(a, b, c) < options_.quality_angle_deg * std::numbers::pi / 180.0;
    }

    void after_insert(int v) {
        if (++insertions_ > options_.max_insertions) throw MeshingFailure("insertion budget exhausted");
        for (int t : star(v)) {
            tri_queue_.push_back(t);
            const int i = index_in(t, v);
            if (tris_[t].fixed[i]) {
                auto it = seg_index_.find(key(tris_[t].v[next(i)], tris_[t].v[prev(i)]));
                if (it != seg_index_.end()) seg_queue_.push_back(it->second);
            }
        }
    }

    void drain_segments() {
        while (!seg_queue_.empty()) {
            const std::size_t id = seg_queue_.front();
            seg_queue_.pop_front();
            if (!segments_[id].alive) continue;
            if (segment_encroached(segments_[id])) split_segment(id);
        }
    }

    void refine_quality() {
        for (std::size_t i = 0; i < segments_.size(); ++i)
            if (segments_[i].alive) seg_queue_.push_back(i);
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) tri_queue_.push_back(t);

        while (true) {
            drain_segments();
            if (tri_queue_.empty()) break;
            const int t = tri_queue_.front();
            tri_queue_.pop_front();
            if (!is_bad(t)) continue;
            const auto& tv = tris_[t].v;
            const Vec2 c = circumcenter(pts_[tv[0]], pts_[tv[1]], pts_[tv[2]]);

            std::vector<std::size_t> hit;
            for (std::size_t i = 0; i < segments_.size(); ++i)
                if (segments_[i].alive && encroaches(c, segments_[i])) hit.push_back(i);
            if (!hit.empty()) {
                for (std::size_t id : hit)
                    if (segments_[id].alive) split_segment(id);
                tri_queue_.push_back(t);
                continue;
            }
            const Location loc = locate(c, t);
            if (loc.vertex >= 0 || !tris_[loc.tri].inside) continue;
            const int v = loc.edge >= 0 ? split_edge(loc.tri, loc.edge, c) : split_triangle(loc.tri, c);
            after_insert(v);
        }
    }

    TriangleMesh extract() const {
        TriangleMesh mesh;
        std::vector<int> renumber(pts_.size(), -1);
        for (const Tri& t : tris_) {
            if (!t.inside) continue;
            std::array<int, 3> tri{};
            for (int i = 0; i < 3; ++i) {
                int& id = renumber[t.v[i]];
                if (id < 0) {
                    id = static_cast<int>(mesh.nodes.size());
                    mesh.nodes.push_back(pts_[t.v[i]]);
                }
                tri[i] = id;
            }
            mesh.triangles.push_back(tri);
        }
        for (const Segment& s : segments_) {
            if (!s.alive) continue;
            auto [t, e] = find_edge(s.a, s.b);
            const Tri* in = &tris_[t];
            int edge = e;
            if (!in->inside) {
                const int n = in->nbr[e];
                for (int i = 0; i < 3; ++i)
                    if (tris_[n].nbr[i] == t) edge = i;
                in = &tris_[n];
            }
            const int a = renumber[in->v[next(edge)]];
            const int b = renumber[in->v[prev(edge)]];
            mesh.boundary_edges.push_back({a, b, s.loop});
        }
        std::sort(mesh.boundary_edges.begin(), mesh.boundary_edges.end(), [](const auto& l, const auto& r) {
            return std::tie(l.loop, l.a, l.b) < std::tie(r.loop, r.a, r.b);
        });
        mesh.h_max = longest_edge(mesh);
        return mesh;
    }

    const PolygonalDomain& domain_;
    double h_target_;
    TriangulateOptions options_;
    double scale_ = 1.0;
    std::vector<Vec2> pts_;
    std::vector<int> vtri_;
    std::vector<Tri> tris_;
    std::vector<Segment> segments_;
    std::map<std::pair<int, int>, std::size_t> seg_index_;
    std::deque<std::size_t> seg_queue_;
    std::deque<int> tri_queue_;
    std::size_t insertions_ = 0;
    std::minstd_rand rng_{12345};
};

}  // namespace

TriangleMesh triangulate(const PolygonalDomain& domain, double h_target, const TriangulateOptions& options) {
    if (!(h_target > 0) || !std::isfinite(h_target)) throw InvalidParameter("h_target must be positive");
    try {
        domain.validate();
    } catch (const InvalidParameter& e) {
        throw MeshingFailure(std::string("degenerate polygon: ") + e.what());
    }
    // A target larger than the domain only changes the size criterion.
    const double h = std::min(h_target, 2.0 * domain.diameter());
    TriangleMesh mesh = Refiner(domain, h, options).run();
    validate(mesh);
    if (min_angle_deg(mesh) < 20.0) throw MeshingFailure("minimum angle below 20 degrees");
    return mesh;
}

}  // namespace torsionlab
