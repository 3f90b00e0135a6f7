#include "torsionlab/wos.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "torsionlab/errors.hpp"

namespace torsionlab {

BoundaryDistance::BoundaryDistance(const PolygonalDomain& domain) : diameter_(domain.diameter()) {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-lo.x, -lo.y};
    for (std::size_t l = 0; l < domain.loop_count(); ++l) {
        const Loop& loop = domain.loop(l);
        for (std::size_t i = 0; i < loop.size(); ++i) {
            segments_.push_back({loop[i], loop[(i + 1) % loop.size()]});
            lo = {std::min(lo.x, loop[i].x), std::min(lo.y, loop[i].y)};
            hi = {std::max(hi.x, loop[i].x), std::max(hi.y, loop[i].y)};
        }
    }
    if (segments_.empty()) throw InvalidParameter("domain has no boundary");
    const double extent = std::max(hi.x - lo.x, hi.y - lo.y);
    const int per_side = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(segments_.size()))) * 2, 1, 256);
    cell_ = extent / per_side * (1.0 + 1e-9);
    origin_ = lo;
    nx_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell_)));
    cells_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
    auto clamp_i = [&](double x) { return std::clamp(static_cast<int>(std::floor((x - origin_.x) / cell_)), 0, nx_ - 1); };
    auto clamp_j = [&](double y) { return std::clamp(static_cast<int>(std::floor((y - origin_.y) / cell_)), 0, ny_ - 1); };
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const auto& seg = segments_[s];
        for (int j = clamp_j(std::min(seg.a.y, seg.b.y)); j <= clamp_j(std::max(seg.a.y, seg.b.y)); ++j)
            for (int i = clamp_i(std::min(seg.a.x, seg.b.x)); i <= clamp_i(std::max(seg.a.x, seg.b.x)); ++i)
                cells_[cell_index(i, j)].push_back(static_cast<int>(s));
    }
}

double BoundaryDistance::operator()(Vec2 p) const {
    const int ci = std::clamp(static_cast<int>(std::floor((p.x - origin_.x) / cell_)), 0, nx_ - 1);
    const int cj = std::clamp(static_cast<int>(std::floor((p.y - origin_.y) / cell_)), 0, ny_ - 1);
    // distance from p to the outside of its (clamped) cell block; zero when p
    // lies outside the grid
    const double outside = std::max({origin_.x - p.x, p.x - (origin_.x + nx_ * cell_), origin_.y - p.y,
                                     p.y - (origin_.y + ny_ * cell_), 0.0});
    double best = std::numeric_limits<double>::infinity();
    const int max_ring = std::max(nx_, ny_);
    for (int k = 0; k <= max_ring; ++k) {
        for (int j = cj - k; j <= cj + k; ++j) {
            if (j < 0 || j >= ny_) continue;
            const bool edge_row = j == cj - k || j == cj + k;
            for (int i = ci - k; i <= ci + k; i += edge_row ? 1 : 2 * k) {
                if (i >= 0 && i < nx_)
                    for (int s : cells_[cell_index(i, j)])
                        best = std::min(best, segment_distance(p, segments_[static_cast<std::size_t>(s)].a,
                                                               segments_[static_cast<std::size_t>(s)].b));
                if (k == 0) break;
            }
        }
        // everything in ring k + 1 and beyond is at least k cells away
        if (outside == 0.0 && best <= k * cell_) break;
    }
    return best;
}

double distance_to_boundary(const PolygonalDomain& domain, Vec2 x) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < domain.loop_count(); ++l) {
        const Loop& loop = domain.loop(l);
        for (std::size_t i = 0; i < loop.size(); ++i) d = std::min(d, segment_distance(x, loop[i], loop[(i + 1) % loop.size()]));
    }
    if (d == 0.0) return 0.0;
    return domain.contains(x) ? d : -d;
}

namespace {

constexpr int chunk_size = 1000;
constexpr double planar_increment = 1.0 / (2.0 * PolygonalDomain::dimension);

struct ChunkSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    long long steps = 0;
    int walks = 0;
    int capped = 0;
};

template <class Distance>
WosEstimate run_walks(const Distance& distance, double diameter, Vec2 x, const WosOptions& options) {
    if (options.n_walks < 1) throw InvalidParameter("walk-on-spheres needs at least one walk");
    if (options.step_cap < 1) throw InvalidParameter("walk-on-spheres step cap must be positive");
    const double eps = options.eps_shell > 0 ? options.eps_shell : 1e-4 * diameter;
    if (!(distance(x) > eps)) throw InvalidParameter("walk-on-spheres start point must lie strictly inside");

    const int chunks = (options.n_walks + chunk_size - 1) / chunk_size;
    std::vector<ChunkSums> sums(static_cast<std::size_t>(chunks));
    auto run_chunk = [&](int c) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(c)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        ChunkSums& out = sums[static_cast<std::size_t>(c)];
        const int begin = c * chunk_size;
        const int end = std::min(options.n_walks, begin + chunk_size);
        for (int w = begin; w < end; ++w) {
            Vec2 pos = x;
            double t = 0.0;
            int steps = 0;
            bool capped = false;
            for (;;) {
                const double r = distance(pos);
                if (r < eps) break;
                if (steps == options.step_cap) {
                    capped = true;
                    break;
                }
                t += planar_increment * r * r;
                const double theta = angle(rng);
                pos = pos + r * Vec2{std::cos(theta), std::sin(theta)};
                ++steps;
            }
            if (capped) {
                ++out.capped;
                continue;
            }
            out.sum += t;
            out.sum_sq += t * t;
            out.steps += steps;
            ++out.walks;
        }
    };

    const int workers = std::clamp(options.workers, 1, chunks);
    if (workers == 1) {
        for (int c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int c = next++; c < chunks; c = next++) run_chunk(c);
            });
        for (auto& t : pool) t.join();
    }

    ChunkSums total;
    for (const ChunkSums& s : sums) {
        total.sum += s.sum;
        total.sum_sq += s.sum_sq;
        total.steps += s.steps;
        total.walks += s.walks;
        total.capped += s.capped;
    }
    WosEstimate est;
    est.point = x;
    est.eps_shell = eps;
    est.n_walks = total.walks;
    est.capped_walks = total.capped;
    if (total.walks > 0) {
        const double n = total.walks;
        est.mean = total.sum / n;
        est.mean_steps = static_cast<double>(total.steps) / n;
        if (total.walks > 1) {
            const double var = std::max(0.0, (total.sum_sq - n * est.mean * est.mean) / (n - 1.0));
            est.standard_error = std::sqrt(var / n);
        }
    }
    return est;
}

}  // namespace

WosEstimate wos_exit_time(const PolygonalDomain& domain, Vec2 x, const WosOptions& options) {
    if (!domain.contains(x)) throw InvalidParameter("walk-on-spheres start point must lie strictly inside");
    const BoundaryDistance distance(domain);
    return run_walks(distance, distance.diameter(), x, options);
}

WosEstimate wos_exit_time(const ExactDisk& disk, Vec2 x, const WosOptions& options) {
    if (!(disk.radius > 0)) throw InvalidParameter("disk radius must be positive");
    return run_walks([&](Vec2 p) { return disk.distance(p); }, disk.diameter(), x, options);
}

WosEstimate wos_exit_time(const PolygonalDomain& domain, Vec2 x, int n_walks, double eps_shell, std::uint64_t seed) {
    WosOptions options;
    options.n_walks = n_walks;
    options.eps_shell = eps_shell;
    options.seed = seed;
    return wos_exit_time(domain, x, options);
}

std::vector<Vec2> interior_probe_points(const PolygonalDomain& domain, int count, double min_distance) {
    if (count < 0) throw InvalidParameter("probe count must be nonnegative");
    Vec2 lo = domain.outer.front();
    Vec2 hi = lo;
    for (Vec2 v : domain.outer) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    auto radical_inverse = [](int i, int base) {
        double f = 1.0;
        double r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        return r;
    };
    std::vector<Vec2> out;
    for (int i = 1; static_cast<int>(out.size()) < count; ++i) {
        if (i > 100000) throw InvalidParameter("could not place probe points inside the domain");
        const Vec2 p{lo.x + (hi.x - lo.x) * radical_inverse(i, 2), lo.y + (hi.y - lo.y) * radical_inverse(i, 3)};
        if (distance_to_boundary(domain, p) >= min_distance) out.push_back(p);
    }
    return out;
}

}  // namespace torsionlab
