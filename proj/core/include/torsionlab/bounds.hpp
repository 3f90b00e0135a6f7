#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace torsionlab {

/// Sharp constant of the BV Sobolev embedding,
/// C(m) = m^{-1} pi^{-1/2} Gamma((2+m)/2)^{1/m}.
double isoperimetric_constant(int m);

/// Constant of the Gaussian heat kernel bound, (192 m)^m.
double heat_kernel_constant(int m);

/// Gaussian width constant 1 + sqrt(m) + 4m.
double gaussian_width_constant(int m);

struct NashConstant {
    double general = 0.0;           ///< C(m) (1/b + b/lambda), any b > 0
    std::optional<double> strong;   ///< 2 C(m) lambda^{-1/2}, only when b >= sqrt(lambda)

    /// Smallest applicable branch.
    double best() const { return strong ? std::min(general, *strong) : general; }
};

NashConstant nash_constant(int m, double b, double lambda1);

struct BoundPair {
    double lower = 0.0;
    double upper = 0.0;
};

/// Two-sided bound on the sup norm of the Robin torsion function:
/// 1/lambda <= |u_b|_inf <= 6m/lambda * log(2^11 3 sqrt(3) m (1 + sqrt(lambda)/b)).
/// Natural logarithm. Throws InvalidParameter for lambda <= 0 (unbounded regime).
BoundPair robin_sup_bound(int m, double b, double lambda1);

/// Two-sided bound on the sup norm of the Dirichlet torsion function:
/// 1/lambda <= |u|_inf <= (4 + 3m log 2)/lambda.
BoundPair dirichlet_sup_bound(int m, double lambda1);

/// Dirichlet upper constant 4 + 3m log 2.
double dirichlet_sup_constant(int m);

/// Sandwich for the Robin p-torsional rigidity:
/// b^{-1/(p-1)} |Omega|^{p/(p-1)} |dOmega|^{-1/(p-1)} <= P <= lambda^{-1/(p-1)} |Omega|.
BoundPair rigidity_bounds(int m, double p, double b, double area, double perimeter, double lambda1);

/// Every constant entering the Robin heat-kernel chain for one (m, b, lambda).
struct HeatKernelConstants {
    int m = 2;
    double b = 0.0;
    double lambda1 = 0.0;
    double isoperimetric = 0.0;  ///< C(m)
    double c2m = 0.0;            ///< (192 m)^m
    double omega = 0.0;          ///< 1 + sqrt(m) + 4m
    NashConstant nash;
    double nash_used = 0.0;      ///< smallest applicable Nash branch
    double k = 0.0;              ///< c2m * nash_used^m
    double dirichlet_upper = 0.0;

    static HeatKernelConstants make(int m, double b, double lambda1);
};

struct EigenBounds {
    double trace_rhs = 0.0;                 ///< c2m N^m |Omega| t^{-m}
    std::vector<double> eigenfunction_rhs;  ///< (c2m N^m e^m m^{-m})^{1/2} lambda_j^{m/2}
    double comparison_scale = 0.0;          ///< (c2m N^m e^m m^{-m})^{-1/2} lambda_1^{-1-m/2}
};

EigenBounds eigen_bounds(const HeatKernelConstants& constants, double area, std::span<const double> lambdas, double t);

/// Constants of the p-Laplacian level-set inequality.
struct PConstants {
    double c1 = 0.0;  ///< m / (m(p-1) + 1)
    double c2 = 0.0;  ///< p^{c1} (m(p-1) + 1)
    double c3 = 0.0;  ///< 1 / ((p-1)(m(p-1) + 1))

    static PConstants make(int m, double p);
};

/// Second Caccioppoli constant 2^{p-1} + c1 ((p-1) c1 / (c1 - 2^{p-1}))^{p-1};
/// requires c1 > 2^{p-1}.
double caccioppoli_constant(double p, double c1);

/// Sup norm of the Dirichlet p-torsion function of the m-ball,
/// (p-1)/p m^{-1/(p-1)} R^{p/(p-1)}.
double ball_p_torsion_sup(int m, double p, double radius);

struct BoundVerdict {
    std::string name;
    std::string anchor;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  ///< rhs - lhs
    bool satisfied = false;
    double tolerance = 0.0;
    std::vector<std::pair<std::string, double>> inputs;
    std::string note;
};

/// satisfied <=> lhs <= rhs (1 + tolerance). Violations are data, not
/// errors. Throws InvalidParameter on non-finite input.
BoundVerdict make_verdict(std::string name, std::string anchor, double lhs, double rhs, double tolerance,
                          std::vector<std::pair<std::string, double>> inputs = {}, std::string note = {});

inline constexpr std::string_view natural_log_note = "log is the natural logarithm";

struct AnchorInfo {
    std::string_view id;
    std::string_view statement;
};

/// Fixed list of inequality anchors used by verdicts.
std::span<const AnchorInfo> anchor_catalog();
bool is_catalog_anchor(std::string_view id);

namespace anchors {
inline constexpr std::string_view dirichlet_sup = "dirichlet-sup-bound";
inline constexpr std::string_view robin_sup = "robin-sup-bound";
inline constexpr std::string_view nash = "nash-inequality";
inline constexpr std::string_view trace_sobolev = "trace-sobolev-inequality";
inline constexpr std::string_view robin_sobolev = "robin-sobolev-inequality";
inline constexpr std::string_view robin_sobolev_strong = "robin-sobolev-inequality-strong";
inline constexpr std::string_view heat_trace = "heat-trace-bound";
inline constexpr std::string_view eigenfunction_sup = "eigenfunction-sup-bound";
inline constexpr std::string_view comparison = "torsion-eigenfunction-comparison";
inline constexpr std::string_view small_b_limit = "small-b-spectral-limit";
inline constexpr std::string_view ball_small_b_limit = "ball-small-b-limit";
inline constexpr std::string_view rigidity_lower = "p-rigidity-lower-bound";
inline constexpr std::string_view rigidity_upper = "p-rigidity-upper-bound";
inline constexpr std::string_view levelset_integral = "levelset-integral-bound";
inline constexpr std::string_view caccioppoli = "caccioppoli-inequality";
inline constexpr std::string_view p_torsion_ratio = "dirichlet-p-torsion-ratio";
inline constexpr std::string_view exit_time = "exit-time-representation";
}  // namespace anchors

}  // namespace torsionlab
