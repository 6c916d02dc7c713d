#pragma once

#include <string>
#include <vector>

#include "flowlab/timeloop.hpp"

namespace flowlab
{

struct RateRow
{
    double h = 0.0;
    int n_dofs = 0;
    std::vector<double> errors; ///< one entry per norm
};

/// Observed rates log2(e_h / e_{h/2}); rates[i][j] compares rows i and i+1 in norm j.
struct RateTable
{
    std::vector<std::string> norms;
    std::vector<RateRow> rows;
    std::vector<std::vector<double>> rates;
    std::vector<bool> preasymptotic; ///< per norm

    double last_rate(int norm) const { return rates.back()[norm]; }
    double min_rate(int norm) const;
};

/// Throws ConfigError unless there are at least two rows and h halves between
/// rows (2% tolerance). A norm is flagged preasymptotic when successive rates
/// differ by more than 0.5, or when its last rate misses `expected` (if given)
/// by more than 0.5.
RateTable convergence_rates(std::vector<std::string> norms, std::vector<RateRow> rows,
                            const std::vector<double> &expected = {});

enum class GronwallMode
{
    Classical,  ///< 1/2 |grad u|_{L1 Linf} + 4/nu |u|^2_{L2 Linf}
    GradDiv,    ///< T + C1 |grad u|_{L1 Linf} + C2 h^2/delta |u|^2_{L1 W1inf}
    DivergenceFree, ///< T + |u|_{L1 Linf} + C |grad u|_{L1 Linf}
};

GronwallMode parse_gronwall_mode(const std::string &name);
std::string to_string(GronwallMode mode);

/// Unknown constants default to 1; `h` and `delta` only enter the grad-div mode.
struct GronwallParams
{
    double C = 1.0;
    double C1 = 1.0;
    double C2 = 1.0;
    double h = 0.25;
    double delta = 0.1;
};

/// Argument of the Gronwall exponential for an exact solution, by adaptive
/// Gauss-Kronrod quadrature of its analytic L-infinity profiles. The
/// W^{1,inf} norm is max(|u|_Linf, |grad u|_Linf).
double gronwall_functional(const ExactSolution &exact, double T, GronwallMode mode, const GronwallParams &params = {});

/// Check of the discrete energy estimate at every record:
///
///   kinetic(t_n) + sum_{m<n} dt [nu C |||u_m|||^2 + delta |div u_m|^2 + |u_m|^2_upw]
///     <= |u_0|^2 + 3/2 (sum_{m<n} dt |f(t_m)|)^2 + tol * scale
///
/// with scale = max(|u_0|^2, 3/2 |f|^2_{L1 L2}, tiny).
struct EnergyBudgetReport
{
    bool pass = true;
    bool monotone = true;  ///< kinetic energy strictly decreasing (report only)
    double coercivity = 1.0;
    double worst_margin = 0.0; ///< max over records of (lhs - rhs) / scale
    int first_violation = -1;  ///< record index, -1 if none
    std::vector<double> lhs;
    std::vector<double> rhs;
};

EnergyBudgetReport energy_budget(const TimeSeries &series, double coercivity, double tolerance = 1e-8);

/// Largest C with a_h(v, v) >= C |||v|||_e^2 on the space (nu = 1, no grad-div),
/// from a dense generalized eigenproblem on the complement of ker |||.|||_e.
/// Exactly 1 for H1-conforming spaces.
double measure_coercivity(const FESpace &space, double sigma);

/// |grad_h pi_s w|_Linf / |grad w|_Linf (sampled), a report-only diagnostic.
double assumption_e_ratio(const SpacePair &spaces, double sigma, const VectorField &w, const TensorField &grad_w,
                          double grad_w_linf);

} // namespace flowlab
