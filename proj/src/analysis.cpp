#include "flowlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "flowlab/projection.hpp"

namespace flowlab
{

double RateTable::min_rate(int norm) const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto &r : rates)
        m = std::min(m, r[norm]);
    return m;
}

RateTable convergence_rates(std::vector<std::string> norms, std::vector<RateRow> rows,
                            const std::vector<double> &expected)
{
    if (rows.size() < 2)
        throw ConfigError("rate table needs at least two refinement levels");
    const size_t n_norms = norms.size();
    for (const auto &r : rows)
        if (r.errors.size() != n_norms)
            throw ConfigError("rate table row has the wrong number of errors");
    for (size_t i = 0; i + 1 < rows.size(); ++i)
        if (std::abs(rows[i + 1].h / rows[i].h - 0.5) > 0.01)
            throw ConfigError("mesh sizes in a rate table must halve between rows");

    RateTable t;
    t.norms = std::move(norms);
    t.rows = std::move(rows);
    for (size_t i = 0; i + 1 < t.rows.size(); ++i)
    {
        std::vector<double> r(n_norms);
        for (size_t j = 0; j < n_norms; ++j)
            r[j] = std::log2(t.rows[i].errors[j] / t.rows[i + 1].errors[j]);
        t.rates.push_back(std::move(r));
    }
    t.preasymptotic.assign(n_norms, false);
    for (size_t j = 0; j < n_norms; ++j)
    {
        for (size_t i = 0; i + 1 < t.rates.size(); ++i)
            if (std::abs(t.rates[i + 1][j] - t.rates[i][j]) > 0.5)
                t.preasymptotic[j] = true;
        if (j < expected.size() && std::abs(t.rates.back()[j] - expected[j]) > 0.5)
            t.preasymptotic[j] = true;
    }
    return t;
}

GronwallMode parse_gronwall_mode(const std::string &name)
{
    if (name == "classical" || name == "26")
        return GronwallMode::Classical;
    if (name == "graddiv" || name == "27")
        return GronwallMode::GradDiv;
    if (name == "divfree" || name == "45")
        return GronwallMode::DivergenceFree;
    throw ConfigError("unknown Gronwall mode '" + name + "'");
}

std::string to_string(GronwallMode mode)
{
    switch (mode)
    {
    case GronwallMode::Classical:
        return "classical";
    case GronwallMode::GradDiv:
        return "graddiv";
    case GronwallMode::DivergenceFree:
        return "divfree";
    }
    return "";
}

namespace
{

double integrate_in_time(const std::function<double(double)> &f, double T)
{
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, 0.0, T, 20, 1e-14);
}

} // namespace

double gronwall_functional(const ExactSolution &exact, double T, GronwallMode mode, const GronwallParams &params)
{
    if (!(T >= 0.0))
        throw ConfigError("final time must be non-negative");
    if (!exact.u_linf || !exact.grad_linf)
        throw PreconditionError("exact solution '" + exact.name + "' has no analytic L-infinity profiles");
    const auto &u = exact.u_linf;
    const auto &g = exact.grad_linf;
    if (T == 0.0)
        return 0.0;
    switch (mode)
    {
    case GronwallMode::Classical:
    {
        const double grad = integrate_in_time(g, T);
        const double u2 = integrate_in_time([&](double t) { return u(t) * u(t); }, T);
        return 0.5 * grad + 4.0 / exact.nu * u2;
    }
    case GronwallMode::GradDiv:
    {
        if (!(params.delta > 0.0))
            throw ConfigError("grad-div Gronwall argument needs delta > 0");
        const double grad = integrate_in_time(g, T);
        const double w = integrate_in_time([&](double t) { return std::max(u(t), g(t)); }, T);
        return T + params.C1 * grad + params.C2 * params.h * params.h / params.delta * w * w;
    }
    case GronwallMode::DivergenceFree:
        return T + integrate_in_time(u, T) + params.C * integrate_in_time(g, T);
    }
    return 0.0;
}

EnergyBudgetReport energy_budget(const TimeSeries &series, double coercivity, double tolerance)
{
    EnergyBudgetReport r;
    r.coercivity = coercivity;
    if (series.records.empty())
        return r;
    const double u0_sq = 2.0 * series.records.front().norms.kinetic;
    const auto &last = series.records.back();
    const double f_total = last.sum_forcing + series.dt * last.forcing_l2;
    const double scale = std::max({u0_sq, 1.5 * f_total * f_total, 1e-300});
    r.worst_margin = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < series.records.size(); ++i)
    {
        const TimeRecord &rec = series.records[i];
        const double lhs = rec.norms.kinetic + coercivity * rec.sum_dissipation + rec.sum_graddiv + rec.sum_upwind;
        const double rhs = u0_sq + 1.5 * rec.sum_forcing * rec.sum_forcing;
        r.lhs.push_back(lhs);
        r.rhs.push_back(rhs);
        const double margin = (lhs - rhs) / scale;
        r.worst_margin = std::max(r.worst_margin, margin);
        if (margin > tolerance && r.first_violation < 0)
        {
            r.first_violation = static_cast<int>(i);
            r.pass = false;
        }
        if (i > 0 && !(rec.norms.kinetic < series.records[i - 1].norms.kinetic))
            r.monotone = false;
    }
    if (series.blowup_time)
        r.pass = false;
    return r;
}

double measure_coercivity(const FESpace &space, double sigma)
{
    const DenseMatrix A = DenseMatrix(assemble_viscous(space, FormParameters{1.0, sigma, 0.0}).matrix);
    const DenseMatrix E = DenseMatrix(assemble_energy_norm(space, sigma));
    const Eigen::SelfAdjointEigenSolver<DenseMatrix> e_eig(E);
    const Vector &lam = e_eig.eigenvalues();
    const double cut = 1e-10 * lam.cwiseAbs().maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < lam.size(); ++i)
        if (lam[i] > cut)
            keep.push_back(i);
    DenseMatrix W(A.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j)
        W.col(j) = e_eig.eigenvectors().col(keep[j]) / std::sqrt(lam[keep[j]]);
    const DenseMatrix R = W.transpose() * A * W;
    const Eigen::SelfAdjointEigenSolver<DenseMatrix> r_eig(0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly);
    return r_eig.eigenvalues().minCoeff();
}

double assumption_e_ratio(const SpacePair &spaces, double sigma, const VectorField &w, const TensorField &grad_w,
                          double grad_w_linf)
{
    const Vector pi = stokes_projection(spaces, sigma, w, grad_w).u;
    const NormContext ctx(spaces.velocity, 1.0, sigma);
    return ctx.grad_linf(pi) / grad_w_linf;
}

} // namespace flowlab
