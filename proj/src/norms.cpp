#include "flowlab/norms.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace flowlab
{

namespace
{

double spectral_norm(const Mat2 &g)
{
    return std::sqrt(Eigen::SelfAdjointEigenSolver<Mat2>(g.transpose() * g, Eigen::EigenvaluesOnly).eigenvalues()(1));
}

int error_degree(const FESpace &space) { return std::min(2 * space.degree() + 4, max_quadrature_degree); }

} // namespace

NormContext::NormContext(std::shared_ptr<const FESpace> velocity, double nu, double sigma)
    : space_(velocity), nu_(nu), sigma_(sigma), mass_(assemble_mass(*velocity)),
      energy_(assemble_energy_norm(*velocity, sigma)), sharp_(assemble_sharp_norm(*velocity, sigma)),
      error_cache_(velocity, error_degree(*velocity), error_degree(*velocity)),
      convection_cache_(velocity, convection_degree(*velocity), convection_degree(*velocity))
{
    const auto &rv = reference_vertices();
    const std::vector<Point> verts(rv.begin(), rv.end());
    const Tabulation ref = velocity->reference_tabulation(verts);
    vertex_tabs_.reserve(velocity->mesh().n_cells());
    for (int c = 0; c < velocity->mesh().n_cells(); ++c)
        vertex_tabs_.push_back(velocity->tabulate(c, ref));
}

std::array<double, 3> NormContext::errors(const Vector &u, const VectorField &w, const TensorField &grad_w) const
{
    const FESpace &space = *space_;
    double l2 = 0.0, h1 = 0.0, jumps = 0.0;
    for (const auto &cq : error_cache_.cells())
    {
        const Vector local = gather(space, cq.cell, u);
        for (size_t q = 0; q < cq.weights.size(); ++q)
        {
            const Vec2 uh = cq.tab.value(q) * local;
            const Vector guh = cq.tab.grad(q) * local; // (c, d) flattened
            const Mat2 gw = grad_w(cq.points[q]);
            const Eigen::Vector4d gflat(gw(0, 0), gw(0, 1), gw(1, 0), gw(1, 1));
            l2 += cq.weights[q] * (w(cq.points[q]) - uh).squaredNorm();
            h1 += cq.weights[q] * (gflat - guh).squaredNorm();
        }
    }
    if (space.has_facet_terms())
        for (const auto &fq : error_cache_.facets())
        {
            const Vector lp = gather(space, fq.plus, u);
            const Vector lm = fq.is_boundary() ? Vector() : gather(space, fq.minus, u);
            for (size_t q = 0; q < fq.weights.size(); ++q)
            {
                const Vec2 up = fq.plus_tab.value(q) * lp;
                const Vec2 other = fq.is_boundary() ? Vec2(w(fq.points[q])) : Vec2(fq.minus_tab.value(q) * lm);
                jumps += fq.weights[q] * sigma_ / fq.h * (up - other).squaredNorm();
            }
        }
    return {std::sqrt(l2), std::sqrt(h1), std::sqrt(h1 + jumps)};
}

double NormContext::upwind_seminorm_sq(const Vector &beta, const Vector &u) const
{
    const FESpace &space = *space_;
    if (!space.has_facet_terms())
        return 0.0;
    double s = 0.0;
    for (const auto &fq : convection_cache_.facets())
    {
        if (fq.is_boundary())
            continue;
        const Vector bp = gather(space, fq.plus, beta), bm = gather(space, fq.minus, beta);
        const Vector up = gather(space, fq.plus, u), um = gather(space, fq.minus, u);
        for (size_t q = 0; q < fq.weights.size(); ++q)
        {
            const double bn = 0.5 * (fq.plus_tab.value(q) * bp + fq.minus_tab.value(q) * bm).dot(fq.normal);
            const Vec2 jump = fq.plus_tab.value(q) * up - fq.minus_tab.value(q) * um;
            s += 0.5 * std::abs(bn) * fq.weights[q] * jump.squaredNorm();
        }
    }
    return s;
}

std::array<double, 2> NormContext::divergence(const Vector &u) const
{
    const FESpace &space = *space_;
    double l2 = 0.0, linf = 0.0;
    for (const auto &cq : error_cache_.cells())
    {
        const Vector local = gather(space, cq.cell, u);
        const Vector d = cq.tab.divs * local;
        for (size_t q = 0; q < cq.weights.size(); ++q)
        {
            l2 += cq.weights[q] * d[q] * d[q];
            linf = std::max(linf, std::abs(d[q]));
        }
        const Vector dv = vertex_tabs_[cq.cell].divs * local;
        linf = std::max(linf, dv.cwiseAbs().maxCoeff());
    }
    return {std::sqrt(l2), linf};
}

double NormContext::grad_linf(const Vector &u) const
{
    const FESpace &space = *space_;
    double m = 0.0;
    auto visit = [&](const Tabulation &tab, const Vector &local) {
        for (int q = 0; q < tab.n_points; ++q)
        {
            const Vector g = tab.grad(q) * local;
            Mat2 G;
            G << g[0], g[1], g[2], g[3];
            m = std::max(m, spectral_norm(G));
        }
    };
    for (const auto &cq : error_cache_.cells())
    {
        const Vector local = gather(space, cq.cell, u);
        visit(cq.tab, local);
        visit(vertex_tabs_[cq.cell], local);
    }
    return m;
}

NormReport NormContext::compute(const Vector &u, double t, const ExactSolution *exact) const
{
    NormReport r;
    const double e2 = u.dot(energy_ * u);
    r.energy = std::sqrt(std::max(e2, 0.0));
    r.sharp = std::sqrt(std::max(u.dot(sharp_ * u), 0.0));
    r.kinetic = 0.5 * u.dot(mass_ * u);
    r.dissipation = nu_ * e2;
    r.upwind = std::sqrt(upwind_seminorm_sq(u, u));
    const auto div = divergence(u);
    r.div_l2 = div[0];
    r.div_linf = div[1];
    if (exact)
    {
        const auto e = errors(u, exact->velocity_at(t), exact->gradient_at(t));
        r.err_l2 = e[0];
        r.err_h1_broken = e[1];
        r.err_energy = e[2];
    }
    return r;
}

NormReport compute_norms(const NormContext &ctx, const Vector &u, double t, const ExactSolution *exact)
{
    return ctx.compute(u, t, exact);
}

} // namespace flowlab
