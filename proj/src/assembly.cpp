#include "flowlab/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace flowlab
{

namespace
{

// (vd x n) matrix of grad(phi) n at point q.
DenseMatrix normal_grad(const Tabulation &t, int q, const Vec2 &n)
{
    const int vd = t.value_dim;
    DenseMatrix out(vd, t.n_dofs);
    for (int c = 0; c < vd; ++c)
        out.row(c) = t.grads.row((q * vd + c) * 2) * n.x() + t.grads.row((q * vd + c) * 2 + 1) * n.y();
    return out;
}

// (vd x n) matrix of (b . grad) phi at point q.
DenseMatrix directional_grad(const Tabulation &t, int q, const Vec2 &b)
{
    return normal_grad(t, q, b);
}

// Full gradient contraction sum_{c,d} dphi_i/dx_d dphi_j/dx_d at point q.
DenseMatrix grad_gram(const Tabulation &t, int q)
{
    const auto g = t.grad(q);
    return g.transpose() * g;
}

std::vector<int> dofs_of(const FESpace &space, int c)
{
    const auto d = space.cell_dofs(c);
    return {d.begin(), d.end()};
}

std::vector<int> facet_dofs_stacked(const FESpace &space, const FacetQuadrature &fq)
{
    std::vector<int> dofs = dofs_of(space, fq.plus);
    if (!fq.is_boundary())
    {
        const auto m = dofs_of(space, fq.minus);
        dofs.insert(dofs.end(), m.begin(), m.end());
    }
    return dofs;
}

void scatter(std::vector<Triplet> &triplets, const std::vector<int> &rows, const std::vector<int> &cols,
             const DenseMatrix &local)
{
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            if (local(i, j) != 0.0)
                triplets.emplace_back(rows[i], cols[j], local(i, j));
}

SparseMatrix build(int rows, int cols, const std::vector<Triplet> &triplets)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

// Trace operators on a facet for the stacked (plus, minus) DOF vector.
struct FacetOps
{
    DenseMatrix jump; ///< [[v]] = v+ - v-
    DenseMatrix avg;  ///< {{v}}
    DenseMatrix avg_normal_grad; ///< {{grad v}} n
};

FacetOps facet_ops(const FacetQuadrature &fq, int q, bool need_grad)
{
    const Tabulation &tp = fq.plus_tab;
    const int vd = tp.value_dim;
    const int np = tp.n_dofs;
    FacetOps ops;
    if (fq.is_boundary())
    {
        ops.jump = tp.value(q);
        ops.avg = 0.5 * ops.jump;
        if (need_grad)
            ops.avg_normal_grad = normal_grad(tp, q, fq.normal);
        return ops;
    }
    const Tabulation &tm = fq.minus_tab;
    const int nm = tm.n_dofs;
    ops.jump.resize(vd, np + nm);
    ops.avg.resize(vd, np + nm);
    ops.jump << tp.value(q), -tm.value(q);
    ops.avg << 0.5 * tp.value(q), 0.5 * tm.value(q);
    if (need_grad)
    {
        ops.avg_normal_grad.resize(vd, np + nm);
        ops.avg_normal_grad << 0.5 * normal_grad(tp, q, fq.normal), 0.5 * normal_grad(tm, q, fq.normal);
    }
    return ops;
}

// Visitor contract for the convection kernel: accumulate
// weight * test^T (op * w - r) on the DOF list.
struct MatrixSink
{
    std::vector<Triplet> triplets;
    Vector rhs;

    void operator()(const std::vector<int> &dofs, const DenseMatrix &test, double weight, const DenseMatrix &op,
                    const Vec2 *r)
    {
        scatter(triplets, dofs, dofs, weight * test.transpose() * op);
        if (r)
        {
            const Vector contrib = weight * test.transpose() * (*r);
            for (size_t i = 0; i < dofs.size(); ++i)
                rhs[dofs[i]] += contrib[i];
        }
    }
};

struct ActionSink
{
    const Vector &w;
    Vector out;

    void operator()(const std::vector<int> &dofs, const DenseMatrix &test, double weight, const DenseMatrix &op,
                    const Vec2 *r)
    {
        Vector local(dofs.size());
        for (size_t i = 0; i < dofs.size(); ++i)
            local[i] = w[dofs[i]];
        Vector value = op * local;
        if (r)
            value -= *r;
        const Vector contrib = weight * test.transpose() * value;
        for (size_t i = 0; i < dofs.size(); ++i)
            out[dofs[i]] += contrib[i];
    }
};

template <typename Sink> void convection_kernel(const FormCache &cache, const Vector &beta, const VectorField &g, Sink &sink)
{
    const FESpace &space = cache.space();
    if (space.value_dim() != 2)
        throw UnsupportedError("convection acts on vector spaces");
    if (beta.size() != space.n_dofs())
        throw UnsupportedError("convecting field does not belong to the trial space");

    for (const auto &cq : cache.cells())
    {
        const auto dofs = dofs_of(space, cq.cell);
        Vector bl(dofs.size());
        for (size_t i = 0; i < dofs.size(); ++i)
            bl[i] = beta[dofs[i]];
        const Tabulation &t = cq.tab;
        for (size_t q = 0; q < cq.weights.size(); ++q)
        {
            const Vec2 b = t.value(q) * bl;
            const double divb = t.divs.row(q).dot(bl);
            const DenseMatrix test = t.value(q);
            const DenseMatrix op = directional_grad(t, q, b) + 0.5 * divb * test;
            sink(dofs, test, cq.weights[q], op, nullptr);
        }
    }
    if (!space.has_facet_terms())
        return;

    for (const auto &fq : cache.facets())
    {
        const auto dofs = facet_dofs_stacked(space, fq);
        const int np = fq.plus_tab.n_dofs;
        Vector bl(dofs.size());
        for (size_t i = 0; i < dofs.size(); ++i)
            bl[i] = beta[dofs[i]];
        for (size_t q = 0; q < fq.weights.size(); ++q)
        {
            const double w = fq.weights[q];
            if (fq.is_boundary())
            {
                const double bn = (fq.plus_tab.value(q) * bl).dot(fq.normal);
                const double coef = -0.5 * bn + 0.5 * std::abs(bn);
                if (coef == 0.0)
                    continue;
                const DenseMatrix v = fq.plus_tab.value(q);
                Vec2 gv = Vec2::Zero();
                if (g)
                    gv = coef * g(fq.points[q]);
                sink(dofs, v, w, coef * v, g ? &gv : nullptr);
                continue;
            }
            const Vec2 bp = fq.plus_tab.value(q) * bl.head(np);
            const Vec2 bm = fq.minus_tab.value(q) * bl.tail(bl.size() - np);
            const double bn = 0.5 * (bp + bm).dot(fq.normal);
            const FacetOps ops = facet_ops(fq, static_cast<int>(q), false);
            sink(dofs, ops.avg, w, -bn * ops.jump, nullptr);
            if (bn != 0.0)
                sink(dofs, ops.jump, w, 0.5 * std::abs(bn) * ops.jump, nullptr);
        }
    }
}

} // namespace

FormCache::FormCache(std::shared_ptr<const FESpace> space, int volume_degree, int facet_degree)
    : space_(std::move(space)), volume_degree_(volume_degree), facet_degree_(facet_degree)
{
    const FESpace &s = *space_;
    const Mesh &mesh = s.mesh();
    const QuadRule rule = quadrature_rule(std::clamp(volume_degree, 1, max_quadrature_degree));
    const Tabulation reference = s.reference_tabulation(rule.points);
    cells_.resize(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c)
    {
        auto &cq = cells_[c];
        cq.cell = c;
        const CellMap &map = s.cell_map(c);
        cq.points.reserve(rule.size());
        cq.weights.reserve(rule.size());
        for (int q = 0; q < rule.size(); ++q)
        {
            cq.points.push_back(map.map(rule.points[q]));
            cq.weights.push_back(rule.weights[q] * map.det);
        }
        cq.tab = s.tabulate(c, reference);
    }

    const LineRule line = line_rule(facet_degree);
    std::vector<Vec2> shift_of(mesh.n_facets(), Vec2::Zero());
    for (const auto &p : mesh.periodic_pairs())
        shift_of[p.master] = p.shift;
    for (int f = 0; f < mesh.n_facets(); ++f)
    {
        if (mesh.is_periodic_slave(f))
            continue;
        const Facet &facet = mesh.facet(f);
        FacetQuadrature fq;
        fq.facet = f;
        fq.plus = facet.cells[0];
        fq.normal = facet.normal;
        fq.h = facet.length;
        if (facet.cells[1] >= 0)
            fq.minus = facet.cells[1];
        else if (mesh.periodic_partner(f) >= 0)
        {
            fq.minus = mesh.facet(mesh.periodic_partner(f)).cells[0];
            fq.shift = shift_of[f];
        }
        const Point a = mesh.vertex(facet.vertices[0]);
        const Point b = mesh.vertex(facet.vertices[1]);
        std::vector<Point> ref_plus, ref_minus;
        for (int q = 0; q < line.size(); ++q)
        {
            const Point x = a + line.points[q] * (b - a);
            fq.points.push_back(x);
            fq.weights.push_back(line.weights[q] * facet.length);
            ref_plus.push_back(s.cell_map(fq.plus).pullback(x));
            if (fq.minus >= 0)
                ref_minus.push_back(s.cell_map(fq.minus).pullback(x + fq.shift));
        }
        fq.plus_tab = s.tabulate(fq.plus, ref_plus);
        if (fq.minus >= 0)
            fq.minus_tab = s.tabulate(fq.minus, ref_minus);
        facets_.push_back(std::move(fq));
    }
}

int default_volume_degree(const FESpace &space) { return std::min(2 * space.degree() + 2, max_quadrature_degree); }

int convection_degree(const FESpace &space) { return std::min(3 * space.degree() + 2, max_quadrature_degree); }

namespace
{

FormCache bilinear_cache(const FESpace &space)
{
    // Non-owning alias: the cache never outlives the call that built it.
    std::shared_ptr<const FESpace> alias(std::shared_ptr<const FESpace>{}, &space);
    return FormCache(alias, default_volume_degree(space), default_volume_degree(space) + 1);
}

} // namespace

FormParameters form_parameters(const MethodConfig &config, double nu)
{
    FormParameters p;
    p.nu = nu;
    p.sigma = config.penalty();
    p.delta = config.graddiv();
    return p;
}

SparseMatrix assemble_mass(const FESpace &space)
{
    const FormCache cache = bilinear_cache(space);
    std::vector<Triplet> triplets;
    for (const auto &cq : cache.cells())
    {
        const auto dofs = dofs_of(space, cq.cell);
        DenseMatrix local = DenseMatrix::Zero(dofs.size(), dofs.size());
        for (size_t q = 0; q < cq.weights.size(); ++q)
        {
            const auto v = cq.tab.value(q);
            local.noalias() += cq.weights[q] * v.transpose() * v;
        }
        scatter(triplets, dofs, dofs, local);
    }
    return build(space.n_dofs(), space.n_dofs(), triplets);
}

AssembledForm assemble_viscous(const FESpace &space, const FormParameters &params, const VectorField &g)
{
    if (space.has_facet_terms() && !(params.sigma > 0.0))
        throw ConfigError("SIP penalty must be positive for discontinuous spaces");
    if (space.has_facet_terms() && params.sigma < space.degree() * space.degree())
        std::cerr << "warning: SIP penalty " << params.sigma << " below k^2 = " << space.degree() * space.degree()
                  << '\n';
    const FormCache cache = bilinear_cache(space);
    const double nu = params.nu;
    std::vector<Triplet> triplets;
    AssembledForm out;
    out.rhs = Vector::Zero(space.n_dofs());
    for (const auto &cq : cache.cells())
    {
        const auto dofs = dofs_of(space, cq.cell);
        DenseMatrix local = DenseMatrix::Zero(dofs.size(), dofs.size());
        for (size_t q = 0; q < cq.weights.size(); ++q)
        {
            local.noalias() += (nu * cq.weights[q]) * grad_gram(cq.tab, static_cast<int>(q));
            if (params.delta != 0.0 && space.value_dim() == 2)
            {
                const auto d = cq.tab.divs.row(q);
                local.noalias() += (params.delta * cq.weights[q]) * d.transpose() * d;
            }
        }
        scatter(triplets, dofs, dofs, local);
    }
    if (space.has_facet_terms())
    {
        for (const auto &fq : cache.facets())
        {
            const auto dofs = facet_dofs_stacked(space, fq);
            DenseMatrix local = DenseMatrix::Zero(dofs.size(), dofs.size());
            const double pen = params.sigma / fq.h;
            for (size_t q = 0; q < fq.weights.size(); ++q)
            {
                const FacetOps ops = facet_ops(fq, static_cast<int>(q), true);
                const DenseMatrix &j = ops.jump;
                const DenseMatrix &a = ops.avg_normal_grad;
                local.noalias() +=
                    (nu * fq.weights[q]) * (-(a.transpose() * j + j.transpose() * a) + pen * j.transpose() * j);
                if (fq.is_boundary() && g)
                {
                    const Vec2 gv = g(fq.points[q]);
                    const Vector contrib = (nu * fq.weights[q]) * (-(a.transpose() * gv) + pen * j.transpose() * gv);
                    for (size_t i = 0; i < dofs.size(); ++i)
                        out.rhs[dofs[i]] += contrib[i];
                }
            }
            scatter(triplets, dofs, dofs, local);
        }
    }
    out.matrix = build(space.n_dofs(), space.n_dofs(), triplets);
    return out;
}

SparseMatrix assemble_graddiv(const FESpace &space, double delta)
{
    const FormCache cache = bilinear_cache(space);
    std::vector<Triplet> triplets;
    for (const auto &cq : cache.cells())
    {
        const auto dofs = dofs_of(space, cq.cell);
        DenseMatrix local = DenseMatrix::Zero(dofs.size(), dofs.size());
        for (size_t q = 0; q < cq.weights.size(); ++q)
        {
            const auto d = cq.tab.divs.row(q);
            local.noalias() += (delta * cq.weights[q]) * d.transpose() * d;
        }
        scatter(triplets, dofs, dofs, local);
    }
    return build(space.n_dofs(), space.n_dofs(), triplets);
}

DivergenceForm assemble_divergence(const FESpace &velocity, const FESpace &pressure)
{
    if (velocity.value_dim() != 2 || pressure.value_dim() != 1)
        throw UnsupportedError("divergence coupling needs a vector velocity and a scalar pressure space");
    const QuadRule rule = quadrature_rule(default_volume_degree(velocity));
    const Tabulation vref = velocity.reference_tabulation(rule.points);
    const Tabulation pref = pressure.reference_tabulation(rule.points);
    const Mesh &mesh = velocity.mesh();
    std::vector<Triplet> triplets;
    DivergenceForm out;
    out.mean = Vector::Zero(pressure.n_dofs());
    for (int c = 0; c < mesh.n_cells(); ++c)
    {
        const Tabulation vt = velocity.tabulate(c, vref);
        const Tabulation pt = pressure.tabulate(c, pref);
        const double det = velocity.cell_map(c).det;
        const auto vd = dofs_of(velocity, c);
        const auto pd = dofs_of(pressure, c);
        DenseMatrix local = DenseMatrix::Zero(pd.size(), vd.size());
        Vector mean_local = Vector::Zero(pd.size());
        for (int q = 0; q < rule.size(); ++q)
        {
            const double w = rule.weights[q] * det;
            local.noalias() -= w * pt.values.row(q).transpose() * vt.divs.row(q);
            mean_local += w * pt.values.row(q).transpose();
        }
        scatter(triplets, pd, vd, local);
        for (size_t i = 0; i < pd.size(); ++i)
            out.mean[pd[i]] += mean_local[i];
    }
    out.B = build(pressure.n_dofs(), velocity.n_dofs(), triplets);
    return out;
}

OperatorSet assemble_operators(const SpacePair &spaces, const FormParameters &params)
{
    OperatorSet ops;
    ops.velocity = spaces.velocity;
    ops.pressure = spaces.pressure;
    ops.params = params;
    ops.M = assemble_mass(*spaces.velocity);
    ops.A = assemble_viscous(*spaces.velocity, params).matrix;
    DivergenceForm div = assemble_divergence(*spaces.velocity, *spaces.pressure);
    ops.B = std::move(div.B);
    ops.mean = std::move(div.mean);
    return ops;
}

AssembledForm assemble_convection(const FormCache &cache, const Vector &beta, const VectorField &g)
{
    MatrixSink sink;
    const int n = cache.space().n_dofs();
    sink.rhs = Vector::Zero(n);
    convection_kernel(cache, beta, g, sink);
    return {build(n, n, sink.triplets), std::move(sink.rhs)};
}

AssembledForm assemble_convection(const FESpace &space, const Vector &beta, const VectorField &g)
{
    std::shared_ptr<const FESpace> alias(std::shared_ptr<const FESpace>{}, &space);
    const FormCache cache(alias, convection_degree(space), convection_degree(space));
    return assemble_convection(cache, beta, g);
}

Vector apply_convection(const FormCache &cache, const Vector &beta, const Vector &w, const VectorField &g)
{
    ActionSink sink{w, Vector::Zero(cache.space().n_dofs())};
    convection_kernel(cache, beta, g, sink);
    return std::move(sink.out);
}

Vector assemble_forcing(const FormCache &cache, const VectorField &f)
{
    const FESpace &space = cache.space();
    Vector out = Vector::Zero(space.n_dofs());
    if (!f)
        return out;
    for (const auto &cq : cache.cells())
    {
        const auto dofs = dofs_of(space, cq.cell);
        Vector local = Vector::Zero(dofs.size());
        for (size_t q = 0; q < cq.weights.size(); ++q)
            local.noalias() += cq.weights[q] * cq.tab.value(q).transpose() * f(cq.points[q]);
        for (size_t i = 0; i < dofs.size(); ++i)
            out[dofs[i]] += local[i];
    }
    return out;
}

Vector assemble_forcing(const FESpace &space, const VectorField &f)
{
    if (!f)
        return Vector::Zero(space.n_dofs());
    return assemble_forcing(bilinear_cache(space), f);
}

Vector viscous_lifting(const FormCache &cache, const FormParameters &params, const VectorField &g)
{
    const FESpace &space = cache.space();
    Vector out = Vector::Zero(space.n_dofs());
    if (!g || !space.has_facet_terms())
        return out;
    for (const auto &fq : cache.facets())
    {
        if (!fq.is_boundary())
            continue;
        const auto dofs = facet_dofs_stacked(space, fq);
        const double pen = params.sigma / fq.h;
        Vector local = Vector::Zero(dofs.size());
        for (size_t q = 0; q < fq.weights.size(); ++q)
        {
            const FacetOps ops = facet_ops(fq, static_cast<int>(q), true);
            const Vec2 gv = g(fq.points[q]);
            local.noalias() +=
                (params.nu * fq.weights[q]) * (-(ops.avg_normal_grad.transpose() * gv) + pen * ops.jump.transpose() * gv);
        }
        for (size_t i = 0; i < dofs.size(); ++i)
            out[dofs[i]] += local[i];
    }
    return out;
}

FormCache bilinear_form_cache(std::shared_ptr<const FESpace> space)
{
    const int d = default_volume_degree(*space);
    return FormCache(std::move(space), d, d + 1);
}

namespace
{

SparseMatrix energy_gram(const FESpace &space, double sigma, bool sharp)
{
    const FormCache cache = bilinear_cache(space);
    std::vector<Triplet> triplets;
    for (const auto &cq : cache.cells())
    {
        const auto dofs = dofs_of(space, cq.cell);
        DenseMatrix local = DenseMatrix::Zero(dofs.size(), dofs.size());
        for (size_t q = 0; q < cq.weights.size(); ++q)
            local.noalias() += cq.weights[q] * grad_gram(cq.tab, static_cast<int>(q));
        scatter(triplets, dofs, dofs, local);
    }
    const Mesh &mesh = space.mesh();
    for (const auto &fq : cache.facets())
    {
        const auto dofs = facet_dofs_stacked(space, fq);
        DenseMatrix local = DenseMatrix::Zero(dofs.size(), dofs.size());
        const int np = fq.plus_tab.n_dofs;
        for (size_t q = 0; q < fq.weights.size(); ++q)
        {
            const int qi = static_cast<int>(q);
            if (space.has_facet_terms())
            {
                const FacetOps ops = facet_ops(fq, qi, false);
                local.noalias() += (fq.weights[q] * sigma / fq.h) * ops.jump.transpose() * ops.jump;
            }
            if (sharp)
            {
                // h_K ||grad v n_K||^2 on each side, outward normals of each cell
                const DenseMatrix gp = normal_grad(fq.plus_tab, qi, fq.normal);
                local.topLeftCorner(np, np).noalias() +=
                    (fq.weights[q] * mesh.cell_diameter(fq.plus)) * gp.transpose() * gp;
                if (!fq.is_boundary())
                {
                    const DenseMatrix gm = normal_grad(fq.minus_tab, qi, -fq.normal);
                    const int nm = fq.minus_tab.n_dofs;
                    local.bottomRightCorner(nm, nm).noalias() +=
                        (fq.weights[q] * mesh.cell_diameter(fq.minus)) * gm.transpose() * gm;
                }
            }
        }
        scatter(triplets, dofs, dofs, local);
    }
    return build(space.n_dofs(), space.n_dofs(), triplets);
}

} // namespace

SparseMatrix assemble_energy_norm(const FESpace &space, double sigma) { return energy_gram(space, sigma, false); }

SparseMatrix assemble_sharp_norm(const FESpace &space, double sigma) { return energy_gram(space, sigma, true); }

SparseMatrix assemble_upwind_seminorm(const FormCache &cache, const Vector &beta)
{
    const FESpace &space = cache.space();
    std::vector<Triplet> triplets;
    if (space.has_facet_terms())
        for (const auto &fq : cache.facets())
        {
            if (fq.is_boundary())
                continue;
            const auto dofs = facet_dofs_stacked(space, fq);
            const int np = fq.plus_tab.n_dofs;
            Vector bl(dofs.size());
            for (size_t i = 0; i < dofs.size(); ++i)
                bl[i] = beta[dofs[i]];
            DenseMatrix local = DenseMatrix::Zero(dofs.size(), dofs.size());
            for (size_t q = 0; q < fq.weights.size(); ++q)
            {
                const Vec2 bp = fq.plus_tab.value(q) * bl.head(np);
                const Vec2 bm = fq.minus_tab.value(q) * bl.tail(bl.size() - np);
                const double bn = 0.5 * (bp + bm).dot(fq.normal);
                const FacetOps ops = facet_ops(fq, static_cast<int>(q), false);
                local.noalias() += (0.5 * std::abs(bn) * fq.weights[q]) * ops.jump.transpose() * ops.jump;
            }
            scatter(triplets, dofs, dofs, local);
        }
    return build(space.n_dofs(), space.n_dofs(), triplets);
}

Vector viscous_moments(const FESpace &space, double sigma, const VectorField &w, const TensorField &grad_w)
{
    const FormCache cache = bilinear_cache(space);
    Vector out = Vector::Zero(space.n_dofs());
    auto add = [&](const std::vector<int> &dofs, const Vector &local) {
        for (size_t i = 0; i < dofs.size(); ++i)
            out[dofs[i]] += local[i];
    };
    for (const auto &cq : cache.cells())
    {
        const auto dofs = dofs_of(space, cq.cell);
        Vector local = Vector::Zero(dofs.size());
        for (size_t q = 0; q < cq.weights.size(); ++q)
        {
            const Mat2 gw = grad_w(cq.points[q]);
            // rows (c, d) of the tabulated gradient against (grad w)_{cd}
            const Eigen::Vector4d flat(gw(0, 0), gw(0, 1), gw(1, 0), gw(1, 1));
            local.noalias() += cq.weights[q] * cq.tab.grad(q).transpose() * flat;
        }
        add(dofs, local);
    }
    if (!space.has_facet_terms())
        return out;
    for (const auto &fq : cache.facets())
    {
        const auto dofs = facet_dofs_stacked(space, fq);
        Vector local = Vector::Zero(dofs.size());
        for (size_t q = 0; q < fq.weights.size(); ++q)
        {
            const FacetOps ops = facet_ops(fq, static_cast<int>(q), true);
            const Vec2 gn = grad_w(fq.points[q]) * fq.normal;
            local.noalias() -= fq.weights[q] * ops.jump.transpose() * gn;
            if (fq.is_boundary())
            {
                const Vec2 wv = w(fq.points[q]);
                local.noalias() += fq.weights[q] *
                                   (-(ops.avg_normal_grad.transpose() * wv) + (sigma / fq.h) * ops.jump.transpose() * wv);
            }
        }
        add(dofs, local);
    }
    return out;
}

Vector boundary_values(const FESpace &space, const VectorField &g)
{
    Vector out = Vector::Zero(space.n_dofs());
    if (space.dirichlet_dofs().empty() || !g)
        return out;
    const Mesh &mesh = space.mesh();
    const RefBasis &basis = space.basis();
    std::vector<char> boundary_cell(mesh.n_cells(), 0);
    for (int f = 0; f < mesh.n_facets(); ++f)
        if (mesh.is_domain_boundary(f))
            boundary_cell[mesh.facet(f).cells[0]] = 1;
    const auto &samples = basis.sample_points();
    const int ns = static_cast<int>(samples.size());
    for (int c = 0; c < mesh.n_cells(); ++c)
    {
        if (!boundary_cell[c])
            continue;
        const CellMap &map = space.cell_map(c);
        const auto dofs = space.cell_dofs(c);
        const auto signs = space.cell_signs(c);
        if (space.family() == Family::BDM)
        {
            // edge functionals only read edge samples
            const int n_edge = 3 * basis.dofs_per_edge();
            const int n_edge_samples = 3 * line_rule(2 * space.degree() + 2).size();
            const Mat2 pull = map.det * map.inverse;
            Vector stacked = Vector::Zero(2 * ns);
            for (int s = 0; s < n_edge_samples; ++s)
                stacked.segment<2>(2 * s) = pull * g(map.map(samples[s]));
            const Vector local = basis.functionals().topRows(n_edge) * stacked;
            for (int i = 0; i < n_edge; ++i)
                out[dofs[i]] = signs[i] * local[i];
        }
        else
        {
            const int dim = basis.dim();
            for (int i = 0; i < 3 + 3 * basis.dofs_per_edge(); ++i)
            {
                const Vec2 v = g(map.map(samples[i]));
                out[dofs[i]] = v.x();
                out[dofs[dim + i]] = v.y();
            }
        }
    }
    Vector masked = Vector::Zero(space.n_dofs());
    for (int d : space.dirichlet_dofs())
        masked[d] = out[d];
    return masked;
}

Vector gather(const FESpace &space, int c, const Vector &global)
{
    const auto dofs = space.cell_dofs(c);
    Vector local(dofs.size());
    for (size_t i = 0; i < dofs.size(); ++i)
        local[i] = global[dofs[i]];
    return local;
}

} // namespace flowlab
