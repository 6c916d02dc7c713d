#include "flowlab/space.hpp"

#include <algorithm>
#include <cmath>

namespace flowlab
{

namespace
{

// Start vertex of the canonical direction of a facet. Slave facets follow
// the translated direction of their master so aliased DOFs agree.
int canonical_start(const Mesh &mesh, int f)
{
    const int partner = mesh.periodic_partner(f);
    if (partner < 0 || !mesh.is_periodic_slave(f))
        return mesh.facet(f).vertices[0];
    for (const auto &p : mesh.periodic_pairs())
    {
        if (p.slave != f)
            continue;
        const Point x = mesh.vertex(mesh.facet(p.master).vertices[0]) + p.shift;
        const auto &fs = mesh.facet(f);
        const double d0 = (mesh.vertex(fs.vertices[0]) - x).norm();
        const double d1 = (mesh.vertex(fs.vertices[1]) - x).norm();
        return d0 <= d1 ? fs.vertices[0] : fs.vertices[1];
    }
    return mesh.facet(f).vertices[0];
}

} // namespace

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, Family family, int degree, int components)
    : mesh_(std::move(mesh)), family_(family), degree_(degree), components_(components)
{
    if (components != 1 && components != 2)
        throw UnsupportedError("spaces have one or two components");
    if (family == Family::BDM && components != 1)
        throw UnsupportedError("BDM spaces are built with components = 1 (they are vector valued)");
    basis_ = ref_basis(family, degree);
    const Mesh &m = *mesh_;
    const int dim = basis_->dim();
    local_dim_ = dim * components_;
    const int nc = m.n_cells();

    maps_.reserve(nc);
    for (int c = 0; c < nc; ++c)
    {
        const auto &t = m.cell(c);
        maps_.emplace_back(m.vertex(t[0]), m.vertex(t[1]), m.vertex(t[2]));
    }

    // Logical edges: slave facets alias their master.
    std::vector<int> logical(m.n_facets(), -1);
    int n_edges = 0;
    for (int f = 0; f < m.n_facets(); ++f)
        if (!m.is_periodic_slave(f))
            logical[f] = n_edges++;
    for (const auto &p : m.periodic_pairs())
        logical[p.slave] = logical[p.master];
    std::vector<int> start(m.n_facets());
    for (int f = 0; f < m.n_facets(); ++f)
        start[f] = canonical_start(m, f);

    cell_dofs_.assign(static_cast<size_t>(nc) * local_dim_, -1);
    cell_signs_.assign(static_cast<size_t>(nc) * local_dim_, 1.0);

    std::vector<int> boundary_dofs;
    const int interior = basis_->dofs_interior();

    if (family == Family::LagrangeDiscontinuous)
    {
        const int n_scalar = nc * dim;
        for (int c = 0; c < nc; ++c)
            for (int comp = 0; comp < components_; ++comp)
                for (int i = 0; i < dim; ++i)
                    cell_dofs_[c * local_dim_ + comp * dim + i] = comp * n_scalar + c * dim + i;
        n_dofs_ = n_scalar * components_;
    }
    else if (family == Family::LagrangeContinuous)
    {
        const int k = degree_;
        const auto &rep = m.vertex_representative();
        std::vector<int> vindex(m.n_vertices(), -1);
        int n_v = 0;
        std::vector<char> used(m.n_vertices(), 0);
        for (const auto &t : m.cells())
            for (int v : t)
                used[rep[v]] = 1;
        for (int v = 0; v < m.n_vertices(); ++v)
            if (used[v] && rep[v] == v)
                vindex[v] = n_v++;
        const int per_edge = k - 1;
        const int n_scalar = n_v + n_edges * per_edge + nc * interior;
        for (int c = 0; c < nc; ++c)
        {
            const auto &t = m.cell(c);
            std::vector<int> sdofs;
            sdofs.reserve(dim);
            for (int i = 0; i < 3; ++i)
                sdofs.push_back(vindex[rep[t[i]]]);
            for (int e = 0; e < 3; ++e)
            {
                const int f = m.cell_facet(c, e);
                const auto [a, b] = local_edge(e);
                (void)b;
                const bool agree = t[a] == start[f];
                for (int j = 1; j < k; ++j)
                    sdofs.push_back(n_v + logical[f] * per_edge + (agree ? j - 1 : k - 1 - j));
            }
            for (int i = 0; i < interior; ++i)
                sdofs.push_back(n_v + n_edges * per_edge + c * interior + i);
            for (int comp = 0; comp < components_; ++comp)
                for (int i = 0; i < dim; ++i)
                    cell_dofs_[c * local_dim_ + comp * dim + i] = comp * n_scalar + sdofs[i];
        }
        n_dofs_ = n_scalar * components_;
    }
    else
    {
        const int k = degree_;
        const int per_edge = k + 1;
        for (int c = 0; c < nc; ++c)
        {
            const auto &t = m.cell(c);
            int i = 0;
            for (int e = 0; e < 3; ++e)
            {
                const int f = m.cell_facet(c, e);
                const auto [a, b] = local_edge(e);
                (void)b;
                const bool agree = t[a] == start[f];
                for (int j = 0; j <= k; ++j, ++i)
                {
                    cell_dofs_[c * local_dim_ + i] = logical[f] * per_edge + j;
                    cell_signs_[c * local_dim_ + i] = agree ? 1.0 : (j % 2 == 1 ? 1.0 : -1.0);
                }
            }
            for (int j = 0; j < interior; ++j, ++i)
                cell_dofs_[c * local_dim_ + i] = n_edges * per_edge + c * interior + j;
        }
        n_dofs_ = n_edges * per_edge + nc * interior;
    }

    for (int f = 0; f < m.n_facets(); ++f)
    {
        if (!m.is_domain_boundary(f) || family == Family::LagrangeDiscontinuous)
            continue;
        auto d = facet_dofs(f);
        boundary_dofs.insert(boundary_dofs.end(), d.begin(), d.end());
    }
    std::sort(boundary_dofs.begin(), boundary_dofs.end());
    boundary_dofs.erase(std::unique(boundary_dofs.begin(), boundary_dofs.end()), boundary_dofs.end());
    dirichlet_ = std::move(boundary_dofs);
}

std::vector<int> FESpace::facet_dofs(int f) const
{
    const Mesh &m = *mesh_;
    const auto &facet = m.facet(f);
    const int c = facet.cells[0];
    const int e = facet.local_index[0];
    const auto dofs = cell_dofs(c);
    std::vector<int> out;
    const int dim = basis_->dim();
    if (family_ == Family::LagrangeDiscontinuous)
        return out;
    if (family_ == Family::BDM)
    {
        const int per_edge = degree_ + 1;
        for (int j = 0; j < per_edge; ++j)
            out.push_back(dofs[e * per_edge + j]);
        return out;
    }
    const auto [a, b] = local_edge(e);
    const int per_edge = degree_ - 1;
    for (int comp = 0; comp < components_; ++comp)
    {
        out.push_back(dofs[comp * dim + a]);
        out.push_back(dofs[comp * dim + b]);
        for (int j = 0; j < per_edge; ++j)
            out.push_back(dofs[comp * dim + 3 + e * per_edge + j]);
    }
    return out;
}

Tabulation FESpace::reference_tabulation(const std::vector<Point> &ref_points) const
{
    return basis_->tabulate(ref_points);
}

Tabulation FESpace::tabulate(int c, const std::vector<Point> &ref_points) const
{
    return tabulate(c, basis_->tabulate(ref_points));
}

Tabulation FESpace::tabulate(int c, const Tabulation &reference) const
{
    Tabulation phys = map_basis(maps_[c], *basis_, reference);
    if (family_ == Family::BDM)
    {
        const auto signs = cell_signs(c);
        for (int i = 0; i < phys.n_dofs; ++i)
        {
            if (signs[i] > 0.0)
                continue;
            phys.values.col(i) *= -1.0;
            phys.grads.col(i) *= -1.0;
            phys.divs.col(i) *= -1.0;
        }
        return phys;
    }
    if (components_ == 1)
        return phys;

    const int nq = phys.n_points;
    const int d = phys.n_dofs;
    Tabulation vec;
    vec.n_points = nq;
    vec.n_dofs = 2 * d;
    vec.value_dim = 2;
    vec.values = DenseMatrix::Zero(2 * nq, 2 * d);
    vec.grads = DenseMatrix::Zero(4 * nq, 2 * d);
    vec.divs = DenseMatrix::Zero(nq, 2 * d);
    for (int q = 0; q < nq; ++q)
        for (int comp = 0; comp < 2; ++comp)
        {
            vec.values.block(2 * q + comp, comp * d, 1, d) = phys.values.row(q);
            vec.grads.block((2 * q + comp) * 2, comp * d, 1, d) = phys.grads.row(2 * q);
            vec.grads.block((2 * q + comp) * 2 + 1, comp * d, 1, d) = phys.grads.row(2 * q + 1);
            vec.divs.block(q, comp * d, 1, d) = phys.grads.row(2 * q + comp);
        }
    return vec;
}

int FESpace::locate(const Point &x) const
{
    for (int c = 0; c < mesh_->n_cells(); ++c)
    {
        const Point r = maps_[c].pullback(x);
        if (r.x() >= -1e-12 && r.y() >= -1e-12 && r.x() + r.y() <= 1.0 + 1e-12)
            return c;
    }
    throw DomainError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) + ") is outside the mesh");
}

std::string to_string(Method method)
{
    switch (method)
    {
    case Method::TH:
        return "th";
    case Method::GDTH:
        return "gdth";
    case Method::SV:
        return "sv";
    case Method::BDM:
        return "bdm";
    }
    return "?";
}

Method parse_method(const std::string &name)
{
    if (name == "th")
        return Method::TH;
    if (name == "gdth")
        return Method::GDTH;
    if (name == "sv")
        return Method::SV;
    if (name == "bdm")
        return Method::BDM;
    throw ConfigError("unknown method '" + name + "' (expected th|gdth|sv|bdm)");
}

double MethodConfig::graddiv() const
{
    if (method != Method::GDTH)
        return 0.0;
    return delta >= 0.0 ? delta : 0.1;
}

void MethodConfig::validate(const Mesh &mesh) const
{
    if (degree < 1 || degree > max_basis_degree)
        throw UnsupportedError("velocity degree must lie in [1, 8]");
    if ((method == Method::TH || method == Method::GDTH || method == Method::SV) && degree < 2)
        throw UnsupportedError(to_string(method) + " needs velocity degree >= 2");
    if (method == Method::SV && degree < 4 && !mesh.is_alfeld_split())
        throw UnsupportedError("Scott-Vogelius with k < 4 requires a barycentre-refined (Alfeld) mesh");
    if (method == Method::BDM && !(penalty() > 0.0))
        throw ConfigError("SIP penalty must be positive");
    if (delta < 0.0 && delta != -1.0)
        throw ConfigError("grad-div parameter must be non-negative");
}

std::shared_ptr<const FESpace> build_space(std::shared_ptr<const Mesh> mesh, Family family, int degree,
                                           int components)
{
    return std::make_shared<const FESpace>(std::move(mesh), family, degree, components);
}

SpacePair build_spaces(std::shared_ptr<const Mesh> mesh, const MethodConfig &config)
{
    config.validate(*mesh);
    SpacePair pair;
    if (config.method == Method::BDM)
        pair.velocity = build_space(mesh, Family::BDM, config.degree, 1);
    else
        pair.velocity = build_space(mesh, Family::LagrangeContinuous, config.degree, 2);
    pair.pressure = build_space(mesh, config.pressure_family(), config.pressure_degree(), 1);
    return pair;
}

Vector interpolate(const FESpace &space, const VectorField &field)
{
    if (space.value_dim() != 2)
        throw UnsupportedError("vector field interpolated into a scalar space");
    const RefBasis &basis = space.basis();
    const Mesh &mesh = space.mesh();
    Vector out = Vector::Zero(space.n_dofs());
    const auto &samples = basis.sample_points();
    const int ns = static_cast<int>(samples.size());
    Vector stacked(2 * ns);
    for (int c = 0; c < mesh.n_cells(); ++c)
    {
        const CellMap &map = space.cell_map(c);
        const auto dofs = space.cell_dofs(c);
        const auto signs = space.cell_signs(c);
        if (space.family() == Family::BDM)
        {
            const Mat2 pull = map.det * map.inverse;
            for (int s = 0; s < ns; ++s)
                stacked.segment<2>(2 * s) = pull * field(map.map(samples[s]));
            const Vector local = basis.functionals() * stacked;
            for (int i = 0; i < basis.dim(); ++i)
                out[dofs[i]] = signs[i] * local[i];
        }
        else
        {
            const int dim = basis.dim();
            for (int s = 0; s < ns; ++s)
            {
                const Vec2 v = field(map.map(samples[s]));
                out[dofs[s]] = v.x();
                out[dofs[dim + s]] = v.y();
            }
        }
    }
    return out;
}

Vector interpolate(const FESpace &space, const ScalarField &field)
{
    if (space.value_dim() != 1)
        throw UnsupportedError("scalar field interpolated into a vector space");
    const Mesh &mesh = space.mesh();
    Vector out = Vector::Zero(space.n_dofs());
    const auto &nodes = space.basis().nodes();
    for (int c = 0; c < mesh.n_cells(); ++c)
    {
        const CellMap &map = space.cell_map(c);
        const auto dofs = space.cell_dofs(c);
        for (size_t i = 0; i < nodes.size(); ++i)
            out[dofs[i]] = field(map.map(nodes[i]));
    }
    return out;
}

Vec2 evaluate_vector(const FESpace &space, const Vector &coeffs, const Point &x)
{
    if (space.value_dim() != 2)
        throw UnsupportedError("vector evaluation of a scalar space");
    const int c = space.locate(x);
    const Tabulation tab = space.tabulate(c, std::vector<Point>{space.cell_map(c).pullback(x)});
    const auto dofs = space.cell_dofs(c);
    Vector local(tab.n_dofs);
    for (int i = 0; i < tab.n_dofs; ++i)
        local[i] = coeffs[dofs[i]];
    return tab.values * local;
}

double evaluate_scalar(const FESpace &space, const Vector &coeffs, const Point &x)
{
    if (space.value_dim() != 1)
        throw UnsupportedError("scalar evaluation of a vector space");
    const int c = space.locate(x);
    const Tabulation tab = space.tabulate(c, std::vector<Point>{space.cell_map(c).pullback(x)});
    const auto dofs = space.cell_dofs(c);
    double v = 0.0;
    for (int i = 0; i < tab.n_dofs; ++i)
        v += tab.values(0, i) * coeffs[dofs[i]];
    return v;
}

} // namespace flowlab
