#include "flowlab/projection.hpp"

#include <cmath>

namespace flowlab
{

Vec2 integrate(const Mesh &mesh, const VectorField &w, int degree)
{
    const QuadRule rule = quadrature_rule(std::min(degree, max_quadrature_degree));
    Vec2 s = Vec2::Zero();
    for (int c = 0; c < mesh.n_cells(); ++c)
    {
        const auto &t = mesh.cell(c);
        const CellMap map(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
        for (int q = 0; q < rule.size(); ++q)
            s += rule.weights[q] * map.det * w(map.map(rule.points[q]));
    }
    return s;
}

std::vector<Vector> velocity_mean_rows(const FESpace &space)
{
    return {assemble_forcing(space, [](const Point &) { return Vec2(1.0, 0.0); }),
            assemble_forcing(space, [](const Point &) { return Vec2(0.0, 1.0); })};
}

namespace
{

ProjectionResult solve_projection(const SpacePair &spaces, double sigma, const Vector &rhs, const Vector &fixed,
                                  const Vec2 &mean)
{
    const FESpace &V = *spaces.velocity;
    const SparseMatrix A = assemble_viscous(V, FormParameters{1.0, sigma, 0.0}).matrix;
    const DivergenceForm div = assemble_divergence(V, *spaces.pressure);
    SaddleOptions options;
    Vector targets;
    if (V.dirichlet_dofs().empty())
    {
        options.velocity_constraints = velocity_mean_rows(V);
        targets = mean;
    }
    const SaddleFactorization fac(A, div.B, div.mean, V.dirichlet_dofs(), options);
    const SaddleSolution sol = fac.solve(rhs, Vector(), fixed, targets);
    return {sol.u, sol.p};
}

} // namespace

ProjectionResult stokes_projection(const SpacePair &spaces, double sigma, const VectorField &w, const TensorField &grad_w)
{
    const FESpace &V = *spaces.velocity;
    const int degree = std::min(2 * V.degree() + 4, max_quadrature_degree);
    const QuadRule rule = quadrature_rule(degree);
    const Mesh &mesh = V.mesh();
    double scale = 1.0;
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (const auto &x : rule.points)
            scale = std::max(scale, grad_w(V.cell_map(c).map(x)).cwiseAbs().maxCoeff());
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (const auto &x : rule.points)
        {
            const Point p = V.cell_map(c).map(x);
            if (std::abs(grad_w(p).trace()) > 1e-10 * scale)
                throw PreconditionError("Stokes projection of a field that is not divergence-free");
        }
    const Vector rhs = viscous_moments(V, sigma, w, grad_w);
    const Vector fixed = boundary_values(V, w);
    return solve_projection(spaces, sigma, rhs, fixed, integrate(mesh, w, degree));
}

ProjectionResult stokes_projection(const SpacePair &spaces, double sigma, const Vector &w)
{
    const FESpace &V = *spaces.velocity;
    const SparseMatrix A = assemble_viscous(V, FormParameters{1.0, sigma, 0.0}).matrix;
    const auto rows = velocity_mean_rows(V);
    return solve_projection(spaces, sigma, A * w, w, Vec2(rows[0].dot(w), rows[1].dot(w)));
}

} // namespace flowlab
