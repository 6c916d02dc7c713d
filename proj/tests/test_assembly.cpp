#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "flowlab/assembly.hpp"
#include "flowlab/exact.hpp"
#include "flowlab/norms.hpp"
#include "flowlab/projection.hpp"
#include "flowlab/saddle.hpp"

using namespace flowlab;

namespace
{

std::shared_ptr<const Mesh> shared(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

Vector random_vector(int n, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i)
        v[i] = u(gen);
    return v;
}

double max_abs(const SparseMatrix &m)
{
    double r = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            r = std::max(r, std::abs(it.value()));
    return r;
}

MethodConfig method(Method m, int k)
{
    MethodConfig c;
    c.method = m;
    c.degree = k;
    return c;
}

// Discrete Stokes velocity with zero boundary data: divergence-free and
// tangent to the boundary for BDM.
Vector stokes_velocity(const SpacePair &spaces, const FormParameters &params, const VectorField &f)
{
    const OperatorSet ops = assemble_operators(spaces, params);
    const SaddleFactorization fac(ops.A, ops.B, ops.mean, spaces.velocity->dirichlet_dofs());
    return fac.solve(assemble_forcing(*spaces.velocity, f), Vector(), Vector()).u;
}

const VectorField swirl_force = [](const Point &x) {
    return Vec2(std::sin(3.0 * x.y()) + x.x() * x.y(), std::cos(2.0 * x.x()) - x.y() * x.y());
};

} // namespace

TEST_CASE("P1 mass matrix on the reference triangle")
{
    const auto mesh = shared(Mesh({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 2}}));
    const FESpace space(mesh, Family::LagrangeContinuous, 1);
    const DenseMatrix M = DenseMatrix(assemble_mass(space));
    // int lambda_i lambda_j = 2|T| (1 + [i == j]) / 4!
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(M(i, j) == doctest::Approx(i == j ? 1.0 / 12.0 : 1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("mass matrix: partition of unity and positivity")
{
    const auto coarse = shared(mesh_from_id("coarse"));
    for (int k = 1; k <= 3; ++k)
    {
        const FESpace space(coarse, Family::LagrangeContinuous, k);
        const Vector one = Vector::Ones(space.n_dofs());
        CHECK(one.dot(assemble_mass(space) * one) == doctest::Approx(1.0).epsilon(1e-13));
    }
    const auto two = shared(unit_square_mesh(1));
    for (Family fam : {Family::LagrangeContinuous, Family::BDM})
    {
        const FESpace space(two, fam, 2, fam == Family::BDM ? 1 : 2);
        const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(DenseMatrix(assemble_mass(space)));
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("SIP form is symmetric and coercive")
{
    const auto coarse = shared(mesh_from_id("coarse"));
    for (int k = 1; k <= 4; ++k)
    {
        CAPTURE(k);
        const auto V = build_space(coarse, Family::BDM, k);
        const FormParameters p{0.37, 4.0 * k * k, 0.0};
        const SparseMatrix A = assemble_viscous(*V, p).matrix;
        const SparseMatrix At = SparseMatrix(A.transpose());
        CHECK(max_abs(SparseMatrix(A - At)) <= 1e-12 * max_abs(A));

        const SparseMatrix E = assemble_energy_norm(*V, p.sigma);
        double worst = std::numeric_limits<double>::infinity();
        for (unsigned s = 0; s < 100; ++s)
        {
            const Vector v = random_vector(V->n_dofs(), 100 * k + s);
            worst = std::min(worst, v.dot(A * v) / (p.nu * v.dot(E * v)));
        }
        CHECK(worst >= 0.1);
    }
}

TEST_CASE("SIP penalty must be positive for discontinuous spaces")
{
    const auto V = build_space(shared(unit_square_mesh(1)), Family::BDM, 1);
    CHECK_THROWS_AS(assemble_viscous(*V, FormParameters{1.0, 0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(assemble_viscous(*V, FormParameters{1.0, -1.0, 0.0}), ConfigError);
}

TEST_CASE("grad-div vanishes on divergence-free BDM fields")
{
    const auto coarse = shared(mesh_from_id("coarse"));
    const SpacePair spaces = build_spaces(coarse, method(Method::BDM, 3));
    const Vector u = stokes_velocity(spaces, FormParameters{1.0, 36.0, 0.0}, swirl_force);
    const SparseMatrix G = assemble_graddiv(*spaces.velocity, 1.0);
    CHECK(u.norm() > 1e-3);
    CHECK(std::abs(u.dot(G * u)) <= 1e-11 * std::max(1.0, u.squaredNorm()));
}

TEST_CASE("divergence coupling")
{
    const auto coarse = shared(mesh_from_id("coarse"));
    SUBCASE("constant pressure annihilates tangential fields")
    {
        for (Method m : {Method::BDM, Method::TH})
        {
            const SpacePair spaces = build_spaces(coarse, method(m, 2));
            const DivergenceForm div = assemble_divergence(*spaces.velocity, *spaces.pressure);
            Vector v = random_vector(spaces.velocity->n_dofs(), 7);
            for (int d : spaces.velocity->dirichlet_dofs())
                v[d] = 0.0;
            const Vector q = interpolate(*spaces.pressure, [](const Point &) { return 1.0; });
            CHECK(std::abs(q.dot(div.B * v)) <= 1e-12 * v.norm());
            CHECK(q.dot(div.mean) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
    SUBCASE("divergence of the BDM interpolant is a quadrature effect")
    {
        // the DOF moments are computed by quadrature, so div(I u) of a
        // solenoidal u is small and shrinks fast under refinement
        const ExactSolution lattice = lattice_flow(1.0);
        double previous = 0.0;
        Mesh m = make_periodic(mesh_from_id("coarse"), 1.0, 1.0);
        for (int level = 0; level < 3; ++level)
        {
            const auto mesh = shared(m);
            const auto V = build_space(mesh, Family::BDM, 2);
            const auto Q = build_space(mesh, Family::LagrangeDiscontinuous, 1);
            const Vector u = interpolate(*V, lattice.velocity_at(0.0));
            const double div = (assemble_divergence(*V, *Q).B * u).norm();
            MESSAGE("level " << level << ": |B I u| = " << div);
            if (level > 0)
                CHECK(std::log2(previous / div) >= 2.0);
            previous = div;
            m = uniform_refine(m);
        }
    }
    SUBCASE("Stokes solutions are pointwise divergence-free")
    {
        const SpacePair spaces = build_spaces(coarse, method(Method::BDM, 2));
        const Vector u = stokes_velocity(spaces, FormParameters{1.0, 16.0, 0.0}, swirl_force);
        const NormContext ctx(spaces.velocity, 1.0, 16.0);
        CHECK(ctx.divergence(u)[1] <= 1e-10);
    }
}

TEST_CASE("convection identity for divergence-free convecting fields")
{
    // v^T C(beta) v = |v|^2_{beta,upw} when div beta = 0 and beta.n = 0 on the boundary
    auto check_identity = [](int k, const Vector &beta, const std::shared_ptr<const FESpace> &V) {
        const AssembledForm C = assemble_convection(*V, beta);
        const FormCache cache(V, convection_degree(*V), convection_degree(*V));
        const SparseMatrix U = assemble_upwind_seminorm(cache, beta);
        double worst = 0.0;
        for (unsigned s = 0; s < 50; ++s)
        {
            const Vector v = random_vector(V->n_dofs(), 1000 * k + s);
            const double lhs = v.dot(C.matrix * v);
            const double rhs = v.dot(U * v);
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
        return worst;
    };
    SUBCASE("periodic lattice")
    {
        const auto mesh = shared(mesh_from_id("coarse-periodic"));
        const ExactSolution lattice = lattice_flow(1.0);
        for (int k = 1; k <= 4; ++k)
        {
            CAPTURE(k);
            const SpacePair spaces = build_spaces(mesh, method(Method::BDM, k));
            const Vector beta = stokes_projection(spaces, 4.0 * k * k, lattice.velocity_at(0.0),
                                                  lattice.gradient_at(0.0))
                                    .u;
            CHECK(check_identity(k, beta, spaces.velocity) <= 1e-10);
        }
    }
    SUBCASE("walls")
    {
        const auto mesh = shared(mesh_from_id("coarse"));
        for (int k = 2; k <= 3; ++k)
        {
            CAPTURE(k);
            const SpacePair spaces = build_spaces(mesh, method(Method::BDM, k));
            const Vector beta = stokes_velocity(spaces, FormParameters{1.0, 4.0 * k * k, 0.0}, swirl_force);
            CHECK(check_identity(k, beta, spaces.velocity) <= 1e-10);
        }
    }
}

TEST_CASE("convection on H1 spaces is skew")
{
    const auto mesh = shared(mesh_from_id("coarse-periodic"));
    const auto V = build_space(mesh, Family::LagrangeContinuous, 2, 2);
    const Vector beta = random_vector(V->n_dofs(), 3);
    const AssembledForm C = assemble_convection(*V, beta);
    for (unsigned s = 0; s < 10; ++s)
    {
        const Vector v = random_vector(V->n_dofs(), 40 + s);
        CHECK(std::abs(v.dot(C.matrix * v)) <= 1e-11 * v.squaredNorm() * std::max(1.0, beta.norm()));
    }
}

TEST_CASE("matrix-free convection matches the assembled matrix")
{
    const auto mesh = shared(mesh_from_id("coarse"));
    const auto V = build_space(mesh, Family::BDM, 3);
    const Vector beta = random_vector(V->n_dofs(), 5);
    const Vector w = random_vector(V->n_dofs(), 6);
    const VectorField g = [](const Point &x) { return Vec2(x.y(), 1.0 - x.x()); };
    const AssembledForm C = assemble_convection(*V, beta, g);
    const FormCache cache(V, convection_degree(*V), convection_degree(*V));
    const Vector direct = apply_convection(cache, beta, w, g);
    CHECK((direct - (C.matrix * w - C.rhs)).norm() <= 1e-12 * direct.norm());
}

TEST_CASE("upwind seminorm vanishes without jumps")
{
    const auto mesh = shared(mesh_from_id("coarse"));
    const auto V = build_space(mesh, Family::BDM, 2);
    // quadratic fields are reproduced, so their traces match across facets
    const Vector w = interpolate(*V, [](const Point &x) { return Vec2(x.y() * x.y() - x.x(), x.x() * x.y()); });
    const Vector beta = random_vector(V->n_dofs(), 9);
    const FormCache cache(V, convection_degree(*V), convection_degree(*V));
    CHECK(w.dot(assemble_upwind_seminorm(cache, beta) * w) <= 1e-22 * std::max(1.0, beta.squaredNorm()));
}

TEST_CASE("convection rejects foreign convecting fields")
{
    const auto V = build_space(shared(unit_square_mesh(2)), Family::BDM, 2);
    CHECK_THROWS_AS(assemble_convection(*V, Vector::Zero(3)), UnsupportedError);
}

TEST_CASE("load vectors")
{
    const auto mesh = shared(mesh_from_id("coarse"));
    const auto V = build_space(mesh, Family::LagrangeContinuous, 2, 2);
    CHECK(assemble_forcing(*V, [](const Point &) { return Vec2(0.0, 0.0); }).norm() == 0.0);
    const Vector b = assemble_forcing(*V, [](const Point &) { return Vec2(1.0, 0.0); });
    const int n = V->n_dofs() / 2;
    CHECK(b.head(n).sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(b.tail(n).sum()) <= 1e-15);
}

TEST_CASE("gradient forces are invisible to divergence-free pairs")
{
    const VectorField grad_psi = [](const Point &x) { return Vec2(2.0 * x.x(), 2.0 * x.y()); };
    const VectorField shifted = [&](const Point &x) -> Vec2 { return swirl_force(x) + 50.0 * grad_psi(x); };
    const auto coarse = shared(mesh_from_id("coarse"));
    const auto split = shared(alfeld_split(mesh_from_id("coarse")));

    auto change = [&](const std::shared_ptr<const Mesh> &mesh, Method m, int k) {
        const MethodConfig cfg = method(m, k);
        const SpacePair spaces = build_spaces(mesh, cfg);
        const FormParameters p = form_parameters(cfg, 1.0);
        const Vector u0 = stokes_velocity(spaces, p, swirl_force);
        const Vector u1 = stokes_velocity(spaces, p, shifted);
        return (u1 - u0).norm() / u0.norm();
    };
    CHECK(change(coarse, Method::BDM, 2) <= 1e-9);
    CHECK(change(split, Method::SV, 2) <= 1e-9);
    CHECK(change(coarse, Method::TH, 2) > 1e-6);
}

TEST_CASE("discrete trace constant is mesh-size independent")
{
    // sup over local BDM functions of h_K ||v||^2_{dK} / ||v||^2_K, exact via a
    // generalized eigenproblem per cell; uniform refinement keeps cell shapes
    auto trace_constant = [](const Mesh &mesh_in, int k) {
        const auto mesh = shared(mesh_in);
        const auto V = build_space(mesh, Family::BDM, k);
        const FormCache cache(V, 2 * k + 2, 2 * k + 2);
        std::vector<DenseMatrix> boundary(mesh->n_cells());
        for (int c = 0; c < mesh->n_cells(); ++c)
            boundary[c] = DenseMatrix::Zero(V->local_dim(), V->local_dim());
        for (const auto &fq : cache.facets())
            for (size_t q = 0; q < fq.weights.size(); ++q)
            {
                boundary[fq.plus] += fq.weights[q] * fq.plus_tab.value(q).transpose() * fq.plus_tab.value(q);
                if (fq.minus >= 0)
                    boundary[fq.minus] +=
                        fq.weights[q] * fq.minus_tab.value(q).transpose() * fq.minus_tab.value(q);
            }
        double worst = 0.0;
        for (const auto &cq : cache.cells())
        {
            DenseMatrix mass = DenseMatrix::Zero(V->local_dim(), V->local_dim());
            for (size_t q = 0; q < cq.weights.size(); ++q)
                mass += cq.weights[q] * cq.tab.value(q).transpose() * cq.tab.value(q);
            const Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> eig(mesh->cell_diameter(cq.cell) *
                                                                                boundary[cq.cell],
                                                                            mass);
            worst = std::max(worst, eig.eigenvalues().maxCoeff());
        }
        return std::sqrt(worst);
    };
    const Mesh m0 = mesh_from_id("coarse");
    const Mesh m1 = uniform_refine(m0);
    const Mesh m2 = uniform_refine(m1);
    for (int k = 1; k <= 3; ++k)
    {
        const double c0 = trace_constant(m0, k);
        const double c1 = trace_constant(m1, k);
        const double c2 = trace_constant(m2, k);
        CAPTURE(k);
        CHECK(std::abs(c1 / c0 - 1.0) <= 0.05);
        CHECK(std::abs(c2 / c1 - 1.0) <= 0.05);
    }
}

TEST_CASE("assembly is bit-reproducible")
{
    const auto mesh = shared(mesh_from_id("coarse"));
    const auto V = build_space(mesh, Family::BDM, 3);
    const FormParameters p{0.01, 36.0, 0.0};
    const SparseMatrix A1 = assemble_viscous(*V, p).matrix;
    const SparseMatrix A2 = assemble_viscous(*V, p).matrix;
    REQUIRE(A1.nonZeros() == A2.nonZeros());
    CHECK(std::equal(A1.valuePtr(), A1.valuePtr() + A1.nonZeros(), A2.valuePtr()));
    CHECK(std::equal(A1.innerIndexPtr(), A1.innerIndexPtr() + A1.nonZeros(), A2.innerIndexPtr()));
    const Vector beta = random_vector(V->n_dofs(), 1);
    const SparseMatrix C1 = assemble_convection(*V, beta).matrix;
    const SparseMatrix C2 = assemble_convection(*V, beta).matrix;
    CHECK(std::equal(C1.valuePtr(), C1.valuePtr() + C1.nonZeros(), C2.valuePtr()));
}

TEST_CASE("column indices are sorted within rows")
{
    const auto V = build_space(shared(mesh_from_id("coarse")), Family::BDM, 2);
    const SparseMatrix A = assemble_viscous(*V, FormParameters{1.0, 16.0, 0.0}).matrix;
    bool sorted = true;
    for (int r = 0; r < A.rows(); ++r)
        for (int k = A.outerIndexPtr()[r] + 1; k < A.outerIndexPtr()[r + 1]; ++k)
            sorted = sorted && A.innerIndexPtr()[k - 1] < A.innerIndexPtr()[k];
    CHECK(sorted);
}
