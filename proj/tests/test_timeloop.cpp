#include <doctest.h>

#include <cmath>

#include "flowlab/timeloop.hpp"

using namespace flowlab;

namespace
{

std::shared_ptr<const Mesh> shared(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

SparseMatrix scalar_matrix(double v)
{
    SparseMatrix m(1, 1);
    m.insert(0, 0) = v;
    m.makeCompressed();
    return m;
}

// y' = -lambda y as a saddle system without pressure.
Stepper scalar_stepper(double lambda, double dt)
{
    return Stepper(scalar_matrix(1.0), scalar_matrix(lambda), SparseMatrix(0, 1), Vector(), dt, StepperHooks{});
}

FlowState scalar_state(double y, double t)
{
    FlowState s;
    s.u = Vector::Constant(1, y);
    s.p = Vector();
    s.t = t;
    return s;
}

TransientConfig config(Method m, int k, double nu, double dt, double t_end)
{
    TransientConfig c;
    c.method.method = m;
    c.method.degree = k;
    c.nu = nu;
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

} // namespace

TEST_CASE("scalar BDF2 oracle")
{
    const double lambda = 1.0, dt = 0.1;
    const Stepper stepper = scalar_stepper(lambda, dt);
    const double y0 = 1.0, y1 = std::exp(-0.1);
    const FlowState s2 = stepper.sbdf2_step(scalar_state(y0, 0.0), scalar_state(y1, dt));
    // (3 y2 - 4 y1 + y0) / (2 dt) = -lambda y2
    const double oracle = (4.0 * y1 - y0) / (3.0 + 2.0 * lambda * dt);
    CHECK(std::abs(s2.u[0] - oracle) <= 1e-13);
    CHECK(s2.t == doctest::Approx(0.2));

    // a longer sequence against the recurrence
    double a = y0, b = y1;
    FlowState prev = scalar_state(y0, 0.0), cur = scalar_state(y1, dt);
    for (int n = 0; n < 20; ++n)
    {
        const double c = (4.0 * b - a) / (3.0 + 2.0 * lambda * dt);
        FlowState next = stepper.sbdf2_step(prev, cur);
        CHECK(std::abs(next.u[0] - c) <= 1e-13);
        a = b;
        b = c;
        prev = std::move(cur);
        cur = std::move(next);
    }
}

TEST_CASE("bootstrap step is implicit Euler with local order 2")
{
    const double lambda = 1.0;
    auto error = [&](double dt) {
        const FlowState s = scalar_stepper(lambda, dt).bootstrap_step(scalar_state(1.0, 0.0));
        CHECK(std::abs(s.u[0] - 1.0 / (1.0 + lambda * dt)) <= 1e-15);
        return std::abs(s.u[0] - std::exp(-lambda * dt));
    };
    const double e1 = error(0.02), e2 = error(0.01);
    CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("zero data stays zero")
{
    const auto mesh = shared(mesh_from_id("coarse"));
    FlowProblem problem;
    problem.u0 = [](const Point &) { return Vec2(0.0, 0.0); };
    problem.grad_u0 = [](const Point &) { return Mat2(Mat2::Zero()); };
    for (Method m : {Method::BDM, Method::TH})
    {
        const TimeSeries s = run_transient(mesh, config(m, 2, 0.1, 0.01, 0.05), problem);
        REQUIRE(s.records.size() == 6);
        for (const auto &r : s.records)
        {
            CHECK(r.norms.kinetic == 0.0);
            CHECK(r.norms.energy == 0.0);
        }
        CHECK(s.final_state.u.norm() == 0.0);
        CHECK(s.final_state.p.norm() == 0.0);
    }
}

TEST_CASE("potential flow is reproduced by BDM4")
{
    // u lies in V_h and every error term is a gradient, invisible to
    // divergence-free test functions
    const auto mesh = shared(mesh_from_id("coarse"));
    const ExactSolution exact = potential_flow(1.0);
    const FlowProblem problem = problem_from_exact(exact);
    const TransientConfig cfg = config(Method::BDM, 4, 1.0, 1e-3, 0.02);

    const SpacePair spaces = build_spaces(mesh, cfg.method);
    const OperatorSet ops = assemble_operators(spaces, form_parameters(cfg.method, cfg.nu));
    const Stepper stepper = make_stepper(ops, cfg.dt, problem);
    FlowState s0;
    s0.u = interpolate(*spaces.velocity, exact.velocity_at(0.0));
    s0.p = Vector::Zero(spaces.pressure->n_dofs());
    const FlowState s1 = stepper.bootstrap_step(s0);
    const Vector u1 = interpolate(*spaces.velocity, exact.velocity_at(cfg.dt));
    CHECK((s1.u - u1).norm() <= 1e-9);

    const TimeSeries series = run_transient(mesh, cfg, problem);
    CHECK_FALSE(series.blowup_time.has_value());
    for (const auto &r : series.records)
    {
        const double scale = std::sqrt(2.0 * r.norms.kinetic);
        if (r.t > 0.0)
            CHECK(*r.norms.err_l2 <= 1e-8 * scale);
        CHECK(r.norms.div_linf <= 1e-9 * std::max(1.0, scale));
    }
}

TEST_CASE("Stokes evolution dissipates energy")
{
    const auto mesh = shared(mesh_from_id("coarse-periodic"));
    const ExactSolution lattice = lattice_flow(0.1);
    TransientConfig cfg = config(Method::BDM, 2, 0.1, 1e-2, 0.2);
    cfg.convection = false;
    const TimeSeries s = run_transient(mesh, cfg, problem_from_exact(lattice));
    REQUIRE(s.records.size() == 21);
    for (size_t i = 1; i < s.records.size(); ++i)
    {
        CHECK(s.records[i].t > s.records[i - 1].t);
        CHECK(s.records[i].norms.kinetic < s.records[i - 1].norms.kinetic);
    }
}

TEST_CASE("divergence-free methods stay divergence-free along trajectories")
{
    const auto mesh = shared(mesh_from_id("coarse-periodic"));
    const ExactSolution lattice = lattice_flow(1e-2);
    const TimeSeries s = run_transient(mesh, config(Method::BDM, 3, 1e-2, 5e-3, 0.1), problem_from_exact(lattice));
    double worst = 0.0;
    for (const auto &r : s.records)
        worst = std::max(worst, r.norms.div_linf);
    CHECK(worst <= 1e-9);
    CHECK(s.records.back().norms.err_l2.value() < 1e-2);
}

TEST_CASE("records, replay and advisories")
{
    const auto mesh = shared(mesh_from_id("coarse-periodic"));
    const ExactSolution lattice = lattice_flow(1e-2);
    const TransientConfig cfg = config(Method::BDM, 2, 1e-2, 1e-2, 0.05);
    const TimeSeries a = run_transient(mesh, cfg, problem_from_exact(lattice));
    const TimeSeries b = run_transient(mesh, cfg, problem_from_exact(lattice));
    REQUIRE(a.records.size() == 6);
    for (size_t i = 0; i < a.records.size(); ++i)
    {
        CHECK(a.records[i].t == b.records[i].t);
        CHECK(a.records[i].norms.kinetic == b.records[i].norms.kinetic);
        CHECK(*a.records[i].norms.err_l2 == *b.records[i].norms.err_l2);
    }
    CHECK(a.final_state.u == b.final_state.u);
    CHECK(a.advisories.empty());

    const TimeSeries big = run_transient(mesh, config(Method::BDM, 2, 1e-2, 0.1, 0.2), problem_from_exact(lattice));
    CHECK_FALSE(big.advisories.empty());
}

TEST_CASE("invalid configurations")
{
    const auto mesh = shared(mesh_from_id("coarse"));
    const ExactSolution lattice = lattice_flow(1.0);
    CHECK_THROWS_AS(run_transient(mesh, config(Method::BDM, 2, 1.0, -1.0, 1.0), problem_from_exact(lattice)),
                    ConfigError);
    CHECK_THROWS_AS(run_transient(mesh, config(Method::SV, 2, 1.0, 0.1, 1.0), problem_from_exact(lattice)),
                    UnsupportedError);
}
