#include "flowlab/timeloop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flowlab/projection.hpp"

namespace flowlab
{

namespace
{

constexpr double blowup_factor = 1e12;

VectorField at_time(const TimeVectorField &f, double t)
{
    if (!f)
        return {};
    return [f, t](const Point &x) { return f(t, x); };
}

double field_l2(const FormCache &cache, const VectorField &f)
{
    if (!f)
        return 0.0;
    double s = 0.0;
    for (const auto &cq : cache.cells())
        for (size_t q = 0; q < cq.weights.size(); ++q)
            s += cq.weights[q] * f(cq.points[q]).squaredNorm();
    return std::sqrt(s);
}

bool finite(const Vector &v) { return v.allFinite(); }

} // namespace

Stepper::Stepper(SparseMatrix M, SparseMatrix A, SparseMatrix B, Vector mean, double dt, StepperHooks hooks)
    : M_(std::move(M)), dt_(dt), hooks_(std::move(hooks))
{
    if (!(dt > 0.0))
        throw ConfigError("time step must be positive");
    const SparseMatrix K1 = (1.0 / dt) * M_ + A;
    const SparseMatrix K2 = (1.5 / dt) * M_ + A;
    euler_ = std::make_unique<SaddleFactorization>(K1, B, mean, hooks_.fixed_dofs);
    sbdf2_ = std::make_unique<SaddleFactorization>(K2, B, mean, hooks_.fixed_dofs);
}

Vector Stepper::explicit_term(const FlowState &state) const
{
    if (!hooks_.explicit_)
        return Vector::Zero(state.u.size());
    return hooks_.explicit_(state);
}

FlowState Stepper::finish(const Vector &rhs, double t, const SaddleFactorization &fac) const
{
    const Vector fixed = hooks_.boundary ? hooks_.boundary(t) : Vector();
    SaddleSolution sol = fac.solve(rhs, Vector(), fixed);
    FlowState s;
    s.u = std::move(sol.u);
    s.p = std::move(sol.p);
    s.lambda = sol.lambda;
    s.t = t;
    return s;
}

FlowState Stepper::bootstrap_step(const FlowState &initial) const
{
    const double t = initial.t + dt_;
    Vector rhs = (1.0 / dt_) * (M_ * initial.u) - explicit_term(initial);
    if (hooks_.load)
        rhs += hooks_.load(t);
    return finish(rhs, t, *euler_);
}

FlowState Stepper::sbdf2_step(const FlowState &previous, const FlowState &current) const
{
    return sbdf2_step(previous, current, explicit_term(previous), explicit_term(current));
}

FlowState Stepper::sbdf2_step(const FlowState &previous, const FlowState &current, const Vector &n_previous,
                              const Vector &n_current) const
{
    const double t = current.t + dt_;
    Vector rhs = (0.5 / dt_) * (M_ * (4.0 * current.u - previous.u)) - (2.0 * n_current - n_previous);
    if (hooks_.load)
        rhs += hooks_.load(t);
    return finish(rhs, t, *sbdf2_);
}

FlowProblem problem_from_exact(const ExactSolution &exact, bool attach_errors)
{
    FlowProblem p;
    p.u0 = exact.velocity_at(0.0);
    p.grad_u0 = exact.gradient_at(0.0);
    p.forcing = exact.f;
    p.dirichlet = exact.u;
    if (attach_errors)
        p.exact = &exact;
    return p;
}

Stepper make_stepper(const OperatorSet &ops, double dt, const FlowProblem &problem, bool convection)
{
    const auto space = ops.velocity;
    const bool has_boundary = !space->dirichlet_dofs().empty();
    auto bilinear = std::make_shared<const FormCache>(bilinear_form_cache(space));
    const FormParameters params = ops.params;
    const TimeVectorField forcing = problem.forcing;
    const TimeVectorField dirichlet = has_boundary ? problem.dirichlet : TimeVectorField{};

    StepperHooks hooks;
    hooks.fixed_dofs = space->dirichlet_dofs();
    hooks.load = [bilinear, params, forcing, dirichlet](double t) {
        Vector F = assemble_forcing(*bilinear, at_time(forcing, t));
        if (dirichlet)
            F += viscous_lifting(*bilinear, params, at_time(dirichlet, t));
        return F;
    };
    if (convection)
    {
        auto cache = std::make_shared<const FormCache>(space, convection_degree(*space), convection_degree(*space));
        hooks.explicit_ = [cache, dirichlet](const FlowState &s) {
            return apply_convection(*cache, s.u, s.u, at_time(dirichlet, s.t));
        };
    }
    if (has_boundary)
        hooks.boundary = [space, dirichlet](double t) { return boundary_values(*space, at_time(dirichlet, t)); };
    return Stepper(ops.M, ops.A, ops.B, ops.mean, dt, std::move(hooks));
}

double velocity_linf(const NormContext &ctx, const Vector &u)
{
    const FESpace &space = ctx.space();
    double m = 0.0;
    for (const auto &cq : ctx.error_cache().cells())
    {
        const Vector local = gather(space, cq.cell, u);
        for (size_t q = 0; q < cq.weights.size(); ++q)
            m = std::max(m, (cq.tab.value(q) * local).norm());
    }
    return m;
}

TimeSeries run_transient(std::shared_ptr<const Mesh> mesh, const TransientConfig &config, const FlowProblem &problem)
{
    return run_transient(std::move(mesh), config, problem, {});
}

TimeSeries run_transient(std::shared_ptr<const Mesh> mesh, const TransientConfig &config, const FlowProblem &problem,
                         const std::function<void(const FlowState &, const SpacePair &)> &on_step)
{
    if (!(config.dt > 0.0) || !(config.t_end > 0.0))
        throw ConfigError("time step and final time must be positive");
    if (!problem.u0)
        throw ConfigError("initial velocity missing");
    config.method.validate(*mesh);

    const SpacePair spaces = build_spaces(mesh, config.method);
    const FormParameters params = form_parameters(config.method, config.nu);
    const OperatorSet ops = assemble_operators(spaces, params);
    const NormContext ctx(spaces.velocity, config.nu, params.sigma);
    const Stepper stepper = make_stepper(ops, config.dt, problem, config.convection);
    const FormCache &quad = ctx.error_cache();

    const int n_steps = static_cast<int>(std::llround(config.t_end / config.dt));
    if (n_steps < 1)
        throw ConfigError("final time shorter than one step");

    TimeSeries series;
    series.dt = config.dt;
    series.nu = config.nu;
    series.n_velocity = spaces.velocity->n_dofs();
    series.n_pressure = spaces.pressure->n_dofs();

    FlowState current;
    current.t = 0.0;
    if (config.initial == InitialDatum::StokesProjection)
    {
        if (!problem.grad_u0)
            throw ConfigError("Stokes projection of the initial datum needs its gradient");
        current.u = stokes_projection(spaces, params.sigma, problem.u0, problem.grad_u0).u;
    }
    else
        current.u = interpolate(*spaces.velocity, problem.u0);
    current.p = Vector::Zero(series.n_pressure);

    double h_min = std::numeric_limits<double>::infinity();
    for (int c = 0; c < mesh->n_cells(); ++c)
        h_min = std::min(h_min, mesh->cell_diameter(c));
    const int k = config.method.degree;
    bool cfl_reported = false;

    TimeRecord sums;
    double kinetic0 = 0.0;
    auto observe = [&](const FlowState &s, int step, bool record) {
        if (on_step)
            on_step(s, spaces);
        const bool last = step == n_steps;
        const bool want = record || last || step == 0 || (step % std::max(config.record_every, 1)) == 0;
        const VectorField f = at_time(problem.forcing, s.t);
        // cheap quantities feed the running sums at every step
        const double e2 = s.u.dot(ctx.energy_gram() * s.u);
        const double div_l2 = config.method.graddiv() != 0.0 ? ctx.divergence(s.u)[0] : 0.0;
        const double upw2 = spaces.velocity->has_facet_terms() ? ctx.upwind_seminorm_sq(s.u, s.u) : 0.0;
        const double fl2 = field_l2(quad, f);

        if (!cfl_reported)
        {
            const double cfl = config.dt * velocity_linf(ctx, s.u) * (k + 1) * (k + 1) / h_min;
            if (cfl > 1.0)
            {
                std::ostringstream msg;
                msg << "CFL number " << cfl << " exceeds 1 at t = " << s.t
                    << "; explicit convection may be unstable";
                series.advisories.push_back(msg.str());
                cfl_reported = true;
            }
        }

        if (want)
        {
            TimeRecord r = sums;
            r.step = step;
            r.t = s.t;
            r.norms = ctx.compute(s.u, s.t, problem.exact);
            r.graddiv = config.method.graddiv() * r.norms.div_l2 * r.norms.div_l2;
            r.forcing_l2 = fl2;
            series.records.push_back(std::move(r));
        }
        sums.sum_dissipation += config.dt * config.nu * e2;
        sums.sum_graddiv += config.dt * config.method.graddiv() * div_l2 * div_l2;
        sums.sum_upwind += config.dt * upw2;
        sums.sum_forcing += config.dt * fl2;
    };

    auto blown_up = [&](const FlowState &s) {
        if (!finite(s.u) || !finite(s.p))
            return true;
        const double kin = 0.5 * s.u.dot(ops.M * s.u);
        return kin > blowup_factor * std::max(kinetic0, 1.0);
    };

    kinetic0 = 0.5 * current.u.dot(ops.M * current.u);
    observe(current, 0, true);

    FlowState previous;
    Vector n_previous;
    Vector n_current;
    int step = 0;
    try
    {
        for (step = 1; step <= n_steps; ++step)
        {
            FlowState next;
            if (step == 1)
                next = stepper.bootstrap_step(current);
            else
            {
                n_current = stepper.explicit_term(current);
                next = stepper.sbdf2_step(previous, current, n_previous, n_current);
            }
            next.t = step * config.dt;
            if (blown_up(next))
            {
                series.blowup_time = next.t;
                if (finite(next.u))
                    observe(next, step, true);
                current = std::move(next);
                break;
            }
            previous = std::move(current);
            n_previous = step == 1 ? stepper.explicit_term(previous) : std::move(n_current);
            current = std::move(next);
            observe(current, step, false);
        }
    }
    catch (const SolverError &e)
    {
        // a failed solve during growth is the numerical form of blow-up
        series.blowup_time = step * config.dt;
        series.advisories.push_back(std::string("solver failure: ") + e.what());
    }
    series.steps = std::min(step, n_steps);
    series.final_state = std::move(current);
    return series;
}

} // namespace flowlab
