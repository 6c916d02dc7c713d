// Acceptance suite: one PASS/FAIL line per criterion, thresholds from
// acceptance_thresholds.json. Optional arguments select criteria by key.
// Exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "flowlab/bench.hpp"
#include "flowlab/projection.hpp"
#include "flowlab/quadrature.hpp"

using namespace flowlab;

namespace
{

constexpr double pi = std::numbers::pi;

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    // records one sub-check; `what` is printed with the measured value
    void check(bool ok, const std::string &what)
    {
        pass = pass && ok;
        if (detail.tellp() > 0)
            detail << "; ";
        detail << what << (ok ? "" : " [miss]");
    }
};

std::string sci(double v)
{
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

std::string fixed(double v)
{
    std::ostringstream s;
    s.precision(3);
    s << std::fixed << v;
    return s.str();
}

Vector random_vector(int n, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i)
        v[i] = u(gen);
    return v;
}

MethodConfig method(Method m, int k)
{
    MethodConfig c;
    c.method = m;
    c.degree = k;
    return c;
}

double max_abs(const SparseMatrix &m)
{
    double r = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            r = std::max(r, std::abs(it.value()));
    return r;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// L2 norm of a coefficient difference on a method's space over a mesh id.
struct L2Meter
{
    SparseMatrix M;
    L2Meter(const std::string &mesh_id, const MethodConfig &m)
        : M(assemble_mass(*build_spaces(bench_mesh(mesh_id, 0, m), m).velocity))
    {
    }
    double operator()(const Vector &v) const { return std::sqrt(std::max(0.0, v.dot(M * v))); }
};

class Acceptance
{
  public:
    explicit Acceptance(Json thresholds) : th_(std::move(thresholds)) {}

    void divergence(Outcome &o)
    {
        const Json &t = th_.at("divergence");
        const auto &runs = lattice_runs();
        double worst = 0.0;
        for (const auto &r : runs)
            if (r.method.divergence_free())
                for (const auto &rec : r.series.records)
                    worst = std::max(worst, rec.norms.div_linf);
        o.check(worst <= t.at("div_linf_max").get<double>(),
                "SV4/BDM4 lattice max_t |div u_h|_Linf = " + sci(worst));
        const MethodRun &th = find(runs, Method::TH);
        const double div_l2 = th.series.records.back().norms.div_l2;
        o.check(div_l2 > t.at("th_div_l2_min").get<double>(), "TH4 final |div u_h|_L2 = " + sci(div_l2));
    }

    void identities(Outcome &o)
    {
        const Json &t = th_.at("identities");
        const int n_random = t.at("random_vectors").get<int>();

        // v^T C(beta) v = |v|^2_{beta,upw} for discretely divergence-free beta
        const auto mesh = std::make_shared<const Mesh>(mesh_from_id("coarse-periodic"));
        const ExactSolution lattice = lattice_flow(1.0);
        double worst = 0.0;
        for (int k = 1; k <= 4; ++k)
        {
            const SpacePair spaces = build_spaces(mesh, method(Method::BDM, k));
            const Vector beta =
                stokes_projection(spaces, 4.0 * k * k, lattice.velocity_at(0.0), lattice.gradient_at(0.0)).u;
            const FormCache cache(spaces.velocity, convection_degree(*spaces.velocity),
                                  convection_degree(*spaces.velocity));
            const SparseMatrix C = assemble_convection(cache, beta).matrix;
            const SparseMatrix U = assemble_upwind_seminorm(cache, beta);
            for (int s = 0; s < n_random; ++s)
            {
                const Vector v = random_vector(spaces.velocity->n_dofs(), 1000 * k + s);
                const double rhs = v.dot(U * v);
                worst = std::max(worst, std::abs(v.dot(C * v) - rhs) / rhs);
            }
        }
        o.check(worst <= t.at("upwind_identity_rel").get<double>(),
                "convection identity rel. dev. " + sci(worst) + " (BDM1-4, " + std::to_string(n_random) +
                    " vectors each)");

        const auto coarse = std::make_shared<const Mesh>(mesh_from_id("coarse"));
        double asym = 0.0;
        for (int k = 1; k <= 4; ++k)
        {
            const auto V = build_space(coarse, Family::BDM, k);
            const SparseMatrix A = assemble_viscous(*V, FormParameters{1.0, 4.0 * k * k, 0.0}).matrix;
            asym = std::max(asym, max_abs(SparseMatrix(A - SparseMatrix(A.transpose()))) / max_abs(A));
        }
        o.check(asym <= t.at("sip_symmetry_rel").get<double>(), "SIP asymmetry " + sci(asym));

        double qerr = 0.0;
        for (int deg = 1; deg <= max_quadrature_degree; ++deg)
        {
            const QuadRule rule = quadrature_rule(deg);
            for (int a = 0; a <= deg; ++a)
                for (int b = 0; a + b <= deg; ++b)
                {
                    double s = 0.0;
                    for (int q = 0; q < rule.size(); ++q)
                        s += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
                    const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    qerr = std::max(qerr, std::abs(s - exact) / exact);
                }
        }
        o.check(qerr <= t.at("quadrature_rel").get<double>(), "quadrature monomial rel. error " + sci(qerr) +
                                                                   " (degrees 1-" +
                                                                   std::to_string(max_quadrature_degree) + ")");
    }

    void projection(Outcome &o)
    {
        const Json &t = th_.at("projection");
        BenchConfig c = profile_defaults("project");
        c.method = "bdm,sv";
        c.order = t.at("order").get<int>();
        c.levels = t.at("levels").get<int>();
        c.out = "";
        for (const auto &r : bench_project(c))
        {
            const double l2 = r.table.last_rate(0), energy = r.table.last_rate(2);
            o.check(l2 >= t.at("l2_rate_min").get<double>(), r.label + " L2 rate " + fixed(l2));
            o.check(energy >= t.at("energy_rate_min").get<double>(), r.label + " energy rate " + fixed(energy));
            o.check(*r.idempotence <= t.at("idempotence_max").get<double>(),
                    r.label + " idempotence " + sci(*r.idempotence));
        }
    }

    void transient(Outcome &o)
    {
        const Json &t = th_.at("transient");
        BenchConfig c = profile_defaults("converge");
        c.method = "bdm";
        c.order = t.at("order").get<int>();
        c.nu = t.at("nu").get<double>();
        c.tend = t.at("tend").get<double>();
        c.dt = t.at("dt").get<double>();
        c.levels = t.at("levels").get<int>();
        c.out = "";
        const RateRun r = bench_converge(c).front();
        const double energy = r.table.last_rate(0), linf = r.table.last_rate(1);
        o.check(energy >= t.at("energy_integral_rate_min").get<double>(),
                r.label + " energy-integral rate " + fixed(energy));
        o.check(linf >= t.at("linf_l2_rate_min").get<double>(), r.label + " Linf(L2) rate " + fixed(linf));
        o.detail << " (dt floor " << r.dt << ")";
    }

    void pressure_robustness(Outcome &o)
    {
        const Json &t = th_.at("pressure_robustness");
        BenchConfig c = profile_defaults("potential");
        c.method = "gdth,bdm,sv";
        c.order = t.at("order").get<int>();
        c.dt = t.at("dt").get<double>();
        c.tend = t.at("tend").get<double>();
        c.out = "";
        const auto plain = bench_potential(c);
        const MethodRun &bdm = find(plain, Method::BDM), &gdth = find(plain, Method::GDTH);
        const double rel = bdm.final_relative_error();
        o.check(rel <= t.at("bdm_rel_error_max").get<double>(), "BDM4 final rel. error " + sci(rel));
        const double ratio = bdm.final_error() / gdth.final_error();
        o.check(ratio <= t.at("bdm_over_gdth_max").get<double>(),
                "BDM4/GD-TH4 error ratio " + sci(ratio) + " (GD-TH4 " + sci(gdth.final_error()) + ")");

        BenchConfig shifted = c;
        shifted.method = "bdm,sv";
        shifted.psi = t.at("psi").get<double>();
        for (const auto &r : bench_potential(shifted))
        {
            const MethodRun &base = find(plain, r.method.method);
            const L2Meter l2(c.mesh, r.method);
            const double change = l2(r.series.final_state.u - base.series.final_state.u) /
                                  l2(base.series.final_state.u);
            o.check(change <= t.at("psi_invariance_max").get<double>(),
                    r.label + " velocity change under f + grad psi " + sci(change));
        }
    }

    void gronwall_probe(Outcome &o)
    {
        const Json &t = th_.at("gronwall_probe");
        const auto &runs = lattice_runs();
        const double th = find(runs, Method::TH).final_error();
        const double gd = find(runs, Method::GDTH).final_error();
        const double bdm = find(runs, Method::BDM).final_error();
        o.check(th >= t.at("th_over_gdth_min").get<double>() * gd,
                "final L2 errors TH4 " + fixed(th) + ", GD-TH4 " + fixed(gd) + " (ratio " + fixed(th / gd) + ")");
        o.check(bdm <= t.at("bdm_error_max").get<double>(), "BDM4 final L2 error " + fixed(bdm));
        const BenchConfig c = lattice_config();
        for (const auto &r : runs)
        {
            const MethodConfig &m = r.method;
            const auto spaces = build_spaces(bench_mesh(c.mesh, 0, m), m);
            const double coercivity = measure_coercivity(*spaces.velocity, m.penalty());
            const EnergyBudgetReport e = energy_budget(r.series, coercivity, t.at("energy_tolerance").get<double>());
            o.check(e.pass, r.label + " energy inequality (max (lhs - rhs)/scale " + sci(e.worst_margin) + ", " +
                                std::to_string(r.series.records.size()) + " steps)");
        }
    }

    void temporal(Outcome &o)
    {
        const Json &t = th_.at("temporal");
        // scalar y' = -y: the SBDF2 update is (4 y1 - y0) / (3 + 2 dt)
        {
            auto scalar = [](double v) {
                SparseMatrix m(1, 1);
                m.insert(0, 0) = v;
                m.makeCompressed();
                return m;
            };
            const double dt = 0.1;
            const Stepper stepper(scalar(1.0), scalar(1.0), SparseMatrix(0, 1), Vector(), dt, StepperHooks{});
            FlowState prev, cur;
            prev.u = Vector::Constant(1, 1.0);
            cur.u = Vector::Constant(1, std::exp(-dt));
            prev.p = cur.p = Vector();
            cur.t = dt;
            double a = prev.u[0], b = cur.u[0], worst = 0.0;
            for (int n = 0; n < 20; ++n)
            {
                const double c = (4.0 * b - a) / (3.0 + 2.0 * dt);
                FlowState next = stepper.sbdf2_step(prev, cur);
                worst = std::max(worst, std::abs(next.u[0] - c));
                a = b;
                b = c;
                prev = std::move(cur);
                cur = std::move(next);
            }
            o.check(worst <= t.at("bdf2_oracle_tol").get<double>(), "scalar BDF2 oracle dev. " + sci(worst));
        }

        const MethodConfig m = method(Method::BDM, t.at("order").get<int>());
        const double nu = t.at("nu").get<double>();
        const auto mesh = bench_mesh("coarse-periodic", 0, m);
        const ExactSolution lattice = lattice_flow(nu);
        auto final_velocity = [&](double dt) {
            TransientConfig tc;
            tc.method = m;
            tc.nu = nu;
            tc.dt = dt;
            tc.t_end = t.at("tend").get<double>();
            tc.record_every = 1000000;
            return run_transient(mesh, tc, problem_from_exact(lattice, false)).final_state.u;
        };
        const L2Meter l2("coarse-periodic", m);
        const Vector reference = final_velocity(t.at("reference_dt").get<double>());
        std::vector<double> errors;
        for (double dt : t.at("dts").get<std::vector<double>>())
            errors.push_back(l2(final_velocity(dt) - reference));
        std::string list;
        double worst = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 1 < errors.size(); ++i)
        {
            const double order = std::log2(errors[i] / errors[i + 1]);
            worst = std::min(worst, order);
            list += (i ? ", " : "") + fixed(order);
        }
        o.check(worst >= t.at("order_min").get<double>(), "BDM3 SBDF2 observed orders " + list);
    }

    void gronwall_functionals(Outcome &o)
    {
        const Json &t = th_.at("gronwall_functionals");
        const double nu = t.at("nu").get<double>(), T = t.at("tend").get<double>();
        const ExactSolution s = lattice_flow(nu);
        const GronwallParams p;
        const double a = 8 * pi * pi * nu;
        const double iu = (1 - std::exp(-a * T)) / a;
        const double iu2 = (1 - std::exp(-2 * a * T)) / (2 * a);
        const double ig = 2 * pi * iu;
        const std::map<GronwallMode, double> closed = {
            {GronwallMode::Classical, 0.5 * ig + 4.0 / nu * iu2},
            {GronwallMode::GradDiv, T + p.C1 * ig + p.C2 * p.h * p.h / p.delta * ig * ig},
            {GronwallMode::DivergenceFree, T + iu + p.C * ig}};
        double worst = 0.0;
        for (const auto &[mode, value] : closed)
            worst = std::max(worst, std::abs(gronwall_functional(s, T, mode, p) - value) / value);
        o.check(worst <= t.at("rel_tol").get<double>(), "max rel. dev. from closed forms " + sci(worst));
        const double ratio = gronwall_functional(s, T, GronwallMode::Classical, p) /
                             gronwall_functional(s, T, GronwallMode::DivergenceFree, p);
        o.check(ratio > t.at("ratio_min").get<double>(), "classical/div-free ratio " + sci(ratio));
    }

  private:
    static const MethodRun &find(const std::vector<MethodRun> &runs, Method m)
    {
        for (const auto &r : runs)
            if (r.method.method == m)
                return r;
        throw Error("method missing from run set");
    }

    static BenchConfig lattice_config()
    {
        BenchConfig c = profile_defaults("lattice");
        c.method = "th,gdth,bdm,sv";
        c.record_every = 1; // the energy inequality is checked at every step
        c.out = "";
        return c;
    }

    const std::vector<MethodRun> &lattice_runs()
    {
        if (lattice_.empty())
            lattice_ = bench_lattice(lattice_config());
        return lattice_;
    }

    Json th_;
    std::vector<MethodRun> lattice_;
};

} // namespace

int main(int argc, char **argv)
{
    std::ifstream in(FLOWLAB_ACCEPTANCE_THRESHOLDS);
    if (!in)
    {
        std::cerr << "cannot open " << FLOWLAB_ACCEPTANCE_THRESHOLDS << "\n";
        return 2;
    }
    Acceptance suite(Json::parse(in));

    using Step = void (Acceptance::*)(Outcome &);
    const std::vector<std::tuple<std::string, std::string, Step>> criteria = {
        {"divergence", "Divergence-freeness", &Acceptance::divergence},
        {"identities", "Skew-symmetry/coercivity identities", &Acceptance::identities},
        {"projection", "Stokes-projection rates", &Acceptance::projection},
        {"transient", "Transient convergence", &Acceptance::transient},
        {"pressure", "Pressure-robustness", &Acceptance::pressure_robustness},
        {"gronwall-probe", "Gronwall probe", &Acceptance::gronwall_probe},
        {"temporal", "Temporal order", &Acceptance::temporal},
        {"functionals", "Gronwall functionals", &Acceptance::gronwall_functionals},
    };
    std::vector<std::string> selected(argv + 1, argv + argc);
    for (const auto &s : selected)
        if (std::none_of(criteria.begin(), criteria.end(), [&](const auto &c) { return std::get<0>(c) == s; }))
        {
            std::cerr << "unknown criterion '" << s << "'\n";
            return 2;
        }

    int failed = 0;
    for (const auto &[key, title, step] : criteria)
    {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), key) == selected.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            (suite.*step)(o);
        }
        catch (const std::exception &e)
        {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (o.pass ? "PASS " : "FAIL ") << title << ": " << o.detail.str() << " [" << fixed(secs)
                  << " s]" << std::endl;
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
