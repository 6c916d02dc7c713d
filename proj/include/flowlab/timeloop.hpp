#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/norms.hpp"
#include "flowlab/saddle.hpp"

namespace flowlab
{

struct BlowUpError : SolverError
{
    using SolverError::SolverError;
};

struct FlowState
{
    Vector u;
    Vector p;
    double lambda = 0.0;
    double t = 0.0;
};

/// Callbacks that couple the linear stepper to a discretisation.
struct StepperHooks
{
    std::function<Vector(double)> load;                 ///< F(t): forcing plus viscous lifting
    std::function<Vector(const FlowState &)> explicit_; ///< C(u)u minus inflow data at the state's time
    std::function<Vector(double)> boundary;             ///< prescribed values at fixed DOFs
    std::vector<int> fixed_dofs;
};

/// IMEX time stepping of M u' + A u + B^T p = F - C(u)u, B u = 0, m^T p = 0.
///
/// The first step is IMEX Euler; later steps are SBDF2 with extrapolated
/// convection 2 C(u^n)u^n - C(u^{n-1})u^{n-1}. Both implicit matrices are
/// factorised once.
class Stepper
{
  public:
    Stepper(SparseMatrix M, SparseMatrix A, SparseMatrix B, Vector mean, double dt, StepperHooks hooks);

    FlowState bootstrap_step(const FlowState &initial) const;
    FlowState sbdf2_step(const FlowState &previous, const FlowState &current) const;
    /// Same step with the explicit terms N(u^{n-1}), N(u^n) already evaluated.
    FlowState sbdf2_step(const FlowState &previous, const FlowState &current, const Vector &n_previous,
                         const Vector &n_current) const;
    Vector explicit_term(const FlowState &state) const;

    double dt() const { return dt_; }
    const SaddleFactorization &factorization() const { return *sbdf2_; }

  private:
    FlowState finish(const Vector &rhs, double t, const SaddleFactorization &fac) const;

    SparseMatrix M_;
    double dt_;
    StepperHooks hooks_;
    std::unique_ptr<SaddleFactorization> euler_;
    std::unique_ptr<SaddleFactorization> sbdf2_;
};

/// Data of a transient run: initial velocity (with gradient for the Stokes
/// projection), body force and Dirichlet datum; `exact` enables error columns.
struct FlowProblem
{
    VectorField u0;
    TensorField grad_u0;
    TimeVectorField forcing;
    TimeVectorField dirichlet;
    const ExactSolution *exact = nullptr;
};

FlowProblem problem_from_exact(const ExactSolution &exact, bool attach_errors = true);

Stepper make_stepper(const OperatorSet &ops, double dt, const FlowProblem &problem, bool convection = true);

enum class InitialDatum
{
    StokesProjection,
    Interpolation,
};

struct TransientConfig
{
    MethodConfig method;
    double nu = 1.0;
    double dt = 1e-3;
    double t_end = 1.0;
    InitialDatum initial = InitialDatum::StokesProjection;
    bool convection = true;
    /// Norms are recorded every `record_every` steps (the first and last step always).
    int record_every = 1;
};

/// Norms at one time level plus left-endpoint sums over all earlier steps
/// (sum_{m<n} dt * quantity(t_m)) for the energy budget.
struct TimeRecord
{
    int step = 0;
    double t = 0.0;
    NormReport norms;
    double graddiv = 0.0;        ///< delta ||div u_h||^2
    double forcing_l2 = 0.0;     ///< ||f(t)||
    double sum_dissipation = 0.0; ///< of nu |||u_h|||_e^2
    double sum_graddiv = 0.0;
    double sum_upwind = 0.0;     ///< of |u_h|_{u_h,upw}^2
    double sum_forcing = 0.0;    ///< of ||f||
};

struct TimeSeries
{
    std::vector<TimeRecord> records;
    std::optional<double> blowup_time;
    std::vector<std::string> advisories;
    double dt = 0.0;
    double nu = 1.0;
    int steps = 0;
    int n_velocity = 0;
    int n_pressure = 0;
    FlowState final_state;
};

/// Runs the IMEX scheme from t = 0 to t_end. Blow-up (non-finite values or
/// kinetic energy above 1e12 times max(initial value, 1)) ends the run and is
/// recorded instead of thrown.
TimeSeries run_transient(std::shared_ptr<const Mesh> mesh, const TransientConfig &config, const FlowProblem &problem);

/// Observer variant: `on_step` sees every state, e.g. for reference solutions.
TimeSeries run_transient(std::shared_ptr<const Mesh> mesh, const TransientConfig &config, const FlowProblem &problem,
                         const std::function<void(const FlowState &, const SpacePair &)> &on_step);

/// max |u_h| over sample points (Euclidean norm).
double velocity_linf(const NormContext &ctx, const Vector &u);

} // namespace flowlab
