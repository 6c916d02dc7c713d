#pragma once

#include <functional>
#include <string>

#include "flowlab/types.hpp"

namespace flowlab
{

/// Closed-form Navier-Stokes solution on the unit square.
///
/// `u_linf` and `grad_linf` are the analytic profiles t -> max_x |u(t,x)| and
/// t -> max_x |grad u(t,x)| (pointwise Euclidean and spectral norms); either
/// may be empty when no closed form is known.
struct ExactSolution
{
    std::string name;
    double nu = 1.0;
    bool periodic = false; ///< solution is 1-periodic in both directions
    TimeVectorField u;
    TimeTensorField grad_u;
    TimeScalarField p;
    TimeVectorField f;
    std::function<double(double)> u_linf;
    std::function<double(double)> grad_linf;

    VectorField velocity_at(double t) const;
    TensorField gradient_at(double t) const;
    VectorField forcing_at(double t) const;
};

/// Standing-vortex lattice flow u0 e^{-8 pi^2 nu t}, f = 0.
ExactSolution lattice_flow(double nu);

/// Potential flow u = grad(phi), phi = t (x^5 - 10 x^3 y^2 + 5 x y^4), f = 0.
ExactSolution potential_flow(double nu = 1.0);

/// Steady rigid rotation (y, -x) with p = (x^2 + y^2)/2 - 1/3 and f = 0.
ExactSolution rigid_rotation(double nu);

/// Taylor-Green vortex with amplitude g(t) = 1 + t held by a body force.
ExactSolution forced_taylor_green(double nu);

/// Lookup by name: lattice, potential, rotation, taylor-green.
ExactSolution exact_solution(const std::string &name, double nu);

} // namespace flowlab
