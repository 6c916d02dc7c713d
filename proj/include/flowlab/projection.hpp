#pragma once

#include "flowlab/assembly.hpp"
#include "flowlab/saddle.hpp"

namespace flowlab
{

struct ProjectionResult
{
    Vector u;
    Vector phi; ///< zero-mean multiplier of the divergence constraint
};

/// Discrete Stokes projection: a_h(pi w, v) + b(v, phi) = a_h(w, v), b(pi w, q) = 0.
///
/// a_h is the nu-free SIP form without grad-div. Boundary DOFs take the
/// interpolated values of w (all components for H1 spaces, normal moments for
/// BDM); on fully periodic meshes the velocity mean is fixed to that of w.
/// Throws PreconditionError when |div w| > 1e-10 at a quadrature point.
ProjectionResult stokes_projection(const SpacePair &spaces, double sigma, const VectorField &w, const TensorField &grad_w);

/// Projection of a discrete field; reproduces discretely divergence-free input.
ProjectionResult stokes_projection(const SpacePair &spaces, double sigma, const Vector &w);

/// Integral of each component of a vector field over the mesh.
Vec2 integrate(const Mesh &mesh, const VectorField &w, int degree);

/// Rows (int phi_j . e_c) for c = x, y.
std::vector<Vector> velocity_mean_rows(const FESpace &space);

} // namespace flowlab
