#pragma once

#include <array>
#include <memory>
#include <vector>
#include <optional>

#include "flowlab/assembly.hpp"
#include "flowlab/exact.hpp"

namespace flowlab
{

/// Norms and energies of one velocity field. Error entries are empty when no
/// exact solution is attached. L-infinity values are maxima over quadrature
/// points and cell vertices (a lower bound of the true sup-norm).
struct NormReport
{
    std::optional<double> err_l2;
    std::optional<double> err_h1_broken;
    std::optional<double> err_energy;
    double energy = 0.0;      ///< |||u_h|||_e
    double sharp = 0.0;       ///< |||u_h|||_{e,#}
    double upwind = 0.0;      ///< |u_h|_{u_h,upw}
    double div_l2 = 0.0;
    double div_linf = 0.0;
    double kinetic = 0.0;     ///< 1/2 ||u_h||^2
    double dissipation = 0.0; ///< nu |||u_h|||_e^2
};

/// Precomputed Gram matrices and quadrature for repeated norm evaluation.
class NormContext
{
  public:
    NormContext(std::shared_ptr<const FESpace> velocity, double nu, double sigma);

    const FESpace &space() const { return *space_; }
    double nu() const { return nu_; }
    double sigma() const { return sigma_; }
    const SparseMatrix &mass() const { return mass_; }
    const SparseMatrix &energy_gram() const { return energy_; }
    const SparseMatrix &sharp_gram() const { return sharp_; }
    const FormCache &error_cache() const { return error_cache_; }
    const FormCache &convection_cache() const { return convection_cache_; }

    NormReport compute(const Vector &u, double t, const ExactSolution *exact) const;

    /// ||u - u_h||_{L2}, ||grad_h(u - u_h)||_{L2}, |||u - u_h|||_e.
    std::array<double, 3> errors(const Vector &u, const VectorField &w, const TensorField &grad_w) const;

    double upwind_seminorm_sq(const Vector &beta, const Vector &u) const;
    std::array<double, 2> divergence(const Vector &u) const;

    /// max |grad_h u_h| over sample points (spectral norm).
    double grad_linf(const Vector &u) const;

  private:
    std::shared_ptr<const FESpace> space_;
    double nu_;
    double sigma_;
    SparseMatrix mass_;
    SparseMatrix energy_;
    SparseMatrix sharp_;
    FormCache error_cache_;
    FormCache convection_cache_;
    std::vector<Tabulation> vertex_tabs_;
};

NormReport compute_norms(const NormContext &ctx, const Vector &u, double t, const ExactSolution *exact);

} // namespace flowlab
