#pragma once

#include <memory>
#include <vector>

#include "flowlab/space.hpp"

namespace flowlab
{

/// Physical shape functions at the quadrature points of one cell.
struct CellQuadrature
{
    int cell = -1;
    std::vector<Point> points;
    std::vector<double> weights;
    Tabulation tab;
};

/// Quadrature on a logical facet. `plus` is the first adjacent cell (whose
/// outward normal is `normal`); `minus` is the neighbour across the facet,
/// for periodic pairs the cell behind the slave facet at `points + shift`.
struct FacetQuadrature
{
    int facet = -1;
    int plus = -1;
    int minus = -1; ///< -1 on the domain boundary
    std::vector<Point> points;
    std::vector<double> weights; ///< include the facet length
    Vec2 normal = Vec2::Zero();
    Vec2 shift = Vec2::Zero();
    double h = 0.0;
    Tabulation plus_tab;
    Tabulation minus_tab;

    bool is_boundary() const { return minus < 0; }
};

/// Tabulations of a space on every cell and logical facet for a fixed
/// quadrature degree. Immutable once built.
class FormCache
{
  public:
    FormCache(std::shared_ptr<const FESpace> space, int volume_degree, int facet_degree);

    const FESpace &space() const { return *space_; }
    std::shared_ptr<const FESpace> space_ptr() const { return space_; }
    const std::vector<CellQuadrature> &cells() const { return cells_; }
    const std::vector<FacetQuadrature> &facets() const { return facets_; }
    int volume_degree() const { return volume_degree_; }
    int facet_degree() const { return facet_degree_; }

  private:
    std::shared_ptr<const FESpace> space_;
    int volume_degree_;
    int facet_degree_;
    std::vector<CellQuadrature> cells_;
    std::vector<FacetQuadrature> facets_;
};

/// Default degrees: 2k+2 in volume and 2k+3 on facets for bilinear forms,
/// 3k+2 for the convective trilinear form.
int default_volume_degree(const FESpace &space);
int convection_degree(const FESpace &space);

/// nu scales the SIP form; delta multiplies (div w, div v) directly.
struct FormParameters
{
    double nu = 1.0;
    double sigma = 1.0;
    double delta = 0.0;
};

FormParameters form_parameters(const MethodConfig &config, double nu);

struct AssembledForm
{
    SparseMatrix matrix;
    Vector rhs;
};

struct DivergenceForm
{
    SparseMatrix B;  ///< B(q, j) = -int q div(phi_j)
    Vector mean;     ///< int q per pressure DOF
};

/// Velocity mass, nu * a_h, divergence coupling and the pressure-mean vector.
struct OperatorSet
{
    std::shared_ptr<const FESpace> velocity;
    std::shared_ptr<const FESpace> pressure;
    FormParameters params;
    SparseMatrix M;
    SparseMatrix A;
    SparseMatrix B;
    Vector mean;
};

OperatorSet assemble_operators(const SpacePair &spaces, const FormParameters &params);

SparseMatrix assemble_mass(const FESpace &space);

/// nu * a_h with grad-div block delta * (div w, div v). For DG spaces the
/// returned vector is the boundary lifting nu * (-(g, grad v n) + sigma/h (g, v))
/// of the tangential Dirichlet datum g (zero when g is empty).
AssembledForm assemble_viscous(const FESpace &space, const FormParameters &params, const VectorField &g = {});

/// delta * (div w, div v) alone.
SparseMatrix assemble_graddiv(const FESpace &space, double delta);

DivergenceForm assemble_divergence(const FESpace &velocity, const FESpace &pressure);

/// Matrix of c_h(beta; w, v) with skew volume term, central flux and upwind
/// penalty. On Dirichlet facets the exterior trace is g and the exterior test
/// function zero; the g part is returned as rhs. H1 spaces carry no facet terms.
AssembledForm assemble_convection(const FormCache &cache, const Vector &beta, const VectorField &g = {});
AssembledForm assemble_convection(const FESpace &space, const Vector &beta, const VectorField &g = {});

/// C(beta) w - rhs(g) without forming the matrix; same kernel as above.
Vector apply_convection(const FormCache &cache, const Vector &beta, const Vector &w, const VectorField &g = {});

/// (f, phi_i).
Vector assemble_forcing(const FESpace &space, const VectorField &f);
Vector assemble_forcing(const FormCache &cache, const VectorField &f);

/// Boundary lifting of assemble_viscous alone, for repeated evaluation.
Vector viscous_lifting(const FormCache &cache, const FormParameters &params, const VectorField &g);

/// Cache at the degrees used by the bilinear forms.
FormCache bilinear_form_cache(std::shared_ptr<const FESpace> space);

/// Gram matrices: |||v|||_e^2, |||v|||_{e,#}^2, and the upwind seminorm
/// |v|_{beta,upw}^2 over interior (including periodic) facets.
SparseMatrix assemble_energy_norm(const FESpace &space, double sigma);
SparseMatrix assemble_sharp_norm(const FESpace &space, double sigma);
SparseMatrix assemble_upwind_seminorm(const FormCache &cache, const Vector &beta);

/// a_h(w, phi_i) / nu-free form for a smooth field w with gradient grad_w:
/// volume gradient pairing, SIP consistency with the analytic gradient and the
/// boundary terms with [[w]] = w. Used to right-hand-side the Stokes projection.
Vector viscous_moments(const FESpace &space, double sigma, const VectorField &w, const TensorField &grad_w);

/// Boundary DOF values of the interpolant of g (strong Dirichlet data).
Vector boundary_values(const FESpace &space, const VectorField &g);

/// Local coefficient gather.
Vector gather(const FESpace &space, int c, const Vector &global);

} // namespace flowlab
