#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flowlab/basis.hpp"
#include "flowlab/mesh.hpp"

namespace flowlab
{

/// Global finite element space over a mesh.
///
/// Numbering is deterministic: vertex DOFs (periodic vertices share their
/// representative's DOF), then edge DOFs of logical edges in facet order
/// (slave facets alias their master), then interior DOFs cell by cell.
/// Vector Lagrange spaces are component-blocked: all x-DOFs, then all y-DOFs.
class FESpace
{
  public:
    FESpace(std::shared_ptr<const Mesh> mesh, Family family, int degree, int components = 1);

    const Mesh &mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    Family family() const { return family_; }
    int degree() const { return degree_; }
    int components() const { return components_; }
    const RefBasis &basis() const { return *basis_; }

    /// 1 for scalar spaces, 2 for vector Lagrange and BDM.
    int value_dim() const { return family_ == Family::BDM ? 2 : components_; }
    int n_dofs() const { return n_dofs_; }
    int local_dim() const { return local_dim_; }

    bool is_h1_conforming() const { return family_ == Family::LagrangeContinuous; }
    bool has_facet_terms() const { return family_ == Family::BDM; }

    std::span<const int> cell_dofs(int c) const { return {cell_dofs_.data() + c * local_dim_, static_cast<size_t>(local_dim_)}; }
    std::span<const double> cell_signs(int c) const
    {
        return {cell_signs_.data() + c * local_dim_, static_cast<size_t>(local_dim_)};
    }

    /// Global DOFs living on a facet (vertex + edge DOFs for Lagrange).
    std::vector<int> facet_dofs(int f) const;

    /// DOFs fixed by strong Dirichlet conditions on the non-periodic boundary:
    /// all boundary DOFs for continuous Lagrange, normal moments for BDM.
    const std::vector<int> &dirichlet_dofs() const { return dirichlet_; }

    const CellMap &cell_map(int c) const { return maps_[c]; }

    /// Physical shape functions of cell c at reference points, including
    /// orientation signs and vector expansion.
    Tabulation tabulate(int c, const std::vector<Point> &ref_points) const;
    Tabulation tabulate(int c, const Tabulation &reference) const;

    /// Reference tabulation expanded to the space's value layout (no mapping).
    Tabulation reference_tabulation(const std::vector<Point> &ref_points) const;

    /// Lowest-index cell containing x; throws DomainError outside the mesh.
    int locate(const Point &x) const;

  private:
    std::shared_ptr<const Mesh> mesh_;
    Family family_;
    int degree_;
    int components_;
    std::shared_ptr<const RefBasis> basis_;
    int n_dofs_ = 0;
    int local_dim_ = 0;
    std::vector<int> cell_dofs_;
    std::vector<double> cell_signs_;
    std::vector<int> dirichlet_;
    std::vector<CellMap> maps_;
};

enum class Method
{
    TH,   ///< Galerkin Taylor-Hood
    GDTH, ///< grad-div stabilised Taylor-Hood
    SV,   ///< Scott-Vogelius
    BDM,  ///< H(div)-conforming BDM with SIP viscous term and upwinding
};

std::string to_string(Method method);
Method parse_method(const std::string &name);

struct MethodConfig
{
    Method method = Method::BDM;
    int degree = 2;       ///< velocity degree k
    double sigma = -1.0;  ///< SIP penalty; negative selects 4 k^2
    double delta = -1.0;  ///< grad-div parameter; negative selects 0.1 for GD-TH, 0 otherwise

    double penalty() const { return sigma > 0.0 ? sigma : 4.0 * degree * degree; }
    double graddiv() const;

    Family velocity_family() const { return method == Method::BDM ? Family::BDM : Family::LagrangeContinuous; }
    Family pressure_family() const
    {
        return method == Method::TH || method == Method::GDTH ? Family::LagrangeContinuous
                                                              : Family::LagrangeDiscontinuous;
    }
    int pressure_degree() const { return degree - 1; }
    bool divergence_free() const { return method == Method::SV || method == Method::BDM; }

    /// Throws for invalid combinations (SV with k < 4 on a non-split mesh, TH with k < 2, ...).
    void validate(const Mesh &mesh) const;
};

/// Velocity/pressure pair of a method.
struct SpacePair
{
    std::shared_ptr<const FESpace> velocity;
    std::shared_ptr<const FESpace> pressure;
};

std::shared_ptr<const FESpace> build_space(std::shared_ptr<const Mesh> mesh, Family family, int degree,
                                           int components = 1);

SpacePair build_spaces(std::shared_ptr<const Mesh> mesh, const MethodConfig &config);

/// Coefficients of a finite element function.
struct CoefficientVector
{
    std::shared_ptr<const FESpace> space;
    Vector values;
    double time = 0.0;
};

/// DOF-functional interpolation (nodal for Lagrange, moments for BDM).
Vector interpolate(const FESpace &space, const VectorField &field);
Vector interpolate(const FESpace &space, const ScalarField &field);

/// Point evaluation; DG traces on facets come from the lowest-index cell.
Vec2 evaluate_vector(const FESpace &space, const Vector &coeffs, const Point &x);
double evaluate_scalar(const FESpace &space, const Vector &coeffs, const Point &x);

} // namespace flowlab
