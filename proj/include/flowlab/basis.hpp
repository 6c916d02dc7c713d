#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flowlab/quadrature.hpp"
#include "flowlab/types.hpp"

namespace flowlab
{

enum class Family
{
    LagrangeContinuous,
    LagrangeDiscontinuous,
    BDM,
};

std::string to_string(Family family);

/// Shape function values and derivatives at a set of points.
///
/// Rows of `values` are ordered (point, component); rows of `grads` are
/// ordered (point, component, direction), i.e. row (q*value_dim + c)*2 + d
/// holds d(phi_c)/dx_d at point q. `divs` is filled for vector bases only.
struct Tabulation
{
    int n_points = 0;
    int n_dofs = 0;
    int value_dim = 1;
    DenseMatrix values;
    DenseMatrix grads;
    DenseMatrix divs;

    auto value(int q) const { return values.middleRows(q * value_dim, value_dim); }
    auto grad(int q) const { return grads.middleRows(q * value_dim * 2, value_dim * 2); }
};

/// Affine map x = origin + J xhat from the reference triangle.
struct CellMap
{
    Point origin = Point::Zero();
    Mat2 jacobian = Mat2::Identity();
    Mat2 inverse = Mat2::Identity();
    double det = 1.0;

    CellMap() = default;
    CellMap(const Point &v0, const Point &v1, const Point &v2);

    Point map(const Point &ref) const { return origin + jacobian * ref; }
    Point pullback(const Point &x) const { return inverse * (x - origin); }
};

/// Reference element: basis functions dual to a set of DOF functionals.
///
/// DOF order: vertex DOFs, then edge DOFs edge by edge (local edge i is
/// opposite vertex i and runs from its lower to its higher local vertex),
/// then interior DOFs. Every DOF functional is a weighted sum of point
/// samples, `dof = functionals() * samples`, with samples stacked as
/// (point, component).
class RefBasis
{
  public:
    RefBasis(Family family, int degree);

    Family family() const { return family_; }
    int degree() const { return degree_; }
    int dim() const { return dim_; }
    int value_dim() const { return value_dim_; }
    int dofs_per_vertex() const { return per_vertex_; }
    int dofs_per_edge() const { return per_edge_; }
    int dofs_interior() const { return interior_; }

    /// Lagrange nodes in reference coordinates (empty for BDM).
    const std::vector<Point> &nodes() const { return nodes_; }

    const std::vector<Point> &sample_points() const { return samples_; }
    const DenseMatrix &functionals() const { return functionals_; }

    Tabulation tabulate(const std::vector<Point> &points) const;

    /// DOF functionals applied to the basis itself; the identity up to round-off.
    DenseMatrix duality_matrix() const;

  private:
    void build_lagrange();
    void build_bdm();
    void tabulate_prime(const std::vector<Point> &points, DenseMatrix &values, DenseMatrix &grads) const;

    Family family_;
    int degree_;
    int dim_ = 0;
    int value_dim_ = 1;
    int per_vertex_ = 0;
    int per_edge_ = 0;
    int interior_ = 0;
    std::vector<Point> nodes_;
    std::vector<Point> samples_;
    DenseMatrix functionals_;
    DenseMatrix coefficients_; ///< prime coefficients, one column per basis function
};

inline constexpr int max_basis_degree = 8;

/// Cached reference basis; throws UnsupportedError for invalid combinations.
std::shared_ptr<const RefBasis> ref_basis(Family family, int degree);

/// Maps reference tabulations to a physical cell: affine pullback for
/// scalar bases, contravariant Piola v = J vhat / det J for BDM.
Tabulation map_basis(const CellMap &map, const RefBasis &basis, const Tabulation &ref);

/// L2-orthonormal Dubiner basis of P_n on the reference triangle, ordered by
/// total degree with the constant first.
int prime_dim(int n);
void prime_scalar(int n, const Point &x, Eigen::Ref<Vector> values, Eigen::Ref<DenseMatrix> grads);

/// Reference vertices of the unit triangle.
const std::array<Point, 3> &reference_vertices();

/// Local endpoints (lower, higher) of local edge i.
std::array<int, 2> local_edge(int i);

} // namespace flowlab
