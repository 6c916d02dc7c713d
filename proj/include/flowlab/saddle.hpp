#pragma once

#include <memory>
#include <vector>

#include "flowlab/types.hpp"

namespace flowlab
{

/// BLAS behind the sparse LU; linked into every executable using the library.
const char *blas_backend();

struct SaddleOptions
{
    /// Scalar multiplier enforcing m^T p = 0; skipped when there is no pressure.
    bool mean_constraint = true;
    /// Rows fixing the integral of each velocity component (kernel of the
    /// viscous form on fully periodic meshes when there is no mass term).
    std::vector<Vector> velocity_constraints;
};

struct SaddleSolution
{
    Vector u;
    Vector p;
    double lambda = 0.0;
};

/// Sparse LU of
///
///     [ K   B^T  0 ] [u]   [f]
///     [ B   0    m ] [p] = [g]
///     [ 0   m^T  0 ] [l]   [0]
///
/// with strongly imposed velocity DOFs eliminated (their values move to the
/// right-hand side). Every solve is checked against a relative residual of 1e-10.
class SaddleFactorization
{
  public:
    SaddleFactorization(const SparseMatrix &K, const SparseMatrix &B, const Vector &mean,
                        const std::vector<int> &fixed_dofs, SaddleOptions options = {});
    ~SaddleFactorization();
    SaddleFactorization(SaddleFactorization &&) noexcept;
    SaddleFactorization &operator=(SaddleFactorization &&) noexcept;

    /// `fixed` holds prescribed values at the fixed DOFs (other entries ignored);
    /// `g` may be empty (zero); `targets` feeds the velocity constraint rows.
    SaddleSolution solve(const Vector &f, const Vector &g, const Vector &fixed, const Vector &targets = {}) const;

    int n_velocity() const { return n_u_; }
    int n_pressure() const { return n_p_; }
    int size() const;

    static constexpr double residual_tolerance = 1e-10;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int n_u_ = 0;
    int n_p_ = 0;
};

} // namespace flowlab
