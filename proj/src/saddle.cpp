#include "flowlab/saddle.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/UmfPackSupport>

namespace flowlab
{

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct SaddleFactorization::Impl
{
    SparseMatrix K;
    SparseMatrix B;
    std::vector<int> free_index; ///< reduced index of each velocity DOF, -1 if fixed
    std::vector<int> free_dofs;
    std::vector<Vector> constraints;
    int n_free = 0;
    int n_mean = 0;
    ColMatrix system;
    Vector scale; ///< symmetric equilibration: LU factors diag(scale) system diag(scale)
    ColMatrix scaled; ///< UMFPACK keeps pointers into the factorised matrix
    Eigen::UmfPackLU<ColMatrix> lu;

    Vector apply(const Vector &b) const
    {
        return scale.cwiseProduct(Vector(lu.solve(Vector(scale.cwiseProduct(b)))));
    }
};

SaddleFactorization::~SaddleFactorization() = default;
SaddleFactorization::SaddleFactorization(SaddleFactorization &&) noexcept = default;
SaddleFactorization &SaddleFactorization::operator=(SaddleFactorization &&) noexcept = default;

int SaddleFactorization::size() const { return static_cast<int>(impl_->system.rows()); }

SaddleFactorization::SaddleFactorization(const SparseMatrix &K, const SparseMatrix &B, const Vector &mean,
                                         const std::vector<int> &fixed_dofs, SaddleOptions options)
    : impl_(std::make_unique<Impl>()), n_u_(static_cast<int>(K.rows())), n_p_(static_cast<int>(B.rows()))
{
    if (K.rows() != K.cols() || (n_p_ > 0 && B.cols() != K.rows()) || mean.size() != n_p_)
        throw SolverError("inconsistent saddle-point block sizes");
    Impl &s = *impl_;
    s.K = K;
    s.B = B;
    s.constraints = std::move(options.velocity_constraints);
    s.free_index.assign(n_u_, 0);
    for (int d : fixed_dofs)
        s.free_index[d] = -1;
    for (int j = 0; j < n_u_; ++j)
        if (s.free_index[j] >= 0)
        {
            s.free_index[j] = s.n_free++;
            s.free_dofs.push_back(j);
        }
    s.n_mean = options.mean_constraint && n_p_ > 0 ? 1 : 0;
    const int n_c = static_cast<int>(s.constraints.size());
    const int n = s.n_free + n_p_ + s.n_mean + n_c;

    std::vector<Triplet> t;
    t.reserve(K.nonZeros() + 2 * B.nonZeros() + 2 * n_p_);
    for (int i = 0; i < n_u_; ++i)
    {
        const int ri = s.free_index[i];
        if (ri < 0)
            continue;
        for (SparseMatrix::InnerIterator it(K, i); it; ++it)
        {
            const int cj = s.free_index[it.col()];
            if (cj >= 0)
                t.emplace_back(ri, cj, it.value());
        }
    }
    for (int q = 0; q < n_p_; ++q)
        for (SparseMatrix::InnerIterator it(B, q); it; ++it)
        {
            const int cj = s.free_index[it.col()];
            if (cj < 0)
                continue;
            t.emplace_back(s.n_free + q, cj, it.value());
            t.emplace_back(cj, s.n_free + q, it.value());
        }
    if (s.n_mean)
        for (int q = 0; q < n_p_; ++q)
        {
            t.emplace_back(s.n_free + q, s.n_free + n_p_, mean[q]);
            t.emplace_back(s.n_free + n_p_, s.n_free + q, mean[q]);
        }
    for (int c = 0; c < n_c; ++c)
    {
        const int row = s.n_free + n_p_ + s.n_mean + c;
        for (int j : s.free_dofs)
            if (s.constraints[c][j] != 0.0)
            {
                t.emplace_back(row, s.free_index[j], s.constraints[c][j]);
                t.emplace_back(s.free_index[j], row, s.constraints[c][j]);
            }
    }
    s.system.resize(n, n);
    s.system.setFromTriplets(t.begin(), t.end());
    s.system.makeCompressed();

    // Ruiz equilibration; the velocity, pressure and multiplier blocks live on
    // very different scales
    s.scale = Vector::Ones(n);
    ColMatrix &scaled = s.scaled;
    scaled = s.system;
    for (int it = 0; it < 8; ++it)
    {
        Vector row_max = Vector::Zero(n);
        for (int k = 0; k < scaled.outerSize(); ++k)
            for (ColMatrix::InnerIterator e(scaled, k); e; ++e)
                row_max[e.row()] = std::max(row_max[e.row()], std::abs(e.value()));
        Vector d(n);
        for (int i = 0; i < n; ++i)
            d[i] = row_max[i] > 0.0 ? 1.0 / std::sqrt(row_max[i]) : 1.0;
        scaled = d.asDiagonal() * scaled * d.asDiagonal();
        s.scale = s.scale.cwiseProduct(d);
    }
    s.lu.analyzePattern(scaled);
    s.lu.factorize(scaled);
    if (s.lu.info() != Eigen::Success)
        throw SingularMatrixError("saddle-point factorization failed");

    // A numerically singular matrix may factorize with tiny pivots; a random
    // right-hand side exposes it through the residual.
    std::mt19937 gen(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector b(n);
    for (int i = 0; i < n; ++i)
        b[i] = dist(gen);
    Vector x = s.apply(b);
    for (int it = 0; it < 3; ++it)
        x += s.apply(b - s.system * x);
    const double res = (s.system * x - b).norm() / b.norm();
    if (!(res <= residual_tolerance))
    {
        std::ostringstream msg;
        msg << "saddle-point matrix is singular (random solve residual " << std::scientific << res << ")";
        throw SingularMatrixError(msg.str());
    }
}

SaddleSolution SaddleFactorization::solve(const Vector &f, const Vector &g, const Vector &fixed,
                                          const Vector &targets) const
{
    const Impl &s = *impl_;
    const int n = static_cast<int>(s.system.rows());
    const int n_c = static_cast<int>(s.constraints.size());
    Vector fixed_full = Vector::Zero(n_u_);
    const bool has_fixed = fixed.size() == n_u_ && s.n_free < n_u_;
    if (has_fixed)
        for (int j = 0; j < n_u_; ++j)
            if (s.free_index[j] < 0)
                fixed_full[j] = fixed[j];

    Vector b = Vector::Zero(n);
    Vector ku = has_fixed ? Vector(s.K * fixed_full) : Vector::Zero(n_u_);
    for (int k = 0; k < s.n_free; ++k)
        b[k] = f[s.free_dofs[k]] - ku[s.free_dofs[k]];
    if (n_p_ > 0)
    {
        Vector bp = g.size() == n_p_ ? g : Vector::Zero(n_p_);
        if (has_fixed)
            bp -= s.B * fixed_full;
        b.segment(s.n_free, n_p_) = bp;
    }
    for (int c = 0; c < n_c; ++c)
    {
        const double target = targets.size() > c ? targets[c] : 0.0;
        b[s.n_free + n_p_ + s.n_mean + c] = target - s.constraints[c].dot(fixed_full);
    }

    const double bnorm = b.norm();
    Vector x = Vector::Zero(n);
    if (bnorm > 0.0)
    {
        x = s.apply(b);
        for (int it = 0; it < 3; ++it)
        {
            const Vector r = b - s.system * x;
            if (r.norm() <= 1e-15 * bnorm)
                break;
            x += s.apply(r);
        }
        const double res = (b - s.system * x).norm();
        if (!(res <= residual_tolerance * bnorm))
        {
            std::ostringstream msg;
            msg << "saddle-point solve residual " << std::scientific << res / bnorm << " exceeds tolerance";
            throw SolverError(msg.str());
        }
    }

    SaddleSolution out;
    out.u = fixed_full;
    for (int k = 0; k < s.n_free; ++k)
        out.u[s.free_dofs[k]] = x[k];
    out.p = x.segment(s.n_free, n_p_);
    out.lambda = s.n_mean ? x[s.n_free + n_p_] : 0.0;
    return out;
}

} // namespace flowlab
