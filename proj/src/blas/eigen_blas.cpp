// Real BLAS routines called by UMFPACK, on Eigen's dense kernels.
//
// Definitions in the executable take precedence over the system BLAS, so
// UMFPACK runs on these. This keeps factorizations single-threaded and
// bit-reproducible and sidesteps CPU-autodetected kernels that are faulty on
// some hosts (OpenBLAS 0.3.20 Cooperlake corrupts the heap on AVX-512 VMs).
// Only positive increments occur in UMFPACK; BLAS argument errors abort.

#include <cstdio>
#include <cstdlib>

#include <Eigen/Core>

#include "flowlab/saddle.hpp"

namespace
{

using Stride = Eigen::OuterStride<>;
using Mat = Eigen::Map<Eigen::MatrixXd, 0, Stride>;
using ConstMat = Eigen::Map<const Eigen::MatrixXd, 0, Stride>;
using Vec = Eigen::Map<Eigen::VectorXd, 0, Eigen::InnerStride<>>;
using ConstVec = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

[[noreturn]] void bad_argument(const char *routine)
{
    std::fprintf(stderr, "flowlab BLAS: unsupported argument in %s\n", routine);
    std::abort();
}

bool is(const char *c, char want) { return (*c | 0x20) == want; }

// op(T) X = B (left) or X op(T) = B (right) in place; `mode` is an Eigen triangular mode.
template <int Mode, typename Tri> void tri_solve(const Tri &T, bool left, Mat &B)
{
    if (left)
        T.template triangularView<Mode>().solveInPlace(B);
    else
        T.template triangularView<Mode>().template solveInPlace<Eigen::OnTheRight>(B);
}

template <typename Tri, typename Rhs> void tri_dispatch(const Tri &T, bool lower, bool unit, bool left, Rhs &B)
{
    if (lower && unit)
        tri_solve<Eigen::UnitLower>(T, left, B);
    else if (lower)
        tri_solve<Eigen::Lower>(T, left, B);
    else if (unit)
        tri_solve<Eigen::UnitUpper>(T, left, B);
    else
        tri_solve<Eigen::Upper>(T, left, B);
}

} // namespace

extern "C"
{

void dgemm_(const char *transa, const char *transb, const int *m, const int *n, const int *k, const double *alpha,
            const double *a, const int *lda, const double *b, const int *ldb, const double *beta, double *c,
            const int *ldc)
{
    if (*m <= 0 || *n <= 0)
        return;
    Mat C(c, *m, *n, Stride(*ldc));
    if (*beta == 0.0)
        C.setZero();
    else if (*beta != 1.0)
        C *= *beta;
    if (*k <= 0 || *alpha == 0.0)
        return;
    const bool ta = !is(transa, 'n'), tb = !is(transb, 'n');
    const ConstMat A(a, ta ? *k : *m, ta ? *m : *k, Stride(*lda));
    const ConstMat B(b, tb ? *n : *k, tb ? *k : *n, Stride(*ldb));
    if (!ta && !tb)
        C.noalias() += *alpha * A * B;
    else if (ta && !tb)
        C.noalias() += *alpha * A.transpose() * B;
    else if (!ta && tb)
        C.noalias() += *alpha * A * B.transpose();
    else
        C.noalias() += *alpha * A.transpose() * B.transpose();
}

void dgemv_(const char *trans, const int *m, const int *n, const double *alpha, const double *a, const int *lda,
            const double *x, const int *incx, const double *beta, double *y, const int *incy)
{
    if (*m <= 0 || *n <= 0)
        return;
    if (*incx <= 0 || *incy <= 0)
        bad_argument("dgemv");
    const bool t = !is(trans, 'n');
    const ConstMat A(a, *m, *n, Stride(*lda));
    const ConstVec X(x, t ? *m : *n, Eigen::InnerStride<>(*incx));
    Vec Y(y, t ? *n : *m, Eigen::InnerStride<>(*incy));
    if (*beta == 0.0)
        Y.setZero();
    else if (*beta != 1.0)
        Y *= *beta;
    if (*alpha == 0.0)
        return;
    if (t)
        Y.noalias() += *alpha * A.transpose() * X;
    else
        Y.noalias() += *alpha * A * X;
}

void dger_(const int *m, const int *n, const double *alpha, const double *x, const int *incx, const double *y,
           const int *incy, double *a, const int *lda)
{
    if (*m <= 0 || *n <= 0 || *alpha == 0.0)
        return;
    if (*incx <= 0 || *incy <= 0)
        bad_argument("dger");
    Mat A(a, *m, *n, Stride(*lda));
    const ConstVec X(x, *m, Eigen::InnerStride<>(*incx));
    const ConstVec Y(y, *n, Eigen::InnerStride<>(*incy));
    A.noalias() += *alpha * X * Y.transpose();
}

void dtrsm_(const char *side, const char *uplo, const char *transa, const char *diag, const int *m, const int *n,
            const double *alpha, const double *a, const int *lda, double *b, const int *ldb)
{
    if (*m <= 0 || *n <= 0)
        return;
    const bool left = is(side, 'l');
    const int na = left ? *m : *n;
    Mat B(b, *m, *n, Stride(*ldb));
    if (*alpha == 0.0)
    {
        B.setZero();
        return;
    }
    if (*alpha != 1.0)
        B *= *alpha;
    const ConstMat A(a, na, na, Stride(*lda));
    const bool lower = is(uplo, 'l'), unit = is(diag, 'u');
    if (is(transa, 'n'))
        tri_dispatch(A, lower, unit, left, B);
    else
        tri_dispatch(A.transpose(), !lower, unit, left, B);
}

void dtrsv_(const char *uplo, const char *trans, const char *diag, const int *n, const double *a, const int *lda,
            double *x, const int *incx)
{
    if (*n <= 0)
        return;
    if (*incx <= 0)
        bad_argument("dtrsv");
    const ConstMat A(a, *n, *n, Stride(*lda));
    // contiguous copy: Eigen's triangular solve wants unit inner stride
    Vec X(x, *n, Eigen::InnerStride<>(*incx));
    Eigen::VectorXd v = X;
    Eigen::Map<Eigen::MatrixXd, 0, Stride> V(v.data(), *n, 1, Stride(*n));
    const bool lower = is(uplo, 'l'), unit = is(diag, 'u');
    if (is(trans, 'n'))
        tri_dispatch(A, lower, unit, true, V);
    else
        tri_dispatch(A.transpose(), !lower, unit, true, V);
    X = v;
}

} // extern "C"

namespace flowlab
{

const char *blas_backend() { return "eigen"; }

} // namespace flowlab
