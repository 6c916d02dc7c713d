#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace flowlab
{

template <typename Scalar> using Point2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Point = Point2<double>;
using Vec2 = Point2<double>;
using Mat2 = Matrix2<double>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Compressed row storage; column indices are sorted within each row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

using ScalarField = std::function<double(const Point &)>;
using VectorField = std::function<Vec2(const Point &)>;
using TensorField = std::function<Mat2(const Point &)>;

using TimeScalarField = std::function<double(double, const Point &)>;
using TimeVectorField = std::function<Vec2(double, const Point &)>;
using TimeTensorField = std::function<Mat2(double, const Point &)>;

struct Error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct ParseError : Error
{
    using Error::Error;
};

struct TopologyError : Error
{
    using Error::Error;
};

struct PeriodicityError : Error
{
    using Error::Error;
};

struct UnsupportedError : Error
{
    using Error::Error;
};

struct DomainError : Error
{
    using Error::Error;
};

struct SingularMatrixError : Error
{
    using Error::Error;
};

struct SolverError : Error
{
    using Error::Error;
};

struct PreconditionError : Error
{
    using Error::Error;
};

struct ConfigError : Error
{
    using Error::Error;
};

} // namespace flowlab
