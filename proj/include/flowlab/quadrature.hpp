#pragma once

#include <vector>

#include "flowlab/types.hpp"

namespace flowlab
{

/// Quadrature on the reference triangle {x >= 0, y >= 0, x + y <= 1}.
struct QuadRule
{
    std::vector<Point> points;
    std::vector<double> weights; ///< sum to 1/2
    int exact_degree = 0;

    int size() const { return static_cast<int>(points.size()); }
};

/// Gauss rule on [0, 1].
struct LineRule
{
    std::vector<double> points;
    std::vector<double> weights; ///< sum to 1
    int exact_degree = 0;

    int size() const { return static_cast<int>(points.size()); }
};

inline constexpr int max_quadrature_degree = 25;

/// Collapsed (conical product) Gauss-Jacobi rule exact for total degree
/// `exact_degree`, 1 <= exact_degree <= 25. Degree 1 is the centroid rule.
QuadRule quadrature_rule(int exact_degree);

/// Gauss-Legendre rule on [0, 1] exact to `exact_degree` (>= 0).
LineRule line_rule(int exact_degree);

/// Gauss-Jacobi nodes/weights on [-1, 1] for weight (1-x)^alpha (1+x)^beta.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double> &nodes, std::vector<double> &weights);

/// Shifted Legendre polynomial P_n(2s - 1) on [0, 1].
double legendre01(int n, double s);

} // namespace flowlab
