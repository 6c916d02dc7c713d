#include "flowlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace flowlab
{

void gauss_jacobi(int n, double alpha, double beta, std::vector<double> &nodes, std::vector<double> &weights)
{
    // Golub-Welsch on the symmetric Jacobi matrix of the monic recurrence.
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
    const double ab = alpha + beta;
    for (int k = 0; k < n; ++k)
    {
        const double s = 2.0 * k + ab;
        diag[k] = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
        if (k + 1 < n)
        {
            const double m = k + 1.0;
            const double t = 2.0 * m + ab;
            sub[k] = std::sqrt(4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (t * t * (t + 1.0) * (t - 1.0)));
        }
    }
    const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                       std::tgamma(ab + 2.0);
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    if (n == 1)
    {
        nodes[0] = diag[0];
        weights[0] = mu0;
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    for (int k = 0; k < n; ++k)
    {
        nodes[k] = solver.eigenvalues()[k];
        const double v = solver.eigenvectors()(0, k);
        weights[k] = mu0 * v * v;
    }
}

namespace
{

QuadRule build_triangle_rule(int degree)
{
    const int n = degree / 2 + 1;
    std::vector<double> xs, ws, xj, wj;
    gauss_jacobi(n, 0.0, 0.0, xs, ws);
    gauss_jacobi(n, 1.0, 0.0, xj, wj);
    QuadRule rule;
    rule.exact_degree = degree;
    for (int j = 0; j < n; ++j)
    {
        // eta in [0,1] with weight (1 - eta)
        const double eta = 0.5 * (xj[j] + 1.0);
        const double weta = wj[j] / 4.0;
        for (int i = 0; i < n; ++i)
        {
            const double xi = 0.5 * (xs[i] + 1.0);
            const double wxi = ws[i] / 2.0;
            rule.points.emplace_back(xi * (1.0 - eta), eta);
            rule.weights.push_back(wxi * weta);
        }
    }
    return rule;
}

} // namespace

QuadRule quadrature_rule(int exact_degree)
{
    if (exact_degree < 1 || exact_degree > max_quadrature_degree)
        throw UnsupportedError("quadrature degree " + std::to_string(exact_degree) + " outside [1, 25]");
    static std::mutex mutex;
    static std::map<int, QuadRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(exact_degree);
    if (it == cache.end())
        it = cache.emplace(exact_degree, build_triangle_rule(exact_degree)).first;
    return it->second;
}

LineRule line_rule(int exact_degree)
{
    if (exact_degree < 0)
        throw UnsupportedError("negative line quadrature degree");
    const int n = exact_degree / 2 + 1;
    std::vector<double> x, w;
    gauss_jacobi(n, 0.0, 0.0, x, w);
    LineRule rule;
    rule.exact_degree = 2 * n - 1;
    for (int i = 0; i < n; ++i)
    {
        rule.points.push_back(0.5 * (x[i] + 1.0));
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

double legendre01(int n, double s)
{
    const double x = 2.0 * s - 1.0;
    double p0 = 1.0, p1 = x;
    if (n == 0)
        return p0;
    for (int k = 1; k < n; ++k)
    {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

} // namespace flowlab
