#include "flowlab/basis.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/LU>

namespace flowlab
{

std::string to_string(Family family)
{
    switch (family)
    {
    case Family::LagrangeContinuous:
        return "lagrange";
    case Family::LagrangeDiscontinuous:
        return "dg-lagrange";
    case Family::BDM:
        return "bdm";
    }
    return "?";
}

CellMap::CellMap(const Point &v0, const Point &v1, const Point &v2) : origin(v0)
{
    jacobian.col(0) = v1 - v0;
    jacobian.col(1) = v2 - v0;
    det = jacobian.determinant();
    if (!(det > 0.0))
        throw DomainError("cell map with non-positive Jacobian determinant");
    inverse = jacobian.inverse();
}

const std::array<Point, 3> &reference_vertices()
{
    static const std::array<Point, 3> v{Point(0.0, 0.0), Point(1.0, 0.0), Point(0.0, 1.0)};
    return v;
}

std::array<int, 2> local_edge(int i)
{
    switch (i)
    {
    case 0:
        return {1, 2};
    case 1:
        return {0, 2};
    default:
        return {0, 1};
    }
}

int prime_dim(int n) { return n < 0 ? 0 : (n + 1) * (n + 2) / 2; }

namespace
{

// Scaled Legendre L_p(s, t) = t^p P_p(s / t) with s = 2x + y - 1, t = 1 - y,
// and Jacobi P_q^{(a,0)}(2y - 1); values and (x, y) derivatives.
void scaled_legendre(int n, double x, double y, double *v, double *dx, double *dy)
{
    const double s = 2.0 * x + y - 1.0;
    const double t = 1.0 - y;
    v[0] = 1.0;
    dx[0] = dy[0] = 0.0;
    if (n == 0)
        return;
    v[1] = s;
    dx[1] = 2.0;
    dy[1] = 1.0;
    for (int m = 1; m < n; ++m)
    {
        const double a = (2.0 * m + 1.0) / (m + 1.0);
        const double b = m / (m + 1.0);
        v[m + 1] = a * s * v[m] - b * t * t * v[m - 1];
        dx[m + 1] = a * (2.0 * v[m] + s * dx[m]) - b * t * t * dx[m - 1];
        dy[m + 1] = a * (v[m] + s * dy[m]) - b * (-2.0 * t * v[m - 1] + t * t * dy[m - 1]);
    }
}

void jacobi_table(int n, double alpha, double y, double *v, double *dy)
{
    const double z = 2.0 * y - 1.0;
    v[0] = 1.0;
    dy[0] = 0.0;
    if (n == 0)
        return;
    v[1] = 0.5 * ((alpha + 2.0) * z + alpha);
    dy[1] = alpha + 2.0;
    for (int m = 1; m < n; ++m)
    {
        const double c = 2.0 * m + alpha;
        const double a1 = 2.0 * (m + 1) * (m + alpha + 1.0) * c;
        const double a2 = (c + 1.0) * alpha * alpha;
        const double a3 = c * (c + 1.0) * (c + 2.0);
        const double a4 = 2.0 * (m + alpha) * m * (c + 2.0);
        v[m + 1] = ((a2 + a3 * z) * v[m] - a4 * v[m - 1]) / a1;
        dy[m + 1] = ((a2 + a3 * z) * dy[m] + 2.0 * a3 * v[m] - a4 * dy[m - 1]) / a1;
    }
}

} // namespace

void prime_scalar(int n, const Point &x, Eigen::Ref<Vector> values, Eigen::Ref<DenseMatrix> grads)
{
    constexpr int cap = max_basis_degree + 2;
    std::array<double, cap> lv{}, ldx{}, ldy{}, jv{}, jdy{};
    scaled_legendre(n, x.x(), x.y(), lv.data(), ldx.data(), ldy.data());
    int m = 0;
    for (int d = 0; d <= n; ++d)
        for (int q = 0; q <= d; ++q)
        {
            const int p = d - q;
            jacobi_table(q, 2.0 * p + 1.0, x.y(), jv.data(), jdy.data());
            const double scale = std::sqrt((2.0 * p + 1.0) * (2.0 * p + 2.0 * q + 2.0));
            values[m] = scale * lv[p] * jv[q];
            grads(m, 0) = scale * ldx[p] * jv[q];
            grads(m, 1) = scale * (ldy[p] * jv[q] + lv[p] * jdy[q]);
            ++m;
        }
}

RefBasis::RefBasis(Family family, int degree) : family_(family), degree_(degree)
{
    const int min_degree = family == Family::LagrangeDiscontinuous ? 0 : 1;
    if (degree < min_degree || degree > max_basis_degree)
        throw UnsupportedError("unsupported degree " + std::to_string(degree) + " for " + to_string(family));
    if (family == Family::BDM)
        build_bdm();
    else
        build_lagrange();

    DenseMatrix values, grads;
    tabulate_prime(samples_, values, grads);
    const DenseMatrix duality = functionals_ * values;
    Eigen::FullPivLU<DenseMatrix> lu(duality);
    if (!lu.isInvertible())
        throw UnsupportedError("singular duality matrix for " + to_string(family));
    coefficients_ = lu.inverse();
}

void RefBasis::build_lagrange()
{
    const int k = degree_;
    value_dim_ = 1;
    dim_ = prime_dim(k);
    const auto &rv = reference_vertices();
    if (k == 0)
    {
        nodes_ = {Point(1.0 / 3.0, 1.0 / 3.0)};
        interior_ = 1;
    }
    else
    {
        per_vertex_ = 1;
        per_edge_ = k - 1;
        interior_ = prime_dim(k - 3);
        for (const auto &v : rv)
            nodes_.push_back(v);
        for (int e = 0; e < 3; ++e)
        {
            const auto [a, b] = local_edge(e);
            for (int j = 1; j < k; ++j)
                nodes_.push_back(rv[a] + (static_cast<double>(j) / k) * (rv[b] - rv[a]));
        }
        for (int j = 1; j < k; ++j)
            for (int i = 1; i + j < k; ++i)
                nodes_.emplace_back(static_cast<double>(i) / k, static_cast<double>(j) / k);
    }
    samples_ = nodes_;
    functionals_ = DenseMatrix::Identity(dim_, dim_);
}

void RefBasis::build_bdm()
{
    const int k = degree_;
    value_dim_ = 2;
    dim_ = 2 * prime_dim(k);
    per_edge_ = k + 1;
    interior_ = dim_ - 3 * per_edge_;

    const LineRule line = line_rule(2 * k + 2);
    const QuadRule tri = quadrature_rule(2 * k + 2);
    const auto &rv = reference_vertices();

    const int n_edge_samples = 3 * line.size();
    samples_.clear();
    for (int e = 0; e < 3; ++e)
    {
        const auto [a, b] = local_edge(e);
        for (double s : line.points)
            samples_.push_back(rv[a] + s * (rv[b] - rv[a]));
    }
    for (const auto &p : tri.points)
        samples_.push_back(p);

    functionals_ = DenseMatrix::Zero(dim_, 2 * static_cast<int>(samples_.size()));
    int row = 0;
    for (int e = 0; e < 3; ++e)
    {
        const auto [a, b] = local_edge(e);
        const Vec2 t = rv[b] - rv[a];
        const Vec2 n(t.y(), -t.x());
        for (int j = 0; j <= k; ++j, ++row)
            for (int q = 0; q < line.size(); ++q)
            {
                const int s = e * line.size() + q;
                const double w = line.weights[q] * legendre01(j, line.points[q]);
                functionals_(row, 2 * s) = w * n.x();
                functionals_(row, 2 * s + 1) = w * n.y();
            }
    }

    // Interior moments against grad P_{k-1} (without constants) and
    // curl(b P_{k-2}) with the cubic bubble b = x y (1 - x - y).
    const int ng = prime_dim(k - 1);
    const int nc = prime_dim(k - 2);
    Vector pv(std::max(ng, 1));
    DenseMatrix pg(std::max(ng, 1), 2);
    for (int q = 0; q < tri.size(); ++q)
    {
        const Point &x = tri.points[q];
        const int s = n_edge_samples + q;
        const double w = tri.weights[q];
        int r = row;
        if (k >= 1)
        {
            prime_scalar(k - 1, x, pv.head(ng), pg.topRows(ng));
            for (int m = 1; m < ng; ++m, ++r)
            {
                functionals_(r, 2 * s) = w * pg(m, 0);
                functionals_(r, 2 * s + 1) = w * pg(m, 1);
            }
        }
        if (nc > 0)
        {
            Vector rv2(nc);
            DenseMatrix rg(nc, 2);
            prime_scalar(k - 2, x, rv2, rg);
            const double bub = x.x() * x.y() * (1.0 - x.x() - x.y());
            const Vec2 gb(x.y() * (1.0 - x.x() - x.y()) - x.x() * x.y(), x.x() * (1.0 - x.x() - x.y()) - x.x() * x.y());
            for (int m = 0; m < nc; ++m, ++r)
            {
                const Vec2 g = rv2[m] * gb + bub * Vec2(rg(m, 0), rg(m, 1));
                functionals_(r, 2 * s) = w * g.y();
                functionals_(r, 2 * s + 1) = -w * g.x();
            }
        }
    }
}

void RefBasis::tabulate_prime(const std::vector<Point> &points, DenseMatrix &values, DenseMatrix &grads) const
{
    const int k = degree_;
    const int np = prime_dim(k);
    const int nq = static_cast<int>(points.size());
    Vector pv(np);
    DenseMatrix pg(np, 2);
    if (value_dim_ == 1)
    {
        values.resize(nq, np);
        grads.resize(nq * 2, np);
        for (int q = 0; q < nq; ++q)
        {
            prime_scalar(k, points[q], pv, pg);
            values.row(q) = pv.transpose();
            grads.row(2 * q) = pg.col(0).transpose();
            grads.row(2 * q + 1) = pg.col(1).transpose();
        }
        return;
    }
    values = DenseMatrix::Zero(nq * 2, 2 * np);
    grads = DenseMatrix::Zero(nq * 4, 2 * np);
    for (int q = 0; q < nq; ++q)
    {
        prime_scalar(k, points[q], pv, pg);
        for (int c = 0; c < 2; ++c)
        {
            values.block(2 * q + c, c * np, 1, np) = pv.transpose();
            grads.block((2 * q + c) * 2, c * np, 1, np) = pg.col(0).transpose();
            grads.block((2 * q + c) * 2 + 1, c * np, 1, np) = pg.col(1).transpose();
        }
    }
}

Tabulation RefBasis::tabulate(const std::vector<Point> &points) const
{
    DenseMatrix values, grads;
    tabulate_prime(points, values, grads);
    Tabulation tab;
    tab.n_points = static_cast<int>(points.size());
    tab.n_dofs = dim_;
    tab.value_dim = value_dim_;
    tab.values = values * coefficients_;
    tab.grads = grads * coefficients_;
    if (value_dim_ == 2)
    {
        tab.divs.resize(tab.n_points, dim_);
        for (int q = 0; q < tab.n_points; ++q)
            tab.divs.row(q) = tab.grads.row(4 * q) + tab.grads.row(4 * q + 3);
    }
    return tab;
}

DenseMatrix RefBasis::duality_matrix() const
{
    const Tabulation tab = tabulate(samples_);
    return functionals_ * tab.values;
}

std::shared_ptr<const RefBasis> ref_basis(Family family, int degree)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const RefBasis>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(static_cast<int>(family), degree);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    auto basis = std::make_shared<const RefBasis>(family, degree);
    cache.emplace(key, basis);
    return basis;
}

Tabulation map_basis(const CellMap &map, const RefBasis &basis, const Tabulation &ref)
{
    Tabulation tab;
    tab.n_points = ref.n_points;
    tab.n_dofs = ref.n_dofs;
    tab.value_dim = ref.value_dim;
    const int nd = ref.n_dofs;
    if (basis.value_dim() == 1)
    {
        tab.values = ref.values;
        tab.grads.resize(ref.grads.rows(), nd);
        const Mat2 jit = map.inverse.transpose();
        for (int q = 0; q < ref.n_points; ++q)
            tab.grads.middleRows(2 * q, 2).noalias() = jit * ref.grads.middleRows(2 * q, 2);
        return tab;
    }
    const double inv_det = 1.0 / map.det;
    const Mat2 &jac = map.jacobian;
    const Mat2 &jinv = map.inverse;
    tab.values.resize(ref.values.rows(), nd);
    tab.grads.resize(ref.grads.rows(), nd);
    tab.divs = ref.divs * inv_det;
    for (int q = 0; q < ref.n_points; ++q)
    {
        tab.values.middleRows(2 * q, 2).noalias() = inv_det * jac * ref.values.middleRows(2 * q, 2);
        // grad v = J (grad vhat) J^{-1} / det J, rows (c, d).
        const auto g = ref.grads.middleRows(4 * q, 4);
        for (int i = 0; i < nd; ++i)
        {
            Mat2 gh;
            gh << g(0, i), g(1, i), g(2, i), g(3, i);
            const Mat2 gp = inv_det * jac * gh * jinv;
            tab.grads(4 * q + 0, i) = gp(0, 0);
            tab.grads(4 * q + 1, i) = gp(0, 1);
            tab.grads(4 * q + 2, i) = gp(1, 0);
            tab.grads(4 * q + 3, i) = gp(1, 1);
        }
    }
    return tab;
}

} // namespace flowlab
