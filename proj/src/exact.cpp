#include "flowlab/exact.hpp"

#include <cmath>
#include <numbers>

namespace flowlab
{

namespace
{

constexpr double pi = std::numbers::pi;

} // namespace

VectorField ExactSolution::velocity_at(double t) const
{
    return [fn = u, t](const Point &x) { return fn(t, x); };
}

TensorField ExactSolution::gradient_at(double t) const
{
    return [fn = grad_u, t](const Point &x) { return fn(t, x); };
}

VectorField ExactSolution::forcing_at(double t) const
{
    if (!f)
        return {};
    return [fn = f, t](const Point &x) { return fn(t, x); };
}

ExactSolution lattice_flow(double nu)
{
    ExactSolution s;
    s.name = "lattice";
    s.nu = nu;
    s.periodic = true;
    const double a = 8.0 * pi * pi * nu;
    s.u = [a](double t, const Point &x) -> Vec2 {
        const double sx = std::sin(2 * pi * x.x()), cx = std::cos(2 * pi * x.x());
        const double sy = std::sin(2 * pi * x.y()), cy = std::cos(2 * pi * x.y());
        return Vec2(sx * sy, cx * cy) * std::exp(-a * t);
    };
    s.grad_u = [a](double t, const Point &x) -> Mat2 {
        const double sx = std::sin(2 * pi * x.x()), cx = std::cos(2 * pi * x.x());
        const double sy = std::sin(2 * pi * x.y()), cy = std::cos(2 * pi * x.y());
        Mat2 g;
        g << cx * sy, sx * cy, -sx * cy, -cx * sy;
        return Mat2(2 * pi * std::exp(-a * t) * g);
    };
    s.p = [a](double t, const Point &x) -> double {
        return 0.25 * (std::cos(4 * pi * x.x()) - std::cos(4 * pi * x.y())) * std::exp(-2 * a * t);
    };
    s.f = [](double, const Point &) -> Vec2 { return Vec2(0.0, 0.0); };
    s.u_linf = [a](double t) { return std::exp(-a * t); };
    s.grad_linf = [a](double t) { return 2 * pi * std::exp(-a * t); };
    return s;
}

ExactSolution potential_flow(double nu)
{
    ExactSolution s;
    s.name = "potential";
    s.nu = nu;
    s.u = [](double t, const Point &x) -> Vec2 {
        const double X = x.x(), Y = x.y();
        const double x2 = X * X, y2 = Y * Y;
        return Vec2(t * (5 * x2 * x2 - 30 * x2 * y2 + 5 * y2 * y2), t * (-20 * x2 * X * Y + 20 * X * y2 * Y));
    };
    s.grad_u = [](double t, const Point &x) -> Mat2 {
        const double X = x.x(), Y = x.y();
        const double x2 = X * X, y2 = Y * Y;
        Mat2 g;
        g << 20 * x2 * X - 60 * X * y2, -60 * x2 * Y + 20 * y2 * Y, -60 * x2 * Y + 20 * y2 * Y,
            -20 * x2 * X + 60 * X * y2;
        return Mat2(t * g);
    };
    s.p = [](double t, const Point &x) -> double {
        const double X = x.x(), Y = x.y();
        const double r2 = X * X + Y * Y;
        const double phi = X * X * X * X * X - 10 * X * X * X * Y * Y + 5 * X * Y * Y * Y * Y;
        return -12.5 * t * t * r2 * r2 * r2 * r2 - phi;
    };
    s.f = [](double, const Point &) -> Vec2 { return Vec2(0.0, 0.0); };
    return s;
}

ExactSolution rigid_rotation(double nu)
{
    ExactSolution s;
    s.name = "rotation";
    s.nu = nu;
    s.u = [](double, const Point &x) -> Vec2 { return Vec2(x.y(), -x.x()); };
    s.grad_u = [](double, const Point &) -> Mat2 {
        Mat2 g;
        g << 0, 1, -1, 0;
        return g;
    };
    s.p = [](double, const Point &x) -> double { return 0.5 * x.squaredNorm() - 1.0 / 3.0; };
    s.f = [](double, const Point &) -> Vec2 { return Vec2(0.0, 0.0); };
    return s;
}

ExactSolution forced_taylor_green(double nu)
{
    ExactSolution s;
    s.name = "taylor-green";
    s.nu = nu;
    s.periodic = true;
    auto shape = [](const Point &x) {
        return Vec2(std::sin(2 * pi * x.x()) * std::cos(2 * pi * x.y()),
                    -std::cos(2 * pi * x.x()) * std::sin(2 * pi * x.y()));
    };
    s.u = [shape](double t, const Point &x) -> Vec2 { return Vec2((1.0 + t) * shape(x)); };
    s.grad_u = [](double t, const Point &x) -> Mat2 {
        const double sx = std::sin(2 * pi * x.x()), cx = std::cos(2 * pi * x.x());
        const double sy = std::sin(2 * pi * x.y()), cy = std::cos(2 * pi * x.y());
        Mat2 g;
        g << cx * cy, -sx * sy, sx * sy, -cx * cy;
        return Mat2(2 * pi * (1.0 + t) * g);
    };
    s.p = [](double, const Point &) -> double { return 0.0; };
    s.f = [shape, nu](double t, const Point &x) -> Vec2 {
        const double g = 1.0 + t;
        const Vec2 conv(std::sin(4 * pi * x.x()), std::sin(4 * pi * x.y()));
        return Vec2((1.0 + 8 * pi * pi * nu * g) * shape(x) + g * g * pi * conv);
    };
    s.u_linf = [](double t) { return 1.0 + t; };
    s.grad_linf = [](double t) { return 2 * pi * (1.0 + t); };
    return s;
}

ExactSolution exact_solution(const std::string &name, double nu)
{
    if (name == "lattice")
        return lattice_flow(nu);
    if (name == "potential")
        return potential_flow(nu);
    if (name == "rotation")
        return rigid_rotation(nu);
    if (name == "taylor-green")
        return forced_taylor_green(nu);
    throw ConfigError("unknown exact solution '" + name + "'");
}

} // namespace flowlab
