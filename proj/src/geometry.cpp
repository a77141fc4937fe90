#include "caplow/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace caplow::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

void validate(const SupportFunction& h) {
    if (h.n != 2 && h.n != 3)
        throw Error(ErrorCode::ValidationError, "dimension must be 2 or 3");
    if (h.grid_size() < 16)
        throw Error(ErrorCode::GridTooCoarse, "grid needs M >= 16 samples");
    for (double v : h.h)
        if (!(v > 0.0))
            throw Error(ErrorCode::ValidationError, "support function must be positive");
}

// Sample access with the grid's wrap rule: periodic for n=2, even
// reflection across theta = 0 and theta = pi for the n=3 midpoint grid.
double at(const SupportFunction& h, int i) {
    const int m = h.grid_size();
    if (h.n == 2) {
        i %= m;
        if (i < 0) i += m;
        return h.h[static_cast<std::size_t>(i)];
    }
    if (i < 0) i = -1 - i;
    if (i >= m) i = 2 * m - 1 - i;
    return h.h[static_cast<std::size_t>(i)];
}

} // namespace

double SupportFunction::spacing() const {
    return (n == 2 ? 2.0 * kPi : kPi) / static_cast<double>(h.size());
}

double SupportFunction::angle(int i) const {
    const double d = spacing();
    return n == 2 ? d * i : d * (i + 0.5);
}

Derivatives derivatives(const SupportFunction& h) {
    validate(h);
    const int m = h.grid_size();
    const double d = h.spacing();
    Derivatives out;
    out.d1.resize(m);
    out.d2.resize(m);
    for (int i = 0; i < m; ++i) {
        const double m2 = at(h, i - 2), m1 = at(h, i - 1);
        const double p1 = at(h, i + 1), p2 = at(h, i + 2);
        out.d1[i] = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * d);
        out.d2[i] = (-m2 + 16.0 * m1 - 30.0 * h.h[i] + 16.0 * p1 - p2) / (12.0 * d * d);
    }
    return out;
}

std::vector<double> sigma(const SupportFunction& h) {
    validate(h);
    const auto der = derivatives(h);
    const int m = h.grid_size();
    std::vector<double> out(m);
    double hmax = 0.0;
    for (double v : h.h) hmax = std::max(hmax, v);
    for (int i = 0; i < m; ++i) {
        const double radial_sum = der.d2[i] + h.h[i];
        if (h.n == 2) {
            out[i] = radial_sum;
        } else {
            const double theta = h.angle(i);
            out[i] = radial_sum * (der.d1[i] / std::tan(theta) + h.h[i]);
        }
    }
    const double tol = 1e-10 * std::pow(hmax, h.n - 1);
    for (double v : out)
        if (v <= tol)
            throw Error(ErrorCode::NonConvex, "principal curvature radius <= tolerance");
    return out;
}

std::vector<double> radial(const SupportFunction& h) {
    validate(h);
    const auto der = derivatives(h);
    std::vector<double> out(h.h.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::hypot(h.h[i], der.d1[i]);
    return out;
}

BoundarySample boundary(const SupportFunction& h) {
    (void)sigma(h); // reject non-convex bodies before reconstructing
    const auto der = derivatives(h);
    const int m = h.grid_size();
    BoundarySample out;
    out.n = h.n;
    out.points.resize(m);
    out.normals.resize(m);
    for (int i = 0; i < m; ++i) {
        const double theta = h.angle(i);
        const double c = std::cos(theta), s = std::sin(theta);
        if (h.n == 2) {
            // xi = (cos, sin), tangent = (-sin, cos)
            out.normals[i] = {c, s};
            out.points[i] = {der.d1[i] * -s + h.h[i] * c, der.d1[i] * c + h.h[i] * s};
        } else {
            // Meridian plane: xi = (sin, cos), tangent = (cos, -sin)
            out.normals[i] = {s, c};
            out.points[i] = {der.d1[i] * c + h.h[i] * s, -der.d1[i] * s + h.h[i] * c};
        }
    }
    return out;
}

double sphere_integral(std::span<const double> g, int n) {
    const int m = static_cast<int>(g.size());
    if (m == 0) return 0.0;
    if (n == 2) {
        double acc = 0.0;
        for (double v : g) acc += v;
        return acc * (2.0 * kPi / m);
    }
    const double d = kPi / m;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += g[i] * std::sin(d * (i + 0.5));
    return acc * 2.0 * kPi * d;
}

double functional_phi(const SupportFunction& h, const DataFunction& f,
                      const orlicz::PhiSpec& spec) {
    validate(h);
    if (f.f.size() != h.h.size())
        throw Error(ErrorCode::ValidationError, "data function grid mismatch");
    std::vector<double> integrand(h.h.size());
    for (std::size_t i = 0; i < integrand.size(); ++i)
        integrand[i] = orlicz::varphi_eval(spec, h.h[i]) / f.f[i];
    return sphere_integral(integrand, h.n);
}

double total_sp(const SupportFunction& h, std::span<const double> sigma_vals, double p) {
    validate(h);
    if (!(p > 1.0) || !(p < h.n))
        throw Error(ErrorCode::ExponentOutOfRange, "total_sp needs p in (1, n)");
    if (sigma_vals.size() != h.h.size())
        throw Error(ErrorCode::ValidationError, "sigma grid mismatch");
    std::vector<double> integrand(h.h.size());
    for (std::size_t i = 0; i < integrand.size(); ++i)
        integrand[i] = std::pow(h.h[i], 1.0 - p) * sigma_vals[i];
    return sphere_integral(integrand, h.n);
}

void write_support_csv(const std::filesystem::path& path, const SupportFunction& h) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ValidationError, "cannot open " + path.string());
    out << "theta,h\n";
    char buf[80];
    for (int i = 0; i < h.grid_size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.15g,%.15g\n", h.angle(i), h.h[i]);
        out << buf;
    }
}

SupportFunction read_support_csv(const std::filesystem::path& path, int n) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ValidationError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("theta,h", 0) != 0)
        throw Error(ErrorCode::ParseError, "expected header row 'theta,h'");
    SupportFunction h;
    h.n = n;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double theta, value;
        char comma;
        if (!(ss >> theta >> comma >> value) || comma != ',')
            throw Error(ErrorCode::ParseError, "bad CSV row: " + line);
        h.h.push_back(value);
    }
    validate(h);
    return h;
}

} // namespace caplow::geometry
