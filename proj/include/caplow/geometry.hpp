// Support-function representation of convex bodies on a 1-D spherical grid,
// differential operators, curvature, quadrature, and body reconstruction.
//
// Grid convention:
//   n = 2: theta_i = 2*pi*i/M on [0, 2*pi), periodic.
//   n = 3: theta_i = pi*(i+1/2)/M on (0, pi), meridian angle from the pole,
//          axisymmetric body; even reflection across both poles.
#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "caplow/errors.hpp"
#include "caplow/orlicz.hpp"

namespace caplow::geometry {

struct SupportFunction {
    int n = 2;
    std::vector<double> h;

    int grid_size() const { return static_cast<int>(h.size()); }
    double spacing() const;
    double angle(int i) const;
};

struct DataFunction {
    int n = 2;
    std::vector<double> f;
};

// Boundary points F_i with outward normals xi_i, indexed like the sphere
// grid. Coordinates: n=2 the plane (x, y); n=3 the meridian half-plane
// (rho, z) with the z-axis the symmetry axis.
struct BoundarySample {
    int n = 2;
    std::vector<std::array<double, 2>> points;
    std::vector<std::array<double, 2>> normals;
};

struct Derivatives {
    std::vector<double> d1;
    std::vector<double> d2;
};

// 4th-order central differences; n=2 periodic, n=3 with even reflection
// across the poles. Throws GridTooCoarse when M < 16.
Derivatives derivatives(const SupportFunction& h);

// Product of principal curvature radii sigma_{n-1}:
//   n=2: h'' + h
//   n=3: (h'' + h) * (h' cot(theta) + h)   (axisymmetric)
// Throws NonConvex when min sigma <= 1e-10 * (max h)^(n-1).
std::vector<double> sigma(const SupportFunction& h);

// Radial function samples r_i = sqrt(h_i^2 + h_i'^2).
std::vector<double> radial(const SupportFunction& h);

// Inverse Gauss map F_i = grad h + h xi evaluated on the grid.
BoundarySample boundary(const SupportFunction& h);

// Quadrature over the sphere grid:
//   n=2: (2*pi/M) sum g_i            (periodic trapezoid)
//   n=3: 2*pi*(pi/M) sum g_i sin(theta_i)   (midpoint)
double sphere_integral(std::span<const double> g, int n);

// Conserved flow functional: integral of varphi(h)/f over the sphere.
double functional_phi(const SupportFunction& h, const DataFunction& f,
                      const orlicz::PhiSpec& spec);

// Total mass of the p-surface area measure: integral of h^(1-p) sigma.
double total_sp(const SupportFunction& h, std::span<const double> sigma_vals, double p);

// CSV "theta,h" serialization (header row required).
void write_support_csv(const std::filesystem::path& path, const SupportFunction& h);
SupportFunction read_support_csv(const std::filesystem::path& path, int n);

} // namespace caplow::geometry
