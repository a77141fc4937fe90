#include "caplow/plaplace.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace caplow::plaplace {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGaussPt = 0.57735026918962576451; // 1/sqrt(3)

double sq(double v) { return v * v; }

// Q1 reference element on [-1,1]^2, corners (-1,-1),(1,-1),(1,1),(-1,1).
void shape(double xi, double eta, double N[4]) {
    N[0] = 0.25 * (1 - xi) * (1 - eta);
    N[1] = 0.25 * (1 + xi) * (1 - eta);
    N[2] = 0.25 * (1 + xi) * (1 + eta);
    N[3] = 0.25 * (1 - xi) * (1 + eta);
}

void shape_grad(double xi, double eta, double dN[4][2]) {
    dN[0][0] = -0.25 * (1 - eta); dN[0][1] = -0.25 * (1 - xi);
    dN[1][0] = 0.25 * (1 - eta);  dN[1][1] = -0.25 * (1 + xi);
    dN[2][0] = 0.25 * (1 + eta);  dN[2][1] = 0.25 * (1 + xi);
    dN[3][0] = -0.25 * (1 + eta); dN[3][1] = 0.25 * (1 - xi);
}

struct QuadPointGeom {
    double detJ;
    double grad[4][2]; // physical gradients of the shape functions
    double pos[2];
};

// Geometry factors of one bilinear cell at one quadrature point.
QuadPointGeom qp_geometry(const std::array<std::array<double, 2>, 4>& x, double xi, double eta) {
    double N[4], dN[4][2];
    shape(xi, eta, N);
    shape_grad(xi, eta, dN);
    double J[2][2] = {{0, 0}, {0, 0}};
    QuadPointGeom out{};
    for (int c = 0; c < 4; ++c) {
        J[0][0] += x[c][0] * dN[c][0];
        J[0][1] += x[c][0] * dN[c][1];
        J[1][0] += x[c][1] * dN[c][0];
        J[1][1] += x[c][1] * dN[c][1];
        out.pos[0] += N[c] * x[c][0];
        out.pos[1] += N[c] * x[c][1];
    }
    out.detJ = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    const double inv = 1.0 / out.detJ;
    // physical gradient = J^{-T} * reference gradient
    for (int c = 0; c < 4; ++c) {
        out.grad[c][0] = (J[1][1] * dN[c][0] - J[1][0] * dN[c][1]) * inv;
        out.grad[c][1] = (-J[0][1] * dN[c][0] + J[0][0] * dN[c][1]) * inv;
    }
    return out;
}

double axis_weight(int n, double rho) { return n == 3 ? 2.0 * kPi * std::max(rho, 0.0) : 1.0; }

// ---------------------------------------------------------------------------
// Sparse scaffolding: CSR pattern over free dofs with precomputed write slots
// so Picard iterations update values in place.
// ---------------------------------------------------------------------------
struct System {
    int nfree = 0;
    std::vector<int> free_of_node;  // node -> free dof or -1
    std::vector<double> dir_value;  // node -> Dirichlet value (only where fixed)
    std::vector<int> outer;         // CSR row starts (size nfree+1)
    std::vector<int> inner;         // column indices
    std::vector<double> values;
    std::vector<std::array<int, 16>> cell_slots; // per cell: slot of pair (c,d), -1 if skipped
    std::vector<std::array<int, 2>> robin_edges; // node pairs on the outer sphere
    std::vector<std::array<int, 4>> edge_slots;  // slots for (A,A),(A,B),(B,A),(B,B)

    int slot(int r, int c) const {
        for (int k = outer[r]; k < outer[r + 1]; ++k)
            if (inner[k] == c) return k;
        return -1;
    }
};

System build_system(const ExteriorMesh& mesh, OuterBc bc) {
    System sys;
    const int nn = static_cast<int>(mesh.nodes.size());
    sys.free_of_node.assign(nn, -1);
    sys.dir_value.assign(nn, 0.0);
    const int top = mesh.layers - 1;
    for (int j = 0; j < mesh.cols; ++j) {
        sys.dir_value[mesh.node(0, j)] = 1.0;
        if (bc == OuterBc::Dirichlet) sys.dir_value[mesh.node(top, j)] = 0.0;
    }
    auto fixed = [&](int node) {
        const int layer = node / mesh.cols;
        return layer == 0 || (bc == OuterBc::Dirichlet && layer == top);
    };
    int nf = 0;
    for (int i = 0; i < nn; ++i)
        if (!fixed(i)) sys.free_of_node[i] = nf++;
    sys.nfree = nf;

    // Adjacency from cells, then CSR.
    std::vector<std::vector<int>> adj(nf);
    for (const auto& cell : mesh.cells) {
        for (int c = 0; c < 4; ++c) {
            const int fc = sys.free_of_node[cell[c]];
            if (fc < 0) continue;
            for (int d = 0; d < 4; ++d) {
                const int fd = sys.free_of_node[cell[d]];
                if (fd >= 0) adj[fc].push_back(fd);
            }
        }
    }
    sys.outer.assign(nf + 1, 0);
    for (int r = 0; r < nf; ++r) {
        auto& row = adj[r];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        sys.outer[r + 1] = sys.outer[r] + static_cast<int>(row.size());
    }
    sys.inner.resize(sys.outer.back());
    for (int r = 0; r < nf; ++r)
        std::copy(adj[r].begin(), adj[r].end(), sys.inner.begin() + sys.outer[r]);
    sys.values.assign(sys.inner.size(), 0.0);

    sys.cell_slots.resize(mesh.cells.size());
    for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
        for (int c = 0; c < 4; ++c) {
            for (int d = 0; d < 4; ++d) {
                const int fc = sys.free_of_node[mesh.cells[e][c]];
                const int fd = sys.free_of_node[mesh.cells[e][d]];
                sys.cell_slots[e][c * 4 + d] = (fc >= 0 && fd >= 0) ? sys.slot(fc, fd) : -1;
            }
        }
    }

    if (bc == OuterBc::Robin) {
        const int strips = mesh.periodic ? mesh.cols : mesh.cols - 1;
        for (int j = 0; j < strips; ++j) {
            const int a = mesh.node(top, j);
            const int b = mesh.node(top, (j + 1) % mesh.cols);
            sys.robin_edges.push_back({a, b});
            const int fa = sys.free_of_node[a], fb = sys.free_of_node[b];
            sys.edge_slots.push_back({sys.slot(fa, fa), sys.slot(fa, fb), sys.slot(fb, fa),
                                      sys.slot(fb, fb)});
        }
    }
    return sys;
}

std::array<std::array<double, 2>, 4> cell_coords(const ExteriorMesh& mesh,
                                                 const std::array<int, 4>& cell) {
    std::array<std::array<double, 2>, 4> x;
    for (int c = 0; c < 4; ++c) x[c] = mesh.nodes[cell[c]];
    return x;
}

// Frozen-coefficient stiffness and load for the current iterate.
void assemble(const ExteriorMesh& mesh, System& sys, const std::vector<double>& psi, double p,
              double eps2, double decay, std::vector<double>& b) {
    std::fill(sys.values.begin(), sys.values.end(), 0.0);
    b.assign(sys.nfree, 0.0);
    const double pw = 0.5 * (p - 2.0);
    for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
        const auto& cell = mesh.cells[e];
        const auto x = cell_coords(mesh, cell);
        double K[4][4] = {};
        for (int qx = 0; qx < 2; ++qx) {
            for (int qy = 0; qy < 2; ++qy) {
                const double xi = qx == 0 ? -kGaussPt : kGaussPt;
                const double eta = qy == 0 ? -kGaussPt : kGaussPt;
                const auto g = qp_geometry(x, xi, eta);
                double gp[2] = {0.0, 0.0};
                for (int c = 0; c < 4; ++c) {
                    gp[0] += psi[cell[c]] * g.grad[c][0];
                    gp[1] += psi[cell[c]] * g.grad[c][1];
                }
                const double w = std::pow(gp[0] * gp[0] + gp[1] * gp[1] + eps2, pw);
                const double scale = w * g.detJ * axis_weight(mesh.n, g.pos[0]);
                for (int c = 0; c < 4; ++c)
                    for (int d = c; d < 4; ++d) {
                        const double v =
                            scale * (g.grad[c][0] * g.grad[d][0] + g.grad[c][1] * g.grad[d][1]);
                        K[c][d] += v;
                        if (d != c) K[d][c] += v;
                    }
            }
        }
        for (int c = 0; c < 4; ++c) {
            const int fc = sys.free_of_node[cell[c]];
            if (fc < 0) continue;
            for (int d = 0; d < 4; ++d) {
                const int s = sys.cell_slots[e][c * 4 + d];
                if (s >= 0)
                    sys.values[s] += K[c][d];
                else
                    b[fc] -= K[c][d] * sys.dir_value[cell[d]];
            }
        }
    }

    // Robin closure on the outer sphere: flux model -w * decay * Psi / R_out
    // with w evaluated from the matched radial profile of the iterate.
    for (std::size_t e = 0; e < sys.robin_edges.size(); ++e) {
        const int A = sys.robin_edges[e][0], B = sys.robin_edges[e][1];
        const auto& xa = mesh.nodes[A];
        const auto& xb = mesh.nodes[B];
        const double len = std::hypot(xb[0] - xa[0], xb[1] - xa[1]);
        double K[2][2] = {};
        for (int q = 0; q < 2; ++q) {
            const double t = 0.5 + (q == 0 ? -0.5 : 0.5) * kGaussPt;
            const double sh[2] = {1.0 - t, t};
            const double rho = sh[0] * xa[0] + sh[1] * xb[0];
            const double rr = std::hypot(sh[0] * xa[0] + sh[1] * xb[0],
                                         sh[0] * xa[1] + sh[1] * xb[1]);
            const double val = sh[0] * psi[A] + sh[1] * psi[B];
            const double w = std::pow(sq(decay * val / rr) + eps2, pw);
            const double scale = w * (decay / rr) * len * 0.5 * axis_weight(mesh.n, rho);
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) K[c][d] += scale * sh[c] * sh[d];
        }
        const auto& s = sys.edge_slots[e];
        if (s[0] >= 0) sys.values[s[0]] += K[0][0];
        if (s[1] >= 0) sys.values[s[1]] += K[0][1];
        if (s[2] >= 0) sys.values[s[2]] += K[1][0];
        if (s[3] >= 0) sys.values[s[3]] += K[1][1];
    }
}

} // namespace

ExteriorMesh build_mesh(const geometry::BoundarySample& b, const MeshParams& params) {
    if (params.R_out_factor < 5.0)
        throw Error(ErrorCode::ValidationError, "R_out_factor must be >= 5");
    if (params.N_rad < 32)
        throw Error(ErrorCode::ValidationError, "N_rad must be >= 32");
    if (params.grading < 1.02 || params.grading > 1.2)
        throw Error(ErrorCode::ValidationError, "grading must lie in [1.02, 1.2]");
    const int m = static_cast<int>(b.points.size());
    if (m < 16) throw Error(ErrorCode::GridTooCoarse, "boundary needs >= 16 samples");

    ExteriorMesh mesh;
    mesh.n = b.n;
    mesh.periodic = b.n == 2;
    mesh.cols = b.n == 2 ? m : m + 2;
    mesh.layers = params.N_rad + 1;

    // Column anchors on the body and their outward ray directions. For n=3
    // the two axis columns close the meridian domain; the pole z-value comes
    // from the even (reflection) extension of the boundary curve.
    std::vector<std::array<double, 2>> start(mesh.cols), unit(mesh.cols);
    mesh.col_normal.resize(mesh.cols);
    mesh.sphere_col.resize(m);
    if (b.n == 2) {
        for (int j = 0; j < m; ++j) {
            start[j] = b.points[j];
            const double r = std::hypot(start[j][0], start[j][1]);
            unit[j] = {start[j][0] / r, start[j][1] / r};
            mesh.col_normal[j] = b.normals[j];
            mesh.sphere_col[j] = j;
        }
    } else {
        const double zn = (9.0 * b.points[0][1] - b.points[1][1]) / 8.0;
        const double zs = (9.0 * b.points[m - 1][1] - b.points[m - 2][1]) / 8.0;
        start[0] = {0.0, zn};
        unit[0] = {0.0, 1.0};
        mesh.col_normal[0] = {0.0, 1.0};
        start[mesh.cols - 1] = {0.0, zs};
        unit[mesh.cols - 1] = {0.0, -1.0};
        mesh.col_normal[mesh.cols - 1] = {0.0, -1.0};
        for (int i = 0; i < m; ++i) {
            start[i + 1] = b.points[i];
            const double r = std::hypot(start[i + 1][0], start[i + 1][1]);
            unit[i + 1] = {start[i + 1][0] / r, start[i + 1][1] / r};
            mesh.col_normal[i + 1] = b.normals[i];
            mesh.sphere_col[i] = i + 1;
        }
    }

    double rmax = 0.0;
    for (const auto& s : start) rmax = std::max(rmax, std::hypot(s[0], s[1]));
    mesh.R_out = params.R_out_factor * rmax;

    // Geometric layer fractions: spacing grows by `grading` away from the body.
    std::vector<double> frac(mesh.layers, 0.0);
    const double q = params.grading;
    const double d0 = (q - 1.0) / (std::pow(q, params.N_rad) - 1.0);
    for (int k = 1; k < mesh.layers; ++k) frac[k] = frac[k - 1] + d0 * std::pow(q, k - 1);
    frac[mesh.layers - 1] = 1.0;

    mesh.nodes.resize(static_cast<std::size_t>(mesh.cols) * mesh.layers);
    for (int k = 0; k < mesh.layers; ++k) {
        for (int j = 0; j < mesh.cols; ++j) {
            const double s = frac[k];
            mesh.nodes[mesh.node(k, j)] = {
                start[j][0] + s * (mesh.R_out * unit[j][0] - start[j][0]),
                start[j][1] + s * (mesh.R_out * unit[j][1] - start[j][1])};
        }
    }

    const int strips = mesh.periodic ? mesh.cols : mesh.cols - 1;
    mesh.cells.reserve(static_cast<std::size_t>(strips) * params.N_rad);
    for (int k = 0; k < params.N_rad; ++k) {
        for (int j = 0; j < strips; ++j) {
            const int jn = (j + 1) % mesh.cols;
            if (b.n == 2)
                mesh.cells.push_back({mesh.node(k, j), mesh.node(k + 1, j), mesh.node(k + 1, jn),
                                      mesh.node(k, jn)});
            else
                mesh.cells.push_back({mesh.node(k, j), mesh.node(k, jn), mesh.node(k + 1, jn),
                                      mesh.node(k + 1, j)});
        }
    }

    for (const auto& cell : mesh.cells) {
        const auto x = cell_coords(mesh, cell);
        for (int qx = 0; qx < 2; ++qx)
            for (int qy = 0; qy < 2; ++qy) {
                const double xi = qx == 0 ? -kGaussPt : kGaussPt;
                const double eta = qy == 0 ? -kGaussPt : kGaussPt;
                if (qp_geometry(x, xi, eta).detJ <= 0.0)
                    throw Error(ErrorCode::MeshFailure, "inverted cell in exterior mesh");
            }
    }
    return mesh;
}

PotentialSolution solve_exterior(const ExteriorMesh& mesh, double p, const SolveParams& params,
                                 const PotentialSolution* warm_start) {
    if (!(p > 1.0) || !(p < mesh.n))
        throw Error(ErrorCode::ExponentOutOfRange, "p must lie in (1, n)");

    PotentialSolution sol;
    sol.mesh = mesh;
    sol.p = p;
    sol.outer_bc = params.outer_bc;

    const double decay = (mesh.n - p) / (p - 1.0);
    double rmax_body = 0.0;
    for (int j = 0; j < mesh.cols; ++j) {
        const auto& s = mesh.nodes[mesh.node(0, j)];
        rmax_body = std::max(rmax_body, std::hypot(s[0], s[1]));
    }
    const double eps2 = sq(params.eps_reg / rmax_body);

    // Initial guess: per-column radial decay profile (exact for balls).
    std::vector<double> psi(mesh.nodes.size());
    if (warm_start && warm_start->psi.size() == psi.size()) {
        psi = warm_start->psi;
    } else {
        for (int k = 0; k < mesh.layers; ++k)
            for (int j = 0; j < mesh.cols; ++j) {
                const int id = mesh.node(k, j);
                const auto& s0 = mesh.nodes[mesh.node(0, j)];
                const double r0 = std::hypot(s0[0], s0[1]);
                const double r = std::hypot(mesh.nodes[id][0], mesh.nodes[id][1]);
                psi[id] = std::min(1.0, std::pow(r / r0, -decay));
            }
    }
    System sys = build_system(mesh, params.outer_bc);
    for (std::size_t i = 0; i < psi.size(); ++i)
        if (sys.free_of_node[i] < 0) psi[i] = sys.dir_value[i];

    std::vector<double> b;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;
    int solves = 0;
    double resid = 0.0;
    while (true) {
        assemble(mesh, sys, psi, p, eps2, decay, b);
        Eigen::Map<const Eigen::SparseMatrix<double>> amap(
            sys.nfree, sys.nfree, static_cast<int>(sys.inner.size()), sys.outer.data(),
            sys.inner.data(), sys.values.data());
        Eigen::SparseMatrix<double> A = amap;
        Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), sys.nfree);
        Eigen::VectorXd x(sys.nfree);
        for (std::size_t i = 0; i < psi.size(); ++i)
            if (sys.free_of_node[i] >= 0) x[sys.free_of_node[i]] = psi[i];
        resid = (A * x - rhs).norm() / rhs.norm();
        if (resid <= params.picard_tol) break;
        if (solves >= params.picard_max)
            throw Error(ErrorCode::NoConvergence,
                        "Picard residual " + std::to_string(resid) + " after " +
                            std::to_string(solves) + " solves");
        if (!analyzed) {
            ldlt.analyzePattern(A);
            analyzed = true;
        }
        ldlt.factorize(A);
        if (ldlt.info() != Eigen::Success)
            throw Error(ErrorCode::NoConvergence, "sparse factorization failed");
        Eigen::VectorXd xn = ldlt.solve(rhs);
        for (std::size_t i = 0; i < psi.size(); ++i)
            if (sys.free_of_node[i] >= 0) psi[i] = xn[sys.free_of_node[i]];
        ++solves;
    }

    // Discrete comparison principle: values must sit in [0,1] up to solver
    // noise; anything larger signals a broken solve.
    double lo = 0.0, hi = 1.0;
    for (double v : psi) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo < -1e-8 || hi > 1.0 + 1e-8)
        throw Error(ErrorCode::NoConvergence, "potential violates the comparison principle");
    for (double& v : psi) v = std::clamp(v, 0.0, 1.0);

    sol.psi = std::move(psi);
    sol.iterations = solves;
    sol.residual_norm = resid;
    sol.boundary_grad = boundary_gradient(sol);
    sol.capacity_energy = capacity_energy(sol, p);
    return sol;
}

std::vector<double> boundary_gradient(const PotentialSolution& sol) {
    const ExteriorMesh& mesh = sol.mesh;
    std::vector<double> g(mesh.sphere_col.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const int j = mesh.sphere_col[i];
        const auto& x0 = mesh.nodes[mesh.node(0, j)];
        const auto& x1 = mesh.nodes[mesh.node(1, j)];
        const auto& x2 = mesh.nodes[mesh.node(2, j)];
        const double a = std::hypot(x1[0] - x0[0], x1[1] - x0[1]);
        const double c = std::hypot(x2[0] - x0[0], x2[1] - x0[1]);
        const double p0 = sol.psi[mesh.node(0, j)];
        const double p1 = sol.psi[mesh.node(1, j)];
        const double p2 = sol.psi[mesh.node(2, j)];
        const double slope =
            -(a + c) / (a * c) * p0 + c / (a * (c - a)) * p1 - a / (c * (c - a)) * p2;
        const double dir[2] = {(x1[0] - x0[0]) / a, (x1[1] - x0[1]) / a};
        const double cosang =
            dir[0] * mesh.col_normal[j][0] + dir[1] * mesh.col_normal[j][1];
        g[i] = -slope / cosang;
    }
    return g;
}

double capacity_energy(const PotentialSolution& sol, double p) {
    const ExteriorMesh& mesh = sol.mesh;
    double energy = 0.0;
    for (const auto& cell : mesh.cells) {
        const auto x = cell_coords(mesh, cell);
        for (int qx = 0; qx < 2; ++qx)
            for (int qy = 0; qy < 2; ++qy) {
                const double xi = qx == 0 ? -kGaussPt : kGaussPt;
                const double eta = qy == 0 ? -kGaussPt : kGaussPt;
                const auto g = qp_geometry(x, xi, eta);
                double gp[2] = {0.0, 0.0};
                for (int c = 0; c < 4; ++c) {
                    gp[0] += sol.psi[cell[c]] * g.grad[c][0];
                    gp[1] += sol.psi[cell[c]] * g.grad[c][1];
                }
                energy += std::pow(gp[0] * gp[0] + gp[1] * gp[1], 0.5 * p) * g.detJ *
                          axis_weight(mesh.n, g.pos[0]);
            }
    }
    if (sol.outer_bc == OuterBc::Robin) {
        // Far-field tail: the capacity of the matched radial profile beyond
        // R_out; integrand against the sphere measure is v^p beta^(p-1) R_out^(n-p).
        const double beta = (mesh.n - p) / (p - 1.0);
        std::vector<double> vp(mesh.sphere_col.size());
        const int top = mesh.layers - 1;
        for (std::size_t i = 0; i < vp.size(); ++i)
            vp[i] = std::pow(sol.psi[mesh.node(top, mesh.sphere_col[i])], p);
        energy += std::pow(beta, p - 1.0) * std::pow(mesh.R_out, mesh.n - p) *
                  geometry::sphere_integral(vp, mesh.n);
    }
    return energy;
}

double capacity_poincare(const geometry::SupportFunction& h, std::span<const double> g,
                         std::span<const double> sigma_vals, double p) {
    if (!(p > 1.0) || !(p < h.n))
        throw Error(ErrorCode::ExponentOutOfRange, "p must lie in (1, n)");
    if (g.size() != h.h.size() || sigma_vals.size() != h.h.size())
        throw Error(ErrorCode::ValidationError, "capacity_poincare: sample size mismatch");
    std::vector<double> integrand(h.h.size());
    for (std::size_t i = 0; i < integrand.size(); ++i)
        integrand[i] = h.h[i] * std::pow(g[i], p) * sigma_vals[i];
    return (p - 1.0) / (h.n - p) * geometry::sphere_integral(integrand, h.n);
}

double sphere_area(int n) { return n == 2 ? 2.0 * kPi : 4.0 * kPi; }

double RadialPotential::value(double r) const { return std::pow(r / R, -decay_exponent()); }

double RadialPotential::gradient_at_boundary() const { return decay_exponent() / R; }

double RadialPotential::capacity() const {
    return sphere_area(n) * std::pow(decay_exponent(), p - 1.0) * std::pow(R, n - p);
}

RadialPotential radial_potential(int n, double p, double R) {
    if (!(p > 1.0) || !(p < n))
        throw Error(ErrorCode::ExponentOutOfRange, "p must lie in (1, n)");
    if (!(R > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "radius must be positive");
    return RadialPotential{n, p, R};
}

std::vector<double> mu_p_density(std::span<const double> g, std::span<const double> sigma_vals,
                                 double p) {
    if (g.size() != sigma_vals.size())
        throw Error(ErrorCode::ValidationError, "mu_p_density: sample size mismatch");
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(g[i], p) * sigma_vals[i];
    return out;
}

double evaluate(const PotentialSolution& sol, std::array<double, 2> x) {
    const ExteriorMesh& mesh = sol.mesh;
    for (const auto& cell : mesh.cells) {
        const auto xc = cell_coords(mesh, cell);
        double xlo = xc[0][0], xhi = xc[0][0], ylo = xc[0][1], yhi = xc[0][1];
        for (int c = 1; c < 4; ++c) {
            xlo = std::min(xlo, xc[c][0]);
            xhi = std::max(xhi, xc[c][0]);
            ylo = std::min(ylo, xc[c][1]);
            yhi = std::max(yhi, xc[c][1]);
        }
        const double pad = 1e-12 + 1e-9 * (xhi - xlo + yhi - ylo);
        if (x[0] < xlo - pad || x[0] > xhi + pad || x[1] < ylo - pad || x[1] > yhi + pad)
            continue;
        // Invert the bilinear map by Newton from the cell centre.
        double xi = 0.0, eta = 0.0;
        bool ok = false;
        for (int it = 0; it < 30; ++it) {
            double N[4], dN[4][2];
            shape(xi, eta, N);
            shape_grad(xi, eta, dN);
            double rx = -x[0], ry = -x[1];
            double J[2][2] = {{0, 0}, {0, 0}};
            for (int c = 0; c < 4; ++c) {
                rx += N[c] * xc[c][0];
                ry += N[c] * xc[c][1];
                J[0][0] += xc[c][0] * dN[c][0];
                J[0][1] += xc[c][0] * dN[c][1];
                J[1][0] += xc[c][1] * dN[c][0];
                J[1][1] += xc[c][1] * dN[c][1];
            }
            const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
            const double dxi = (J[1][1] * rx - J[0][1] * ry) / det;
            const double deta = (-J[1][0] * rx + J[0][0] * ry) / det;
            xi -= dxi;
            eta -= deta;
            if (std::abs(dxi) + std::abs(deta) < 1e-13) {
                ok = true;
                break;
            }
        }
        if (ok && std::abs(xi) <= 1.0 + 1e-8 && std::abs(eta) <= 1.0 + 1e-8) {
            double N[4];
            shape(std::clamp(xi, -1.0, 1.0), std::clamp(eta, -1.0, 1.0), N);
            double v = 0.0;
            for (int c = 0; c < 4; ++c) v += N[c] * sol.psi[cell[c]];
            return v;
        }
    }
    if (std::hypot(x[0], x[1]) < mesh.R_out * (1.0 - 1e-9))
        throw Error(ErrorCode::ProbeInsideBody, "probe point lies inside the body");
    throw Error(ErrorCode::ValidationError, "probe point outside the truncated domain");
}

void dump_csv(const std::filesystem::path& path, const PotentialSolution& sol) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ValidationError, "cannot open " + path.string());
    out << "rho,z_or_theta,layer,psi\n";
    const ExteriorMesh& mesh = sol.mesh;
    char buf[120];
    for (int k = 0; k < mesh.layers; ++k) {
        for (int j = 0; j < mesh.cols; ++j) {
            const auto& xp = mesh.nodes[mesh.node(k, j)];
            double rho, second;
            if (mesh.n == 2) {
                rho = std::hypot(xp[0], xp[1]);
                second = std::atan2(xp[1], xp[0]);
                if (second < 0.0) second += 2.0 * kPi;
            } else {
                rho = xp[0];
                second = xp[1];
            }
            std::snprintf(buf, sizeof(buf), "%.15g,%.15g,%d,%.15g\n", rho, second, k,
                          sol.psi[mesh.node(k, j)]);
            out << buf;
        }
    }
}

PotentialSolution solve_body(const geometry::SupportFunction& h, double p,
                             const MeshParams& mesh_params, const SolveParams& solve_params,
                             const PotentialSolution* warm_start) {
    const auto sig = geometry::sigma(h);
    const auto bnd = geometry::boundary(h);
    const auto mesh = build_mesh(bnd, mesh_params);
    PotentialSolution sol = solve_exterior(mesh, p, solve_params, warm_start);
    sol.capacity_poincare = capacity_poincare(h, sol.boundary_grad, sig, p);
    return sol;
}

} // namespace caplow::plaplace
