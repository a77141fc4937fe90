// Orlicz density functions phi, their antiderivatives, growth/uniqueness
// predicates, and the Orlicz norm.
//
// Notation used throughout: phi(s) is the density weighting the Minkowski
// equation; varphi(s) = int_0^s dt/phi(t) is its antiderivative, the kernel
// of the flow's conserved functional and the Young-type function of the
// Orlicz norm.
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "caplow/errors.hpp"

namespace caplow::orlicz {

struct PhiSpec {
    enum class Family { Power, Table };

    Family family = Family::Power;
    // Power family: phi(s) = s^(1 - power_exponent).
    double power_exponent = 1.0;
    // Table family: (s, phi(s)) samples with strictly increasing s > 0,
    // interpolated by a shape-preserving monotone cubic.
    std::vector<std::pair<double, double>> samples;
    // Smallest s at which phi is meant to be evaluated by callers.
    double domain_floor = 1e-8;

    static PhiSpec power(double pp) {
        PhiSpec spec;
        spec.family = Family::Power;
        spec.power_exponent = pp;
        return spec;
    }

    static PhiSpec table(std::vector<std::pair<double, double>> samples,
                         double domain_floor = 1e-8);
};

// phi(s). Power family is exact; table family uses monotone cubic
// interpolation inside the sample hull.
double phi_eval(const PhiSpec& spec, double s);

// varphi(s) = int_0^s dt/phi(t). Closed form s^pp/pp for the power family
// with pp > 0; adaptive quadrature (relative tolerance 1e-10) for tables.
// Throws DivergentAntiderivative when the integral does not converge at 0.
double varphi_eval(const PhiSpec& spec, double s);

struct GrowthReport {
    bool ok = false;
    std::string report;
};

// Finite heuristic for "varphi exists and varphi(s) -> infinity": checks
// existence at domain_floor and varphi(S) > 10*varphi(1) at S = 1e6 (capped
// at the table hull). The asymptotic condition cannot be decided from
// samples; the report says which probes ran.
GrowthReport check_growth(const PhiSpec& spec);

// True iff phi(delta*s) <= delta^(p+1-n) * phi(s) * (1 + 1e-12) for every
// sampled (delta, s) pair. Requires p in (1, n-1].
bool check_uniqueness_condition(const PhiSpec& spec, double p, int n,
                                std::span<const double> deltas,
                                std::span<const double> svals);

// Orlicz norm of nonnegative samples f against discrete weights:
// the lambda solving (1/|mu|) sum_i w_i varphi(f_i/lambda) = varphi(1),
// found by bisection to relative tolerance 1e-10. Returns 0 when f vanishes
// on the support of the weights. Throws EmptyMeasure when sum w = 0.
double orlicz_norm(std::span<const double> fvals, std::span<const double> weights,
                   const PhiSpec& spec);

} // namespace caplow::orlicz
