#include "caplow/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace caplow::orlicz {

namespace {

// Fritsch-Carlson monotone cubic (PCHIP) slopes. Shape-preserving: the
// interpolant stays within the local data range, so positive samples give a
// positive interpolant.
std::vector<double> pchip_slopes(const std::vector<std::pair<double, double>>& pts) {
    const std::size_t n = pts.size();
    std::vector<double> d(n, 0.0);
    if (n == 1) return d;
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = pts[i + 1].first - pts[i].first;
        delta[i] = (pts[i + 1].second - pts[i].second) / h[i];
    }
    if (n == 2) {
        d[0] = d[1] = delta[0];
        return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // One-sided endpoint slopes, clamped to preserve shape.
    auto endpoint = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0)
            s = 0.0;
        else if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0))
            s = 3.0 * d0;
        return s;
    };
    d[0] = endpoint(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return d;
}

double pchip_eval(const std::vector<std::pair<double, double>>& pts,
                  const std::vector<double>& slopes, double s) {
    auto it = std::upper_bound(pts.begin(), pts.end(), s,
                               [](double v, const auto& p) { return v < p.first; });
    std::size_t i = it == pts.begin() ? 0 : static_cast<std::size_t>(it - pts.begin()) - 1;
    if (i + 1 >= pts.size()) i = pts.size() - 2;
    const double h = pts[i + 1].first - pts[i].first;
    const double t = (s - pts[i].first) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * pts[i].second + h10 * h * slopes[i] + h01 * pts[i + 1].second +
           h11 * h * slopes[i + 1];
}

// Local power exponent of phi near zero, fitted from the first two table
// samples; decides integrability of 1/phi at the origin.
double near_zero_exponent(const PhiSpec& spec) {
    const auto& p0 = spec.samples[0];
    const auto& p1 = spec.samples[1];
    return std::log(p1.second / p0.second) / std::log(p1.first / p0.first);
}

// Adaptive Simpson on [a,b] for a positive integrand.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

PhiSpec PhiSpec::table(std::vector<std::pair<double, double>> samples, double domain_floor) {
    if (samples.size() < 2)
        throw Error(ErrorCode::ValidationError, "table family needs at least 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].first <= 0.0)
            throw Error(ErrorCode::NonPositiveArgument, "table abscissae must be positive");
        if (samples[i].second <= 0.0)
            throw Error(ErrorCode::ValidationError, "phi samples must be positive");
        if (i > 0 && samples[i].first <= samples[i - 1].first)
            throw Error(ErrorCode::ValidationError, "table abscissae must be increasing");
    }
    PhiSpec spec;
    spec.family = Family::Table;
    spec.samples = std::move(samples);
    spec.domain_floor = domain_floor;
    return spec;
}

double phi_eval(const PhiSpec& spec, double s) {
    if (!(s > 0.0))
        throw Error(ErrorCode::NonPositiveArgument, "phi requires s > 0");
    if (spec.family == PhiSpec::Family::Power) {
        return std::pow(s, 1.0 - spec.power_exponent);
    }
    const double lo = spec.samples.front().first;
    const double hi = spec.samples.back().first;
    if (s < lo * (1.0 - 1e-12) || s > hi * (1.0 + 1e-12))
        throw Error(ErrorCode::OutOfTableRange,
                    "s outside table hull [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    const auto slopes = pchip_slopes(spec.samples);
    return pchip_eval(spec.samples, slopes, std::clamp(s, lo, hi));
}

double varphi_eval(const PhiSpec& spec, double s) {
    if (!(s > 0.0))
        throw Error(ErrorCode::NonPositiveArgument, "varphi requires s > 0");
    if (spec.family == PhiSpec::Family::Power) {
        const double pp = spec.power_exponent;
        if (pp <= 0.0)
            throw Error(ErrorCode::DivergentAntiderivative,
                        "int_0^s t^(pp-1) dt diverges at 0 for pp <= 0");
        return std::pow(s, pp) / pp;
    }

    const double s_first = spec.samples.front().first;
    const double s_last = spec.samples.back().first;
    if (s > s_last * (1.0 + 1e-12))
        throw Error(ErrorCode::OutOfTableRange, "varphi argument beyond table hull");

    // Below the first sample phi is extended by the power law fitted to the
    // first two samples: phi(t) ~ phi(s1) (t/s1)^alpha. The 0-end piece of
    // the integral then has the closed form s1 / (phi(s1) (1 - alpha)) and
    // converges iff alpha < 1.
    const double alpha = near_zero_exponent(spec);
    if (alpha >= 1.0 - 1e-9)
        throw Error(ErrorCode::DivergentAntiderivative,
                    "1/phi is not integrable at 0 (near-zero exponent " + std::to_string(alpha) + ")");
    const double phi1 = spec.samples.front().second;
    auto tail = [&](double upper) {
        return upper / (phi1 * std::pow(upper / s_first, alpha) * (1.0 - alpha)) * 1.0;
    };

    const auto slopes = pchip_slopes(spec.samples);
    auto inv_phi = [&](double t) {
        if (t <= s_first) return std::pow(t / s_first, -alpha) / phi1;
        return 1.0 / pchip_eval(spec.samples, slopes, std::min(t, s_last));
    };

    if (s <= s_first) return tail(s);
    const double head = tail(s_first);
    const double body = integrate(inv_phi, s_first, s, 1e-10 * (head + 1.0));
    return head + body;
}

GrowthReport check_growth(const PhiSpec& spec) {
    GrowthReport out;
    std::ostringstream rep;
    rep << "growth heuristic: varphi probed at domain_floor, 1, and S "
           "(asymptotic divergence cannot be decided from finitely many samples). ";
    double at_floor = 0.0, at_one = 0.0, at_big = 0.0;
    double big = 1e6;
    if (spec.family == PhiSpec::Family::Table)
        big = std::min(big, spec.samples.back().first);
    try {
        at_floor = varphi_eval(spec, spec.domain_floor);
        const double one = std::min(1.0, big);
        at_one = varphi_eval(spec, one);
        at_big = varphi_eval(spec, big);
    } catch (const Error& err) {
        out.ok = false;
        rep << "probe failed: " << err.what();
        out.report = rep.str();
        return out;
    }
    const bool unbounded = at_big > 10.0 * at_one;
    out.ok = unbounded && std::isfinite(at_floor);
    rep << "varphi(" << spec.domain_floor << ") = " << at_floor << ", varphi(1) = " << at_one
        << ", varphi(" << big << ") = " << at_big << "; unbounded heuristic (ratio > 10): "
        << (unbounded ? "yes" : "no");
    out.report = rep.str();
    return out;
}

bool check_uniqueness_condition(const PhiSpec& spec, double p, int n,
                                std::span<const double> deltas,
                                std::span<const double> svals) {
    if (!(p > 1.0) || !(p <= n - 1.0))
        throw Error(ErrorCode::ExponentOutOfRange, "uniqueness condition needs p in (1, n-1]");
    for (double delta : deltas) {
        if (delta < 1.0)
            throw Error(ErrorCode::ValidationError, "deltas must be >= 1");
        for (double s : svals) {
            const double lhs = phi_eval(spec, delta * s);
            const double rhs = std::pow(delta, p + 1.0 - n) * phi_eval(spec, s);
            if (lhs > rhs * (1.0 + 1e-12)) return false;
        }
    }
    return true;
}

double orlicz_norm(std::span<const double> fvals, std::span<const double> weights,
                   const PhiSpec& spec) {
    if (fvals.size() != weights.size())
        throw Error(ErrorCode::ValidationError, "orlicz_norm: size mismatch");
    double total = 0.0, fmax = 0.0;
    for (std::size_t i = 0; i < fvals.size(); ++i) {
        total += weights[i];
        if (weights[i] > 0.0) fmax = std::max(fmax, fvals[i]);
    }
    if (!(total > 0.0)) throw Error(ErrorCode::EmptyMeasure, "weights sum to zero");
    if (fmax == 0.0) return 0.0;

    const double target = varphi_eval(spec, 1.0);
    // Weighted mean of varphi(f/lambda); strictly decreasing in lambda.
    auto mean_varphi = [&](double lambda) {
        double acc = 0.0;
        for (std::size_t i = 0; i < fvals.size(); ++i) {
            if (weights[i] == 0.0 || fvals[i] == 0.0) continue;
            acc += weights[i] * varphi_eval(spec, fvals[i] / lambda);
        }
        return acc / total;
    };

    double lo = fmax * 1e-8;
    double hi = fmax * (1.0 + 1e-8);
    // Expand geometrically until [lo, hi] brackets the root.
    for (int k = 0; k < 200 && mean_varphi(hi) > target; ++k) hi *= 2.0;
    for (int k = 0; k < 200 && mean_varphi(lo) < target; ++k) lo *= 0.5;
    for (int k = 0; k < 200 && (hi - lo) > 1e-10 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (mean_varphi(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace caplow::orlicz
