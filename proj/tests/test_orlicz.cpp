#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "caplow/orlicz.hpp"

using namespace caplow;
using orlicz::PhiSpec;

namespace {

// Table sampled from the power density phi(s) = s^-1 (pp = 2) on [0.05, 20].
PhiSpec power2_table(int count = 200) {
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < count; ++i) {
        const double s = 0.05 * std::pow(20.0 / 0.05, i / static_cast<double>(count - 1));
        samples.emplace_back(s, 1.0 / s);
    }
    return PhiSpec::table(std::move(samples));
}

} // namespace

TEST_CASE("phi_eval: power family closed forms") {
    CHECK(orlicz::phi_eval(PhiSpec::power(2.0), 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(orlicz::phi_eval(PhiSpec::power(0.0), 3.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(orlicz::phi_eval(PhiSpec::power(1.0), 7.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("phi_eval: domain errors") {
    CHECK_THROWS_WITH_AS(orlicz::phi_eval(PhiSpec::power(2.0), 0.0), doctest::Contains("s > 0"),
                         Error);
    CHECK_THROWS_AS(orlicz::phi_eval(PhiSpec::power(2.0), -1.0), Error);
    const auto table = power2_table();
    CHECK_THROWS_AS(orlicz::phi_eval(table, 1e-3), Error);
    CHECK_THROWS_AS(orlicz::phi_eval(table, 100.0), Error);
    try {
        orlicz::phi_eval(table, 100.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfTableRange);
    }
}

TEST_CASE("phi_eval: table interpolation tracks the sampled density") {
    const auto table = power2_table();
    for (double s : {0.07, 0.4, 1.3, 7.7, 19.0})
        CHECK(orlicz::phi_eval(table, s) == doctest::Approx(1.0 / s).epsilon(5e-4));
}

TEST_CASE("varphi_eval: power closed forms") {
    CHECK(orlicz::varphi_eval(PhiSpec::power(2.0), 3.0) == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(orlicz::varphi_eval(PhiSpec::power(1.0), 5.0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(orlicz::varphi_eval(PhiSpec::power(0.5), 4.0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("varphi_eval: divergent antiderivative for pp <= 0") {
    for (double pp : {0.0, -1.0}) {
        try {
            orlicz::varphi_eval(PhiSpec::power(pp), 1.0);
            FAIL("expected DivergentAntiderivative");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DivergentAntiderivative);
        }
    }
}

TEST_CASE("varphi_eval: table quadrature matches the closed form") {
    const auto table = power2_table(400);
    for (double s : {0.5, 1.0, 3.0, 10.0}) {
        // oracle: int_0^s t dt = s^2/2 for the sampled density 1/t
        CHECK(orlicz::varphi_eval(table, s) == doctest::Approx(0.5 * s * s).epsilon(2e-4));
    }
}

TEST_CASE("varphi monotonicity property") {
    const auto spec = PhiSpec::power(1.7);
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(0.01, 50.0);
    for (int k = 0; k < 200; ++k) {
        double s1 = dist(rng), s2 = dist(rng);
        if (s1 > s2) std::swap(s1, s2);
        if (s1 == s2) continue;
        CHECK(orlicz::varphi_eval(spec, s1) < orlicz::varphi_eval(spec, s2));
    }
}

TEST_CASE("check_growth heuristic") {
    CHECK(orlicz::check_growth(PhiSpec::power(2.0)).ok);
    CHECK(orlicz::check_growth(PhiSpec::power(0.5)).ok);
    const auto bad = orlicz::check_growth(PhiSpec::power(-1.0));
    CHECK_FALSE(bad.ok);
    CHECK(bad.report.find("DivergentAntiderivative") != std::string::npos);
}

TEST_CASE("uniqueness condition: spec examples") {
    const std::vector<double> deltas{1.0, 1.5, 2.0, 4.0};
    const std::vector<double> svals{0.1, 0.5, 1.0, 2.0};
    CHECK(orlicz::check_uniqueness_condition(PhiSpec::power(1.0), 2.0, 3, deltas, svals));
    CHECK(orlicz::check_uniqueness_condition(PhiSpec::power(2.0), 2.0, 3, deltas, svals));
    CHECK_FALSE(orlicz::check_uniqueness_condition(PhiSpec::power(0.5), 2.0, 3, deltas, svals));
}

TEST_CASE("uniqueness condition: p out of range") {
    const std::vector<double> one{1.0};
    try {
        orlicz::check_uniqueness_condition(PhiSpec::power(2.0), 1.5, 2, one, one);
        FAIL("expected ExponentOutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ExponentOutOfRange);
    }
}

TEST_CASE("uniqueness condition agrees with pp >= n-p on a 20x20 grid") {
    std::vector<double> deltas(20), svals(20);
    for (int i = 0; i < 20; ++i) {
        deltas[i] = 1.0 + 3.0 * i / 19.0;
        svals[i] = 0.05 * std::pow(100.0, i / 19.0);
    }
    const double p = 2.0;
    const int n = 3;
    for (double pp : {-1.0, 0.0, 0.5, 0.9, 0.999, 1.0, 1.5, 2.0, 3.0}) {
        const bool expect = pp >= n - p;
        CHECK_MESSAGE(orlicz::check_uniqueness_condition(PhiSpec::power(pp), p, n, deltas,
                                                         svals) == expect,
                      "pp = " << pp);
    }
}

TEST_CASE("orlicz_norm: constant samples") {
    const auto spec = PhiSpec::power(2.0);
    std::vector<double> f(17, 3.25), w(17, 0.3);
    CHECK(orlicz::orlicz_norm(f, w, spec) == doctest::Approx(3.25).epsilon(1e-9));
}

TEST_CASE("orlicz_norm: doubling the samples doubles the norm") {
    const auto spec = PhiSpec::power(1.5);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 4.0);
    std::vector<double> f(40), f2(40), w(40);
    for (int i = 0; i < 40; ++i) {
        f[i] = dist(rng);
        f2[i] = 2.0 * f[i];
        w[i] = 0.1 + dist(rng);
    }
    const double base = orlicz::orlicz_norm(f, w, spec);
    CHECK(orlicz::orlicz_norm(f2, w, spec) == doctest::Approx(2.0 * base).epsilon(1e-9));
}

TEST_CASE("orlicz_norm: |cos| on the uniform circle grid") {
    const int m = 256;
    const auto spec = PhiSpec::power(1.0); // varphi(s) = s
    std::vector<double> f(m), w(m, 1.0);
    for (int i = 0; i < m; ++i) f[i] = std::abs(std::cos(2.0 * std::numbers::pi * i / m));
    // With varphi(s) = s the norm equals the weighted mean of f; the discrete
    // mean approximates 2/pi (independent quadrature oracle).
    double mean = 0.0;
    for (double v : f) mean += v / m;
    const double norm = orlicz::orlicz_norm(f, w, spec);
    CHECK(norm == doctest::Approx(mean).epsilon(1e-9));
    CHECK(norm == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("orlicz_norm: empty measure and zero samples") {
    const auto spec = PhiSpec::power(2.0);
    std::vector<double> f{1.0, 2.0}, w0{0.0, 0.0};
    try {
        orlicz::orlicz_norm(f, w0, spec);
        FAIL("expected EmptyMeasure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyMeasure);
    }
    std::vector<double> z{0.0, 0.0}, w{1.0, 1.0};
    CHECK(orlicz::orlicz_norm(z, w, spec) == 0.0);
}

TEST_CASE("orlicz_norm properties: homogeneity and monotonicity, 100 random vectors") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> val(0.0, 5.0);
    std::uniform_real_distribution<double> wgt(0.01, 2.0);
    for (const double pp : {0.7, 1.0, 2.0}) {
        const auto spec = PhiSpec::power(pp);
        for (int trial = 0; trial < 100; ++trial) {
            const int m = 8 + static_cast<int>(rng() % 40);
            std::vector<double> f(m), g(m), w(m);
            for (int i = 0; i < m; ++i) {
                f[i] = val(rng);
                g[i] = f[i] + val(rng); // g >= f pointwise
                w[i] = wgt(rng);
            }
            const double nf = orlicz::orlicz_norm(f, w, spec);
            const double ng = orlicz::orlicz_norm(g, w, spec);
            CHECK(nf <= ng * (1.0 + 1e-9));
            for (double c : {0.5, 1.0, 3.0}) {
                std::vector<double> cf(m);
                for (int i = 0; i < m; ++i) cf[i] = c * f[i];
                const double ncf = orlicz::orlicz_norm(cf, w, spec);
                if (nf > 0.0) CHECK(ncf == doctest::Approx(c * nf).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("phi positivity on accepted specs") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(1e-6, 30.0);
    for (double pp : {-0.5, 0.0, 0.8, 2.5}) {
        const auto spec = PhiSpec::power(pp);
        for (int k = 0; k < 100; ++k) CHECK(orlicz::phi_eval(spec, dist(rng)) > 0.0);
    }
    const auto table = power2_table();
    std::uniform_real_distribution<double> hull(0.05, 20.0);
    for (int k = 0; k < 100; ++k) CHECK(orlicz::phi_eval(table, hull(rng)) > 0.0);
}
