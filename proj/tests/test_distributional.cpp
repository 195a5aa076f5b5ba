#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rbm/distributional.hpp"
#include "rbm/model.hpp"
#include "rbm/poisson.hpp"
#include "rbm/quad.hpp"

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const rbm::RbmParams& p12() {
    static rbm::RbmParams p(1.0, 2.0);
    return p;
}

// integral of m(u, .) over [a, b], splitting at the v = u crease
double kernel_integral(double u, double a, double b,
                       const rbm::QuadSpec& spec) {
    if (a < u && u < b) {
        return rbm::integrate([u](double v) { return rbm::kernel(u, v); }, a,
                              u, spec)
                   .value +
               rbm::integrate([u](double v) { return rbm::kernel(u, v); }, u,
                              b, spec)
                   .value;
    }
    return rbm::integrate([u](double v) { return rbm::kernel(u, v); }, a, b,
                          spec)
        .value;
}

}  // namespace

TEST_SUITE("distributional") {

TEST_CASE("kernel closed values and continuity") {
    CHECK(rbm::kernel(0.0, 1.0) == 0.0);
    for (double u : {0.0, 0.5, 1.0, 5.0}) {
        CHECK(rbm::kernel(u, u) == 1.0 - 2.0 * u * std::exp(-u));
    }
    for (double u : {0.5, 2.0}) {
        CHECK(std::fabs(rbm::kernel(u, u - 1e-9) - rbm::kernel(u, u + 1e-9)) <=
              1e-7);
    }
    CHECK_THROWS_AS(rbm::kernel(-0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(rbm::kernel(1.0, -0.1), std::domain_error);
}

TEST_CASE("kernel integrates to zero in its second argument") {
    rbm::QuadSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-10;
    spec.tail_rate = 0.5;
    for (double u : {0.0, 1.0, 2.0, 3.0}) {
        CHECK(std::fabs(kernel_integral(u, 0.0, kInf, spec)) <= 1e-9);
    }
}

TEST_CASE("functional bias through the kernel") {
    CHECK(rbm::functional_bias_via_kernel(p12(), rbm::Identity{}, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(rbm::functional_bias_via_kernel(p12(), rbm::Identity{},
                                                    std::sqrt(2.0))) <= 1e-9);
    CHECK(rbm::functional_bias_via_kernel(p12(), rbm::Square{}, 0.0) ==
          doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("kernel route matches the generator route") {
    const std::vector<rbm::PerformanceMeasure> fs = {
        rbm::Identity{}, rbm::Square{}, rbm::Exponential{0.5},
        rbm::IndicatorAbove{1.0}};
    for (const auto& f : fs) {
        for (double x : {0.0, 0.4, 1.0, 1.7, 3.2}) {
            const double via_kernel =
                rbm::functional_bias_via_kernel(p12(), f, x);
            const double via_poisson =
                rbm::unite_functional(p12(), f, rbm::PointMass{x});
            CHECK(std::fabs(via_kernel - via_poisson) <= 1e-7);
        }
    }
}

TEST_CASE("distributional bias with the constant weight") {
    CHECK(rbm::distributional_bias(p12(), rbm::Power{0.0}, 0.0) ==
          doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-9));

    // |f| <= 1 implies the functional bias is dominated by the
    // distributional one; f(y) = 2*1{y > 1} - 1 realizes a near-worst case
    rbm::QuadSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-10;
    spec.tail_rate = 0.5;
    const double u = 0.5;
    const double tail = rbm::integrate(
                            [u](double v) { return rbm::kernel(u, v); }, 1.0,
                            kInf, spec)
                            .value;
    const double functional = std::fabs(2.0 * tail);
    const double distributional =
        rbm::distributional_bias(p12(), rbm::Power{0.0}, 0.5);
    CHECK(distributional == doctest::Approx(0.6340838421559949).epsilon(1e-9));
    CHECK(distributional + 1e-9 >= functional);
}

TEST_CASE("power weight scaling across parameterizations") {
    const rbm::RbmParams p22(2.0, 2.0);
    for (double pw : {0.0, 1.0}) {
        const rbm::WeightFunction w = rbm::Power{pw};
        for (double x : {0.0, 0.25, 0.6}) {
            const double lhs = rbm::distributional_bias(p22, w, x);
            const double rhs =
                rbm::distributional_bias(p12(), w, p22.eta * x) /
                (p22.r * std::pow(p22.eta, pw + 1.0));
            CHECK(std::fabs(lhs - rhs) <= 1e-12);
        }
    }
    const rbm::RbmParams podd(0.7, 1.3);
    for (double x : {0.3, 1.1}) {
        const double lhs = rbm::distributional_bias(podd, rbm::Power{0.0}, x);
        const double rhs =
            rbm::distributional_bias(p12(), rbm::Power{0.0}, podd.eta * x) /
            (podd.r * podd.eta);
        CHECK(std::fabs(lhs - rhs) <= 1e-9);
    }
}

TEST_CASE("exponential weight has no power-law scaling") {
    const rbm::RbmParams p22(2.0, 2.0);
    const rbm::WeightFunction w = rbm::ExponentialWeight{0.5};
    const double lhs = rbm::distributional_bias(p22, w, 0.5);
    const double naive =
        rbm::distributional_bias(p12(), w, p22.eta * 0.5) / (p22.r * p22.eta);
    CHECK(std::fabs(lhs - naive) / lhs > 0.1);
}

TEST_CASE("exponential weight dual-route quadrature") {
    const rbm::WeightFunction w = rbm::ExponentialWeight{0.5};
    rbm::QuadSpec spec;
    spec.abs_tol = 1e-11;
    spec.rel_tol = 1e-9;
    spec.tail_rate = 0.25;
    for (double x : {0.5, 1.5}) {
        auto abs_weighted = [x](double v) {
            return std::fabs(rbm::kernel(x, v)) * std::exp(0.5 * v);
        };
        const double direct =
            rbm::integrate(abs_weighted, 0.0, x, spec).value +
            rbm::integrate(abs_weighted, x, kInf, spec).value;
        CHECK(std::fabs(rbm::distributional_bias(p12(), w, x) - direct) <=
              1e-9);
    }

    const double cite = rbm::cite_distributional_pi(p12(), w);
    CHECK(cite == doctest::Approx(3.899065799189087).epsilon(1e-8));
    rbm::QuadSpec outer;
    outer.abs_tol = 1e-10;
    outer.rel_tol = 1e-8;
    outer.tail_rate = 0.25;
    const double dual =
        rbm::integrate(
            [&](double x) {
                return std::exp(-x) * rbm::distributional_bias(p12(), w, x);
            },
            0.0, kInf, outer)
            .value;
    CHECK(std::fabs(cite - dual) <= 1e-8);
}

TEST_CASE("stationary cite values and scaling") {
    const double v0 = rbm::cite_distributional_pi(p12(), rbm::Power{0.0});
    const double v1 = rbm::cite_distributional_pi(p12(), rbm::Power{1.0});
    CHECK(v0 == doctest::Approx(0.877535737582767).epsilon(1e-9));
    CHECK(v1 == doctest::Approx(1.613294619929793).epsilon(1e-9));
    CHECK(v1 > v0);

    const double v22 =
        rbm::cite_distributional_pi(rbm::RbmParams(2.0, 2.0), rbm::Power{0.0});
    CHECK(v22 == doctest::Approx(0.25 * v0).epsilon(1e-12));
}

TEST_CASE("pointwise bias minimizer") {
    const double xstar = 1.0732369249023672;
    const double bstar =
        rbm::distributional_bias(p12(), rbm::Power{0.0}, xstar);
    CHECK(bstar == doctest::Approx(0.3452234979970322).epsilon(1e-9));
    CHECK(xstar < std::sqrt(2.0));
    CHECK(rbm::distributional_bias(p12(), rbm::Power{0.0}, xstar - 0.05) >
          bstar);
    CHECK(rbm::distributional_bias(p12(), rbm::Power{0.0}, xstar + 0.05) >
          bstar);
}

TEST_CASE("distributional good states") {
    auto set1 =
        rbm::good_states_distributional(p12(), rbm::Power{0.0}, 1.0);
    REQUIRE(set1.size() == 1);
    CHECK(std::fabs(set1[0].lo) <= 1e-9);
    CHECK(set1[0].hi == doctest::Approx(1.83718182764).epsilon(1e-8));
    CHECK(std::fabs(set1[0].hi - 1.84) <= 0.01);

    CHECK(rbm::good_states_distributional(p12(), rbm::Power{0.0}, 0.0)
              .empty());
    CHECK(rbm::good_states_distributional(p12(), rbm::Power{0.0}, 0.3)
              .empty());
    CHECK(!rbm::good_states_distributional(p12(), rbm::Power{0.0}, 0.4)
               .empty());

    auto rows = rbm::good_states_distributional_figure(
        p12(), rbm::Power{0.0}, {0.0, 0.5, 1.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].c == 0.0);
    CHECK(rows[0].intervals.empty());
    CHECK(!rows[1].intervals.empty());
    REQUIRE(rows[2].intervals.size() == 1);
    CHECK(rows[2].intervals[0].hi == set1[0].hi);

    auto scaled =
        rbm::good_states_distributional(rbm::RbmParams(2.0, 2.0),
                                        rbm::Power{0.0}, 1.0);
    REQUIRE(scaled.size() == 1);
    CHECK(std::fabs(scaled[0].hi - 0.5 * set1[0].hi) <= 1e-8);
}

}  // TEST_SUITE
