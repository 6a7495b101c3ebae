#include <gtest/gtest.h>

#include "oracles.hpp"
#include "phaselab/spectral.hpp"

using namespace phaselab;

TEST(Spectral, LambdaAtZero) {
    EXPECT_NEAR(poincare_constant(0.0, 2), 1.0, 1e-10);
    EXPECT_NEAR(poincare_constant(0.0, 3), 2.0, 1e-10);
}

TEST(Spectral, RayleighQuotientOracle) {
    for (double k : {0.5, 2.0, 10.0}) {
        EXPECT_NEAR(poincare_constant(k, 2), oracle::poincare_circle(k), 1e-6) << k;
        EXPECT_NEAR(poincare_constant(k, 3), oracle::poincare_sphere(k), 1e-6) << k;
    }
}

TEST(Spectral, LambdaContinuity) {
    for (int n : {2, 3}) {
        double prev = poincare_constant(0.0, n);
        for (int i = 1; i <= 100; ++i) {
            double l = poincare_constant(0.2 * i, n);
            EXPECT_LT(std::abs(l - prev), 0.3) << n << " " << 0.2 * i;
            EXPECT_GT(l, 0.0);
            prev = l;
        }
    }
}

TEST(Spectral, GroundStateVanishes) {
    auto d = poincare_detail(7.0, 3);
    EXPECT_LT(std::abs(d.ground), 1e-9);
    EXPECT_DOUBLE_EQ(d.lambda, std::min(d.even_second, d.odd_first));
}

TEST(Spectral, CircleGciClosedForm) {
    for (double k : {0.5, 1.0, 5.0, 10.0}) {
        auto s = gci_h(k, 2);
        double err = 0.0;
        for (std::size_t i = 0; i < s.theta.size(); i += 3)
            err = std::max(err, std::abs(s.g[i] - oracle::gci_circle(k, s.theta[i])));
        EXPECT_LT(err, 1e-8) << k;
    }
}

TEST(Spectral, GciPositiveAndSmallResidual) {
    for (int n : {2, 3})
        for (double k : {0.1, 1.0, 20.0}) {
            auto s = gci_h(k, n);
            EXPECT_LT(s.residual, 1e-6);
            for (std::size_t i = 1; i + 1 < s.h.size(); ++i) ASSERT_GT(s.h[i], 0.0) << n << " " << k;
            EXPECT_GT(s.h.front(), 0.0);
            EXPECT_GT(s.h.back(), 0.0);
        }
}

TEST(Spectral, CTildeGridRefinement) {
    EXPECT_NEAR(c_tilde(1.0, 2, 2048), c_tilde(1.0, 2, 4096), 1e-7);
    EXPECT_NEAR(c_tilde(1.0, 3, 2048), c_tilde(1.0, 3, 4096), 1e-7);
}

TEST(Spectral, CTildeBelowC) {
    for (int n : {2, 3})
        for (double k : {0.01, 0.1, 1.0, 5.0, 20.0, 50.0}) {
            double ct = c_tilde(k, n);
            EXPECT_GT(ct, 0.0);
            EXPECT_LT(ct, order_parameter_c(k, n)) << n << " " << k;
        }
}

TEST(Spectral, CTildeSmallKappa) {
    for (int n : {2, 3}) {
        std::vector<double> ks, r;
        double a = (2.0 * n - 1) / (2.0 * n * (n + 2));
        for (double k : {0.05, 0.1, 0.2, 0.4}) {
            ks.push_back(k);
            r.push_back(c_tilde(k, n) - a * k);
        }
        EXPECT_GE(oracle::loglog_slope(ks, r), 1.9) << n;
    }
}

TEST(Spectral, CTildeLargeKappa) {
    // within twice the size of the next correction
    EXPECT_NEAR(c_tilde(20.0, 2), 0.925, 2.0 * 3.0 / (24 * 400.0));
    for (int n : {2, 3}) {
        std::vector<double> ks, r;
        for (double k : {20.0, 40.0, 80.0}) {
            ks.push_back(k);
            r.push_back(c_tilde(k, n, 4096) - (1 - (n + 1) / (2 * k) + (n + 1) * (3.0 * n - 7) / (24 * k * k)));
        }
        EXPECT_LE(oracle::loglog_slope(ks, r), -2.9) << n;
    }
}

TEST(Spectral, Errors) {
    EXPECT_THROW(poincare_constant(-1.0, 2), DomainError);
    EXPECT_THROW(poincare_constant(1.0, 4), DomainError);
    EXPECT_THROW(gci_h(0.0, 2), DomainError);
}
