#include <gtest/gtest.h>

#include "oracles.hpp"
#include "phaselab/vmf.hpp"

using namespace phaselab;

TEST(Vmf, NormalizationKnownValues) {
    EXPECT_DOUBLE_EQ(vmf_normalization(0.0, 2), 1.0);
    EXPECT_DOUBLE_EQ(vmf_normalization(0.0, 3), 1.0);
    EXPECT_NEAR(vmf_normalization(1.0, 3), std::sinh(1.0), 1e-12);
    EXPECT_NEAR(vmf_normalization(1.0, 2), static_cast<double>(oracle::bessel_i_series(0, 1.0L)), 1e-12);
    EXPECT_NEAR(vmf_normalization(1.0, 2), 1.2660658778, 1e-10);
}

TEST(Vmf, LogNormalizationLargeKappa) {
    // log Z for n=3 is log(sinh k / k)
    for (double k : {10.0, 100.0, 400.0})
        EXPECT_NEAR(log_vmf_normalization(k, 3), k + std::log1p(-std::exp(-2 * k)) - std::log(2 * k), 1e-10 * k);
}

TEST(Vmf, OrderParameterMatchesClosedForms) {
    for (int i = 0; i <= 300; ++i) {
        double k = 0.1 * i;
        EXPECT_NEAR(order_parameter_c(k, 2), oracle::c_circle(k), 1e-10) << k;
        EXPECT_NEAR(order_parameter_c(k, 3), oracle::c_sphere(k), 1e-10) << k;
    }
    EXPECT_NEAR(order_parameter_c(1.0, 3), 0.3130352855, 1e-10);
    EXPECT_NEAR(order_parameter_c(1.0, 2), 0.4463899659, 1e-10);
}

TEST(Vmf, ZeroKappaIsAnalytic) {
    auto a = vmf_moments(0.0, 2), b = vmf_moments(0.0, 3);
    EXPECT_EQ(a.c, 0.0);
    EXPECT_EQ(b.c, 0.0);
    EXPECT_DOUBLE_EQ(a.c_prime, 0.5);
    EXPECT_DOUBLE_EQ(b.c_prime, 1.0 / 3.0);
}

TEST(Vmf, CPrimeMatchesFiniteDifferences) {
    for (int n : {2, 3})
        for (int i = 0; i <= 40; ++i) {
            double k = 0.5 * i + 0.01, h = 1e-4;
            double fd = (order_parameter_c(k + h, n) - order_parameter_c(k - h, n)) / (2 * h);
            double cp = order_parameter_c_prime(k, n);
            EXPECT_NEAR(fd, cp, 1e-6 * cp) << n << " " << k;
        }
}

TEST(Vmf, CPrimeIdentity) {
    for (int n : {2, 3})
        for (double k : {0.3, 2.0, 9.0, 25.0}) {
            auto v = vmf_moments(k, n);
            EXPECT_NEAR(c_prime_identity(k, v.c, n), v.c_prime, 1e-11);
        }
}

TEST(Vmf, CPrimeLargeKappaDecay) {
    std::vector<double> ks, cp;
    for (double k : {50.0, 100.0, 200.0, 400.0}) {
        ks.push_back(k);
        cp.push_back(order_parameter_c_prime(k, 2));
    }
    EXPECT_NEAR(oracle::loglog_slope(ks, cp), -2.0, 0.02);
    for (std::size_t i = 1; i < cp.size(); ++i) EXPECT_LT(cp[i], cp[i - 1]);
}

TEST(Vmf, Monotone) {
    for (int n : {2, 3}) {
        double prev = -1.0;
        for (int i = 0; i < 200; ++i) {
            double c = order_parameter_c(50.0 * i / 199, n);
            EXPECT_GT(c, prev);
            EXPECT_LT(c, 1.0);
            prev = c;
        }
    }
}

TEST(Vmf, MomentNormalization) {
    for (int n : {2, 3})
        for (double k : {0.0, 0.1, 1.0, 5.0, 20.0}) {
            EXPECT_NEAR(vmf_moment(k, n, [](double) { return 1.0; }), 1.0, 1e-12);
            EXPECT_NEAR(vmf_moment(k, n, [](double u) { return u; }), order_parameter_c(k, n), 1e-12);
        }
    auto v = vmf_moments(5.0, 2);
    EXPECT_NEAR(vmf_moment(5.0, 2, [](double u) { return u * u; }), v.c_prime + v.c * v.c, 1e-12);
}

TEST(Vmf, SmallKappaSeriesResidualOrder) {
    for (int n : {2, 3}) {
        std::vector<double> ks, r;
        for (double k : {1e-2, 2e-2, 4e-2, 8e-2}) {
            ks.push_back(k);
            r.push_back(order_parameter_c(k, n) - k / n + k * k * k / (n * n * (n + 2.0)));
        }
        EXPECT_NEAR(oracle::loglog_slope(ks, r), 5.0, 0.1) << n;
    }
}

TEST(Vmf, AsymptoticBranchContinuity) {
    for (int n : {2, 3}) {
        double below = order_parameter_c(500.0 - 1e-7, n), above = order_parameter_c(500.0 + 1e-7, n);
        EXPECT_NEAR(below, above, 1e-10);
        EXPECT_NEAR(order_parameter_c(1000.0, n), 1 - (n - 1) / 2000.0 + (n - 1) * (n - 3) / 8e6, 1e-8);
    }
}

TEST(Vmf, RejectsBadKappa) {
    EXPECT_THROW(vmf_moments(-1.0, 2), DomainError);
    EXPECT_THROW(vmf_moments(std::nan(""), 2), DomainError);
    EXPECT_THROW(vmf_moments(INFINITY, 3), DomainError);
}

TEST(Vmf, SmallKappaCancellation) {
    for (int n : {2, 3}) {
        // series and direct branches meet at kappa = 0.5
        double a = c_minus_kappa_c_prime(0.5 - 1e-14, n), b = c_minus_kappa_c_prime(0.5, n);
        EXPECT_NEAR(a, b, 1e-9 * b) << n;
        // leading term 2 k^3 / (n^2 (n + 2))
        double k = 1e-3;
        EXPECT_NEAR(c_minus_kappa_c_prime(k, n), 2 * k * k * k / (n * n * (n + 2.0)), 1e-6 * k * k * k) << n;
    }
}
