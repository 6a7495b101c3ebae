#include <gtest/gtest.h>

#include "phaselab/equilibria.hpp"
#include "phaselab/kinetic.hpp"

using namespace phaselab;

namespace {

KineticState perturbed_uniform(int m, double a, double rho, double dt) {
    auto s = uniform_state(m, rho, dt);
    for (int i = 0; i < m; ++i) s.values[i] += a * std::cos(s.theta(i));
    return s;
}

double stable_kappa(const ModelCoefficients& m, double rho) { return solve_compatibility(m, 2, rho).roots.back().kappa; }

}  // namespace

TEST(Kinetic, CurrentOfSimpleStates) {
    auto u = uniform_state(100, 1.0, 0.01);
    auto J = current_J(u);
    EXPECT_NEAR(J[0], 0.0, 1e-15);
    EXPECT_NEAR(J[1], 0.0, 1e-15);
    for (double k : {0.5, 2.0, 5.0}) {
        auto v = vmf_state(100, k, 0.0, 1.0, 0.01);
        auto Jv = current_J(v);
        EXPECT_NEAR(Jv[0], order_parameter_c(k, 2), 1e-10);
        EXPECT_NEAR(Jv[1], 0.0, 1e-14);
    }
    auto p = perturbed_uniform(100, 2 * 0.003, 1.0, 0.01);
    EXPECT_NEAR(current_J(p)[0], 0.003, 1e-15);
}

TEST(Kinetic, UniformIsFixedPoint) {
    auto h = presets::hysteresis();
    for (auto sch : {KineticScheme::Central, KineticScheme::Weighted}) {
        auto s = uniform_state(64, 2.5, 0.01);
        for (int k = 0; k < 10; ++k) s = step(s, h, 2.5, sch);
        for (double v : s.values) EXPECT_NEAR(v, 1.0, 1e-14);
    }
}

TEST(Kinetic, VmfEquilibriumDrift) {
    auto h = presets::hysteresis();
    double kap = stable_kappa(h, 3.0);
    auto drift = [&](int m, KineticScheme sch) {
        auto s = vmf_state(m, kap, 0.7, 3.0, 1e-3);
        double before = current_J_norm(s);
        s = step(s, h, 3.0, sch);
        return std::abs(current_J_norm(s) - before);
    };
    // the sampled VMF is stationary for the weighted flux
    EXPECT_LT(drift(400, KineticScheme::Weighted), 1e-8);
    // central: the discrete equilibrium is O(h^2) away from the sampled VMF,
    // so the drift is O(dt m^-2) with a kappa-dependent constant
    double d200 = drift(200, KineticScheme::Central), d400 = drift(400, KineticScheme::Central);
    EXPECT_LT(d400, 1e-6);
    EXPECT_NEAR(d200 / d400, 4.0, 0.5);
}

TEST(Kinetic, LinearGrowthAboveThreshold) {
    auto h = presets::hysteresis();
    for (double rho : {2.4, 3.0}) {
        auto s = perturbed_uniform(100, 2e-6, rho, 0.01);
        auto tr = run_relaxation(h, s, rho, 6.0);
        double g = std::log(tr.order_parameter[500] / tr.order_parameter[100]) / (tr.times[500] - tr.times[100]);
        double want = rho / 2.0 - 1.0;
        EXPECT_NEAR(g, want, 0.05 * want) << rho;
    }
}

TEST(Kinetic, LinearDecayBelowThreshold) {
    auto h = presets::hysteresis();
    for (double rho : {0.5, 1.0, 1.5}) {
        auto tr = run_relaxation(h, perturbed_uniform(100, 0.02, rho, 0.01), rho, 15.0, {KineticScheme::Central, 10, {}});
        auto fit = measure_decay_rate(tr.times, tr.order_parameter, 2.0, 12.0);
        double want = 1.0 - rho / 2.0;
        EXPECT_NEAR(fit.rate, want, 0.05 * want) << rho;
    }
}

TEST(Kinetic, RelaxationExamples) {
    auto h = presets::hysteresis();
    auto a = run_relaxation(h, perturbed_uniform(100, 0.05, 1.2, 0.01), 1.2, 60.0, {KineticScheme::Central, 100, {}});
    EXPECT_LT(a.order_parameter.back(), 1e-6);

    // the central equilibrium carries an O(h^2) offset: 5e-4 at m = 100
    double c3 = order_parameter_c(stable_kappa(h, 3.0), 2);
    auto b = run_relaxation(h, perturbed_uniform(400, 0.05, 3.0, 0.01), 3.0, 60.0, {KineticScheme::Central, 100, {}});
    EXPECT_NEAR(b.order_parameter.back(), c3, 1e-4);
    auto bw = run_relaxation(h, perturbed_uniform(100, 0.05, 3.0, 0.01), 3.0, 60.0, {KineticScheme::Weighted, 100, {}});
    EXPECT_NEAR(bw.order_parameter.back(), c3, 1e-8);

    double k15 = stable_kappa(h, 1.5), c15 = order_parameter_c(k15, 2);
    for (auto [m, sch] : {std::pair{400, KineticScheme::Central}, std::pair{100, KineticScheme::Weighted}}) {
        auto f0 = vmf_state(m, k15, 0.0, 1.5, 0.01);
        for (int i = 0; i < m; ++i) f0.values[i] *= 1.0 + 0.002 * std::cos(2 * f0.theta(i));
        double ms = mass(f0);
        for (auto& v : f0.values) v /= ms;
        auto c = run_relaxation(h, f0, 1.5, 30.0, {sch, 10, {}});
        for (double v : c.order_parameter) EXPECT_NEAR(v, c15, 1e-3) << m;
    }
}

TEST(Kinetic, FreeEnergyDecreasesAndMassConserved) {
    auto h = presets::hysteresis();
    for (auto [m, sch] : {std::pair{100, KineticScheme::Weighted}, std::pair{400, KineticScheme::Central}})
        for (double rho : {1.0, 1.7, 2.5}) {
            auto tr = run_relaxation(h, perturbed_uniform(m, 0.3, rho, 0.01), rho, 20.0, {sch, 50, {}});
            EXPECT_LE(tr.max_free_energy_increase, 1e-10) << rho << " " << m;
            EXPECT_LE(tr.max_mass_drift, 1e-12);
            EXPECT_FALSE(tr.positivity_violated);
            for (std::size_t i = 1; i < tr.free_energy.size(); ++i)
                EXPECT_LE(tr.free_energy[i], tr.free_energy[i - 1] + 50 * 1e-10);  // 50 steps apart
            for (double v : tr.order_parameter) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
}

// Near its own equilibrium the central scheme is not exactly dissipative for
// the discrete free energy; the excess shrinks like h^4.
TEST(Kinetic, CentralFreeEnergyExcessShrinks) {
    auto h = presets::hysteresis();
    auto excess = [&](int m) {
        return run_relaxation(h, perturbed_uniform(m, 0.3, 2.5, 0.01), 2.5, 20.0, {KineticScheme::Central, 50, {}})
            .max_free_energy_increase;
    };
    double e100 = excess(100), e200 = excess(200);
    EXPECT_LT(e100, 1e-8);
    EXPECT_GT(e100 / e200, 8.0);
}

TEST(Kinetic, MassOverManySteps) {
    auto h = presets::hysteresis();
    auto s = perturbed_uniform(100, 0.4, 2.5, 0.01);
    double m0 = mass(s);
    for (int k = 0; k < 100000; ++k) step_inplace(s, h, 2.5);
    EXPECT_LE(std::abs(mass(s) - m0), 1e-12);
}

TEST(Kinetic, DecayFitErrors) {
    std::vector<double> t{0, 1, 2, 3, 4}, d{1, 1, 1, 1, 1};
    try {
        measure_decay_rate(t, d, 0, 4);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("no decay detected"), std::string::npos);
    }
    std::vector<double> noisy{1, 0.1, 0.5, 0.01, 0.2};
    EXPECT_THROW(measure_decay_rate(t, noisy, 0, 4), NumericalError);
    std::vector<double> clean{1, std::exp(-0.7), std::exp(-1.4), std::exp(-2.1), std::exp(-2.8)};
    EXPECT_NEAR(measure_decay_rate(t, clean, 0, 4).rate, 0.7, 1e-12);
}

TEST(Kinetic, FreeEnergyValues) {
    auto h = presets::hysteresis();
    EXPECT_NEAR(free_energy_discrete(h, uniform_state(100, 1.0, 0.01), 1.0), 0.0, 1e-15);
    for (double rho : {0.4, 1.7, 3.0})
        EXPECT_NEAR(free_energy_discrete(h, uniform_state(100, rho, 0.01), rho), rho * std::log(rho), 1e-14);
    for (double rho : {1.5, 3.0}) {
        double k = stable_kappa(h, rho);
        auto s = vmf_state(400, k, 0.2, rho, 0.01);
        EXPECT_NEAR(free_energy_discrete(h, s, rho), equilibrium_free_energy(h, 2, rho, k), 1e-4);
    }
    auto bad = uniform_state(32, 1.0, 0.01);
    bad.values[0] = -0.1;
    bad.values[1] = 2.1;
    EXPECT_TRUE(free_energy_discrete_checked(h, bad, 1.0).clipped);
}

TEST(Kinetic, Reinforcement) {
    auto s = uniform_state(100, 1.0, 0.01);
    for (int i = 0; i < 100; ++i) s.values[i] += 0.004 * std::cos(s.theta(i) - 0.3);
    double dev0 = 0;
    for (double v : s.values) dev0 = std::max(dev0, std::abs(v - 1.0));
    double amp = reinforce(s, 0.02);
    EXPECT_NEAR(amp, 0.02 - dev0, 1e-15);
    double dev = 0;
    for (double v : s.values) dev = std::max(dev, std::abs(v - 1.0));
    EXPECT_LE(dev, 0.02 + 1e-12);
    // off-grid maximum: a second pass adds only a sliver
    EXPECT_LT(reinforce(s, 0.02), 1e-5);

    // grid-aligned mode: exactly idempotent
    auto a = uniform_state(100, 1.0, 0.01);
    for (int i = 0; i < 100; ++i) a.values[i] += 0.004 * std::cos(a.theta(i));
    reinforce(a, 0.02);
    auto once = a;
    EXPECT_NEAR(reinforce(a, 0.02), 0.0, 1e-15);
    for (int i = 0; i < 100; ++i) EXPECT_NEAR(a.values[i], once.values[i], 1e-15);

    auto far = vmf_state(100, 2.0, 0.0, 1.0, 0.01);
    auto copy = far;
    EXPECT_EQ(reinforce(far, 0.02), 0.0);
    EXPECT_EQ(far.values, copy.values);
}

TEST(Kinetic, HysteresisConstantLowDensity) {
    auto h = presets::hysteresis();
    HysteresisProtocol p;
    p.t_end = 100.0;
    p.rho_of_t = [](double) { return 1.2; };
    auto tr = run_hysteresis(h, p);
    for (double v : tr.order_parameter) EXPECT_LE(v, 0.02);
    EXPECT_EQ(tr.free_energy.size(), tr.times.size());
}

TEST(Kinetic, ProtocolValidation) {
    HysteresisProtocol p;
    p.rho_of_t = [](double t) { return 1.0 - t; };
    EXPECT_THROW(validate(p), DomainError);
    HysteresisProtocol q;
    q.m = 8;
    EXPECT_THROW(validate(q), DomainError);
    EXPECT_NEAR(HysteresisProtocol{}.rho_at(500.0), 2.5, 1e-15);
    EXPECT_NEAR(HysteresisProtocol{}.rho_at(0.0), 1.0, 1e-15);
}

TEST(Kinetic, LoopAnalysisOnSyntheticLoop) {
    Trace tr;
    for (int i = 0; i <= 2000; ++i) {
        double t = i;
        double rho = 1.75 - 0.75 * std::cos(M_PI * t / 1000.0);
        bool rising = i <= 1000;
        double c = rising ? (rho > 2.05 ? 0.8 : 0.0) : (rho > 1.4 ? 0.8 : 0.0);
        tr.times.push_back(t);
        tr.rho.push_back(rho);
        tr.order_parameter.push_back(c);
    }
    auto a = analyze_loop(tr);
    EXPECT_NEAR(a.up_jump_rho, 2.05, 5e-3);
    EXPECT_NEAR(a.down_jump_rho, 1.4, 5e-3);
    EXPECT_NEAR(a.area, 0.8 * 0.65, 0.01);
    EXPECT_EQ(a.floor, 0.0);
}
