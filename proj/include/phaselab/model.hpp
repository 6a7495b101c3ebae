#pragma once

// Coefficient models nu(|J|), tau(|J|) of the homogeneous alignment
// equation together with the derived quotient k = nu/tau, its potential
// Phi(r) = int_0^r k, and the inverse j of k.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// pchip.hpp relies on isnan being declared beforehand
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "phaselab/errors.hpp"
#include "phaselab/vmf.hpp"

namespace phaselab {

enum class Preset { Constant, Linear, Hysteresis, Regularized1, Regularized2, CustomBeta, User };

inline const char* preset_name(Preset p) {
    switch (p) {
        case Preset::Constant: return "constant";
        case Preset::Linear: return "linear";
        case Preset::Hysteresis: return "hysteresis";
        case Preset::Regularized1: return "regularized_1";
        case Preset::Regularized2: return "regularized_2";
        case Preset::CustomBeta: return "custom_beta";
        case Preset::User: return "user";
    }
    return "?";
}

using ScalarFn = std::function<double(double)>;

// Immutable after construction; copies share the underlying callables.
struct ModelCoefficients {
    std::string name;
    Preset preset = Preset::User;
    ScalarFn nu;
    ScalarFn tau;
    ScalarFn k;
    ScalarFn k_prime;
    ScalarFn phi;
    // Closed forms when available; otherwise j is obtained by inverting k.
    ScalarFn j_closed;
    ScalarFn j_prime_closed;
    double kappa_max = std::numeric_limits<double>::infinity();
    double J_upper = std::numeric_limits<double>::infinity();  // largest admissible |J|
    bool j_enabled = true;

    double tau0() const { return tau(0.0); }
};

namespace detail {

inline double integrate(const ScalarFn& f, double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-14);
}

// Smallest x >= 0 with g(x) = target for increasing g with g(0) <= target.
// Bisection on a doubling bracket, then Newton polish with gp.
inline double invert_increasing(const ScalarFn& g, const ScalarFn& gp, double target,
                                double upper = std::numeric_limits<double>::infinity()) {
    if (target <= 0.0) return 0.0;
    double lo = 0.0, hi = std::min(1.0, upper);
    while (g(hi) < target) {
        if (hi >= upper) throw RangeError("target beyond the range of the inverted function", g(upper));
        lo = hi;
        hi = std::min(2.0 * hi, upper);
        if (hi > 1e300) throw NumericalError("inversion bracket diverged", target);
    }
    while (hi - lo > 1e-14 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) < target ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 2; ++it) {
        double d = gp(x);
        if (!(d > 0.0)) break;
        double nx = x - (g(x) - target) / d;
        if (nx >= lo && nx <= hi) x = nx;
    }
    return x;
}

inline double fd_derivative(const ScalarFn& f, double x) {
    double h = 1e-4 * std::max(1.0, std::abs(x));
    if (x < 2.0 * h) return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12.0 * h);
}

// Probe k on 1, 10, ..., 1e8; unbounded if it still grows by more than 1e-6
// relative over the last decade.
inline double probe_kappa_max(const ScalarFn& k) {
    double a = k(1e7), b = k(1e8);
    if (!std::isfinite(b) || b > a * (1.0 + 1e-6)) return std::numeric_limits<double>::infinity();
    return b;
}

}  // namespace detail

inline void require_j(const ModelCoefficients& m) {
    if (!m.j_enabled)
        throw RangeError("j is not defined for model '" + m.name + "' (k is constant)", m.kappa_max);
}

// |J| = j(kappa), the inverse of k.
inline double j_of_kappa(const ModelCoefficients& m, double kappa) {
    require_j(m);
    if (!(kappa >= 0.0)) throw DomainError("kappa must be non-negative");
    if (kappa >= m.kappa_max)
        throw RangeError("kappa=" + std::to_string(kappa) + " is at or beyond kappa_max=" +
                             std::to_string(m.kappa_max),
                         m.kappa_max);
    if (kappa == 0.0) return 0.0;
    if (m.j_closed) return m.j_closed(kappa);
    return detail::invert_increasing(m.k, m.k_prime, kappa, m.J_upper);
}

inline double j_prime_of_kappa(const ModelCoefficients& m, double kappa) {
    require_j(m);
    if (kappa >= m.kappa_max) throw RangeError("kappa beyond kappa_max", m.kappa_max);
    if (m.j_prime_closed) return m.j_prime_closed(kappa);
    return 1.0 / m.k_prime(j_of_kappa(m, kappa));
}

inline double phi_potential(const ModelCoefficients& m, double J) {
    if (!(J >= 0.0)) throw DomainError("|J| must be non-negative");
    if (J == 0.0) return 0.0;
    if (m.phi) return m.phi(J);
    return detail::integrate(m.k, 0.0, J);
}

namespace presets {

inline ModelCoefficients constant(double nu0, double tau0) {
    if (!(tau0 > 0.0) || !(nu0 >= 0.0)) throw DomainError("constant model needs nu0 >= 0, tau0 > 0");
    ModelCoefficients m;
    m.name = "constant";
    m.preset = Preset::Constant;
    double q = nu0 / tau0;
    m.nu = [nu0](double) { return nu0; };
    m.tau = [tau0](double) { return tau0; };
    m.k = [q](double) { return q; };
    m.k_prime = [](double) { return 0.0; };
    m.phi = [q](double r) { return q * r; };
    m.kappa_max = q;
    m.j_enabled = false;
    return m;
}

inline ModelCoefficients linear(double tau0 = 1.0) {
    if (!(tau0 > 0.0)) throw DomainError("tau0 must be positive");
    ModelCoefficients m;
    m.name = "linear";
    m.preset = Preset::Linear;
    m.nu = [](double J) { return J; };
    m.tau = [tau0](double) { return tau0; };
    m.k = [tau0](double J) { return J / tau0; };
    m.k_prime = [tau0](double) { return 1.0 / tau0; };
    m.phi = [tau0](double r) { return 0.5 * r * r / tau0; };
    m.j_closed = [tau0](double kap) { return tau0 * kap; };
    m.j_prime_closed = [tau0](double) { return tau0; };
    return m;
}

inline ModelCoefficients hysteresis() {
    ModelCoefficients m;
    m.name = "hysteresis";
    m.preset = Preset::Hysteresis;
    m.nu = [](double J) { return J; };
    m.tau = [](double J) { return 1.0 / (1.0 + J); };
    m.k = [](double J) { return J + J * J; };
    m.k_prime = [](double J) { return 1.0 + 2.0 * J; };
    m.phi = [](double r) { return r * r / 2.0 + r * r * r / 3.0; };
    // (sqrt(1+4k)-1)/2 written without cancellation
    m.j_closed = [](double kap) { return 2.0 * kap / (std::sqrt(1.0 + 4.0 * kap) + 1.0); };
    m.j_prime_closed = [](double kap) { return 1.0 / std::sqrt(1.0 + 4.0 * kap); };
    return m;
}

inline ModelCoefficients regularized1(double eps, double tau0) {
    if (!(eps > 0.0) || !(tau0 > 0.0)) throw DomainError("regularized_1 needs eps > 0 and tau0 > 0");
    ModelCoefficients m;
    m.name = "regularized_1";
    m.preset = Preset::Regularized1;
    m.nu = [eps](double J) { return J / (eps + J); };
    m.tau = [tau0](double) { return tau0; };
    m.k = [eps, tau0](double J) { return J / (tau0 * (eps + J)); };
    m.k_prime = [eps, tau0](double J) { return eps / (tau0 * (eps + J) * (eps + J)); };
    m.phi = [eps, tau0](double r) { return (r - eps * std::log1p(r / eps)) / tau0; };
    m.j_closed = [eps, tau0](double kap) { return eps * tau0 * kap / (1.0 - tau0 * kap); };
    m.j_prime_closed = [eps, tau0](double kap) {
        double d = 1.0 - tau0 * kap;
        return eps * tau0 / (d * d);
    };
    m.kappa_max = 1.0 / tau0;
    return m;
}

inline ModelCoefficients regularized2(double eps, double tau0) {
    if (!(eps > 0.0) || !(tau0 > 0.0)) throw DomainError("regularized_2 needs eps > 0 and tau0 > 0");
    ModelCoefficients m;
    m.name = "regularized_2";
    m.preset = Preset::Regularized2;
    m.nu = [eps](double J) { return J / std::hypot(eps, J); };
    m.tau = [tau0](double) { return tau0; };
    m.k = [eps, tau0](double J) { return J / (tau0 * std::hypot(eps, J)); };
    m.k_prime = [eps, tau0](double J) {
        double s = std::hypot(eps, J);
        return eps * eps / (tau0 * s * s * s);
    };
    m.phi = [eps, tau0](double r) { return r * r / (std::hypot(eps, r) + eps) / tau0; };
    m.j_closed = [eps, tau0](double kap) {
        double t = tau0 * kap;
        return eps * t / std::sqrt((1.0 - t) * (1.0 + t));
    };
    m.j_prime_closed = [eps, tau0](double kap) {
        double t = tau0 * kap;
        double s = (1.0 - t) * (1.0 + t);
        return eps * tau0 / (s * std::sqrt(s));
    };
    m.kappa_max = 1.0 / tau0;
    return m;
}

// j(kappa) = c(kappa) (1 + kappa^{1/beta}), tau = 1.  Depends on n through c.
inline ModelCoefficients custom_beta(double beta, int n) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("custom_beta needs beta in (0,1]");
    ModelCoefficients m;
    m.name = "custom_beta";
    m.preset = Preset::CustomBeta;
    const double p = 1.0 / beta;
    m.j_closed = [p, n](double kap) {
        return order_parameter_c(kap, n) * (1.0 + std::pow(kap, p));
    };
    m.j_prime_closed = [p, n](double kap) {
        auto v = vmf_moments(kap, n);
        double lead = kap > 0.0 ? v.c * p * std::pow(kap, p - 1.0) : 0.0;
        return v.c_prime * (1.0 + std::pow(kap, p)) + lead;
    };
    ScalarFn jc = m.j_closed, jpc = m.j_prime_closed;
    m.k = [jc, jpc](double J) { return detail::invert_increasing(jc, jpc, J); };
    ScalarFn kf = m.k;
    m.k_prime = [kf, jpc](double J) { return 1.0 / jpc(kf(J)); };
    m.nu = kf;
    m.tau = [](double) { return 1.0; };
    m.phi = [kf, jc](double r) {
        double kr = kf(r);
        return r * kr - detail::integrate(jc, 0.0, kr);
    };
    return m;
}

// User closure.  Derivatives are optional; without them k' is obtained by
// finite differences.
inline ModelCoefficients user(std::string name, ScalarFn nu, ScalarFn tau,
                              ScalarFn nu_prime = {}, ScalarFn tau_prime = {}) {
    ModelCoefficients m;
    m.name = std::move(name);
    m.preset = Preset::User;
    m.nu = nu;
    m.tau = tau;
    if (!(tau(0.0) > 0.0)) throw DomainError("user model requires tau(0) > 0");
    m.k = [nu, tau](double J) { return nu(J) / tau(J); };
    if (nu_prime && tau_prime) {
        m.k_prime = [=](double J) {
            double t = tau(J);
            return (nu_prime(J) * t - nu(J) * tau_prime(J)) / (t * t);
        };
    } else {
        ScalarFn kf = m.k;
        m.k_prime = [kf](double J) { return detail::fd_derivative(kf, J); };
    }
    if (m.k(0.0) != 0.0) {
        m.j_enabled = false;
        m.kappa_max = m.k(0.0);
    } else {
        m.kappa_max = detail::probe_kappa_max(m.k);
    }
    return m;
}

// Tabulated model: columns |J| (strictly increasing from 0), nu, tau.
// k = nu/tau and tau are interpolated by monotone piecewise cubics.
inline ModelCoefficients user_table(std::string name, std::vector<double> J, std::vector<double> nu,
                                    std::vector<double> tau) {
    if (J.size() < 4 || nu.size() != J.size() || tau.size() != J.size())
        throw DomainError("model table needs at least 4 rows of (J, nu, tau)");
    if (J.front() != 0.0) throw DomainError("model table must start at |J| = 0");
    std::vector<double> kv(J.size());
    for (std::size_t i = 0; i < J.size(); ++i) {
        if (!(tau[i] > 0.0)) throw DomainError("model table requires tau > 0");
        if (i > 0 && !(J[i] > J[i - 1])) throw DomainError("model table |J| must be strictly increasing");
        kv[i] = nu[i] / tau[i];
        if (i > 0 && !(kv[i] > kv[i - 1])) throw DomainError("model table k = nu/tau must be increasing");
    }
    if (kv[0] != 0.0) throw DomainError("model table requires nu(0) = 0");
    const double jmax = J.back();
    using Interp = boost::math::interpolators::pchip<std::vector<double>>;
    auto jk = J, jt = J;
    Interp kint(std::move(jk), std::move(kv));
    Interp tint(std::move(jt), std::move(tau));
    auto check = [jmax](double x) {
        if (x < 0.0 || x > jmax)
            throw DomainError("|J|=" + std::to_string(x) + " outside the model table range");
    };
    ModelCoefficients m;
    m.name = std::move(name);
    m.preset = Preset::User;
    m.k = [kint, check](double x) { check(x); return kint(x); };
    m.k_prime = [kint, check](double x) { check(x); return kint.prime(x); };
    m.tau = [tint, check](double x) { check(x); return tint(x); };
    m.nu = [kint, tint, check](double x) { check(x); return kint(x) * tint(x); };
    m.kappa_max = kint(jmax);
    m.J_upper = jmax;
    return m;
}

}  // namespace presets

}  // namespace phaselab
