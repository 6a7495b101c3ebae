#pragma once

// von Mises-Fisher moments on the unit sphere of R^n.
//
// All averages are taken against the density proportional to
// exp(kappa cos(theta)) relative to the uniform probability measure.  In the
// variable u = cos(theta) that measure has density (1-u^2)^{(n-3)/2}, which
// is handled exactly by a Gauss-Jacobi rule (n = 2 has an integrable
// endpoint singularity that a plain Legendre rule would resolve poorly).

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "phaselab/errors.hpp"
#include "phaselab/quadrature.hpp"

namespace phaselab {

struct VmfMoments {
    double kappa = 0.0;
    int n = 2;
    double z = 1.0;       // may overflow to +inf for very large kappa
    double log_z = 0.0;
    double c = 0.0;
    double c_prime = 0.0;
};

struct VmfOptions {
    int initial_nodes = 256;
    int max_nodes = 8192;
    double tolerance = 1e-12;
    double asymptotic_threshold = 500.0;
};

namespace detail {

inline void check_kappa(double kappa, int n) {
    if (!std::isfinite(kappa) || kappa < 0.0)
        throw DomainError("kappa must be finite and non-negative, got " + std::to_string(kappa));
    if (n < 2) throw DomainError("dimension n must be at least 2");
}

// Scaled Hankel series S_nu(x) = sqrt(2 pi x) e^{-x} I_nu(x), valid for x large.
inline double hankel_scaled_bessel(double nu, double x) {
    double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        double next = -term * (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

inline VmfMoments asymptotic_moments(double kappa, int n) {
    const double nu = 0.5 * n - 1.0;
    const double s0 = hankel_scaled_bessel(nu, kappa);
    const double s1 = hankel_scaled_bessel(nu + 1.0, kappa);
    VmfMoments m;
    m.kappa = kappa;
    m.n = n;
    m.c = s1 / s0;
    m.c_prime = 1.0 - (n - 1) * m.c / kappa - m.c * m.c;
    m.log_z = std::lgamma(0.5 * n) + nu * std::log(2.0 / kappa) + kappa -
              0.5 * std::log(2.0 * M_PI * kappa) + std::log(s0);
    m.z = std::exp(m.log_z);
    return m;
}

struct RuleSums {
    double mean_scaled;  // <exp(kappa (u-1))> under the uniform measure
    double c;
    double var;
};

inline RuleSums rule_sums(const GaussRule& r, double kappa) {
    const std::size_t np = r.nodes.size();
    thread_local std::vector<double> e;
    e.resize(np);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        e[i] = r.weights[i] * std::exp(kappa * (r.nodes[i] - 1.0));
        s0 += e[i];
        s1 += e[i] * r.nodes[i];
    }
    double c = s1 / s0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        double d = r.nodes[i] - c;
        s2 += e[i] * d * d;
    }
    return {s0, c, s2 / s0};
}

// Small-kappa branch from the Bessel power series, with
//   I_nu(k) = (k/2)^nu sum_m beta_m k^2m,  I_{nu+1}(k) = (k/2)^nu k sum_m alpha_m k^2m.
// c - k c' is summed with its cancelling leading term removed.
struct SeriesSums {
    double B, A, D;  // sum beta, sum alpha, (c - k c') / k
};

inline SeriesSums series_sums(double kappa, int n) {
    const double nu = 0.5 * n - 1.0;
    constexpr int M = 16;
    double alpha[M], beta[M];
    for (int m = 0; m < M; ++m) {
        double base = -2.0 * m * std::log(2.0) - std::lgamma(m + 1.0);
        beta[m] = std::exp(base - std::lgamma(m + nu + 1.0));
        alpha[m] = 0.5 * std::exp(base - std::lgamma(m + nu + 2.0));
    }
    const double k2 = kappa * kappa;
    double B = 0.0, A = 0.0, num = 0.0, p = 1.0;
    for (int s = 0; s < M; ++s, p *= k2) {
        B += beta[s] * p;
        A += alpha[s] * p;
        double coef = 0.0;
        for (int m = 0; m <= s; ++m) coef += 2.0 * (s - 2 * m) * alpha[m] * beta[s - m];
        num += coef * p;
    }
    return {B, A, num / (B * B)};
}

constexpr double kSeriesThreshold = 0.5;

inline VmfMoments series_moments(double kappa, int n) {
    auto r = series_sums(kappa, n);
    VmfMoments m;
    m.kappa = kappa;
    m.n = n;
    m.c = kappa * r.A / r.B;
    m.c_prime = m.c / kappa - r.D;
    m.z = std::tgamma(0.5 * n) * r.B;
    m.log_z = std::log(m.z);
    return m;
}

}  // namespace detail

inline VmfMoments vmf_moments(double kappa, int n, const VmfOptions& opt = {}) {
    detail::check_kappa(kappa, n);
    VmfMoments m;
    m.kappa = kappa;
    m.n = n;
    if (kappa == 0.0) {
        m.c_prime = 1.0 / n;
        return m;
    }
    if (kappa > opt.asymptotic_threshold) return detail::asymptotic_moments(kappa, n);
    if (kappa < detail::kSeriesThreshold) return detail::series_moments(kappa, n);

    int np = opt.initial_nodes;
    auto prev = detail::rule_sums(sphere_rule(n, np), kappa);
    double err = std::numeric_limits<double>::infinity();
    while (np < opt.max_nodes) {
        np *= 2;
        auto cur = detail::rule_sums(sphere_rule(n, np), kappa);
        err = std::max({std::abs(cur.c - prev.c),
                        std::abs(cur.var - prev.var),
                        std::abs(cur.mean_scaled - prev.mean_scaled) / cur.mean_scaled});
        prev = cur;
        if (err <= opt.tolerance) {
            m.c = cur.c;
            m.c_prime = cur.var;
            m.log_z = kappa + std::log(cur.mean_scaled);
            m.z = std::exp(m.log_z);
            return m;
        }
    }
    throw NumericalError("vmf quadrature did not converge at kappa=" + std::to_string(kappa), err);
}

inline double vmf_normalization(double kappa, int n) { return vmf_moments(kappa, n).z; }
inline double log_vmf_normalization(double kappa, int n) { return vmf_moments(kappa, n).log_z; }
inline double order_parameter_c(double kappa, int n) { return vmf_moments(kappa, n).c; }
inline double order_parameter_c_prime(double kappa, int n) { return vmf_moments(kappa, n).c_prime; }

// <phi(cos theta)> under the normalized VMF measure.  phi must be bounded on [-1,1].
template <class F>
double vmf_moment(double kappa, int n, F&& phi, const VmfOptions& opt = {}) {
    detail::check_kappa(kappa, n);
    auto eval = [&](int np) {
        const auto& r = sphere_rule(n, np);
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            double e = r.weights[i] * std::exp(kappa * (r.nodes[i] - 1.0));
            s0 += e;
            s1 += e * phi(r.nodes[i]);
        }
        return s1 / s0;
    };
    int np = opt.initial_nodes;
    double prev = eval(np);
    double err = std::numeric_limits<double>::infinity();
    while (np < opt.max_nodes) {
        np *= 2;
        double cur = eval(np);
        err = std::abs(cur - prev);
        prev = cur;
        if (err <= opt.tolerance * std::max(1.0, std::abs(cur))) return cur;
    }
    throw NumericalError("vmf_moment did not converge", err);
}

// Identity dc/dkappa = 1 - (n-1) c / kappa - c^2 (kappa > 0).
inline double c_prime_identity(double kappa, double c, int n) {
    return 1.0 - (n - 1) * c / kappa - c * c;
}

// c - kappa c', which is O(kappa^3) at small kappa.
inline double c_minus_kappa_c_prime(double kappa, int n) {
    detail::check_kappa(kappa, n);
    if (kappa == 0.0) return 0.0;
    if (kappa < detail::kSeriesThreshold) return kappa * detail::series_sums(kappa, n).D;
    auto v = vmf_moments(kappa, n);
    return v.c - kappa * v.c_prime;
}

}  // namespace phaselab
