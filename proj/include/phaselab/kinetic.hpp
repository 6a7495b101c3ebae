#pragma once

// Homogeneous kinetic equation on the circle for a probability density f on
// [0, 2pi) (mean one), with the density rho entering through the arguments of
// nu and tau:
//   d_t f = tau(rho |J|) f'' - d_theta( nu(rho |J|) sin(phi - theta) f ),
// where J = <(cos, sin) f> and phi is the angle of J.
//
// Time stepping is backward Euler with the coefficients (and phi) frozen at
// the start of the step, so each step is one cyclic tridiagonal solve.  The
// spatial operator is in flux form, which makes mass conservation exact.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "phaselab/errors.hpp"
#include "phaselab/model.hpp"

namespace phaselab {

enum class KineticScheme {
    Central,   // centred drift flux plus centred diffusion
    Weighted,  // flux -tau M (f/M)' with M the frozen VMF; sampled VMF is stationary
};

struct KineticState {
    std::vector<double> values;
    double t = 0.0;
    double rho = 1.0;
    double dt = 0.01;

    int m() const { return static_cast<int>(values.size()); }
    double h() const { return 2.0 * M_PI / values.size(); }
    double theta(int i) const { return h() * i; }
};

inline KineticState uniform_state(int m, double rho, double dt) {
    if (m < 16) throw DomainError("kinetic grid needs at least 16 points");
    KineticState s;
    s.values.assign(m, 1.0);
    s.rho = rho;
    s.dt = dt;
    return s;
}

// Sampled VMF with concentration kappa and direction phi, normalised to
// discrete mean one.
inline KineticState vmf_state(int m, double kappa, double phi, double rho, double dt) {
    auto s = uniform_state(m, rho, dt);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        s.values[i] = std::exp(kappa * (std::cos(s.theta(i) - phi) - 1.0));
        sum += s.values[i];
    }
    for (auto& v : s.values) v *= m / sum;
    return s;
}

inline std::array<double, 2> current_J(const KineticState& s) {
    double jx = 0.0, jy = 0.0;
    for (int i = 0; i < s.m(); ++i) {
        double th = s.theta(i);
        jx += s.values[i] * std::cos(th);
        jy += s.values[i] * std::sin(th);
    }
    return {jx / s.m(), jy / s.m()};
}

inline double current_J_norm(const KineticState& s) {
    auto J = current_J(s);
    return std::hypot(J[0], J[1]);
}

inline double mass(const KineticState& s) {
    double sum = 0.0;
    for (double v : s.values) sum += v;
    return sum / s.m();
}

namespace detail {

// Solves a cyclic tridiagonal system: a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i]
// with indices taken mod m (Thomas algorithm plus a Sherman-Morrison correction).
inline std::vector<double> cyclic_thomas(const std::vector<double>& a, const std::vector<double>& b,
                                         const std::vector<double>& c, const std::vector<double>& d) {
    const int m = static_cast<int>(b.size());
    const double alpha = c[m - 1];  // row m-1, column 0
    const double beta = a[0];       // row 0, column m-1
    const double gamma = -b[0];
    std::vector<double> bb(b);
    bb[0] = b[0] - gamma;
    bb[m - 1] = b[m - 1] - alpha * beta / gamma;

    auto solve = [&](std::vector<double> rhs) {
        std::vector<double> cp(m), x(m);
        cp[0] = c[0] / bb[0];
        rhs[0] = rhs[0] / bb[0];
        for (int i = 1; i < m; ++i) {
            double den = bb[i] - a[i] * cp[i - 1];
            if (den == 0.0 || !std::isfinite(den)) throw NumericalError("singular kinetic linear system");
            cp[i] = c[i] / den;
            rhs[i] = (rhs[i] - a[i] * rhs[i - 1]) / den;
        }
        x[m - 1] = rhs[m - 1];
        for (int i = m - 2; i >= 0; --i) x[i] = rhs[i] - cp[i] * x[i + 1];
        return x;
    };
    auto x = solve(d);
    std::vector<double> u(m, 0.0);
    u[0] = gamma;
    u[m - 1] = alpha;
    auto z = solve(u);
    double fact = (x[0] + beta * x[m - 1] / gamma) / (1.0 + z[0] + beta * z[m - 1] / gamma);
    for (int i = 0; i < m; ++i) x[i] -= fact * z[i];
    return x;
}

}  // namespace detail

// One backward-Euler step at density rho.
inline void step_inplace(KineticState& s, const ModelCoefficients& model, double rho,
                         KineticScheme scheme = KineticScheme::Central) {
    const int m = s.m();
    const double h = s.h(), dt = s.dt;
    auto J = current_J(s);
    double Jn = std::hypot(J[0], J[1]);
    double phi = Jn > 0.0 ? std::atan2(J[1], J[0]) : 0.0;
    double a = rho * Jn;
    double nu = model.nu(a), tau = model.tau(a);

    // Flux F_{i+1/2} = p[i] f_i + q[i] f_{i+1}
    std::vector<double> p(m), q(m);
    if (scheme == KineticScheme::Central) {
        for (int i = 0; i < m; ++i) {
            double v = nu * std::sin(phi - (i + 0.5) * h);
            p[i] = 0.5 * v + tau / h;
            q[i] = 0.5 * v - tau / h;
        }
    } else {
        double kappa = nu / tau;
        std::vector<double> M(m);
        for (int i = 0; i < m; ++i) M[i] = std::exp(kappa * (std::cos(i * h - phi) - 1.0));
        for (int i = 0; i < m; ++i) {
            double Mh = std::exp(kappa * (std::cos((i + 0.5) * h - phi) - 1.0));
            p[i] = tau * Mh / (M[i] * h);
            q[i] = -tau * Mh / (M[(i + 1) % m] * h);
        }
    }
    // f_i + dt/h (F_{i+1/2} - F_{i-1/2}) = f_i^old
    std::vector<double> lo(m), di(m), up(m);
    const double r = dt / h;
    for (int i = 0; i < m; ++i) {
        int im = (i + m - 1) % m;
        di[i] = 1.0 + r * (p[i] - q[im]);
        up[i] = r * q[i];
        lo[i] = -r * p[im];
    }
    s.values = detail::cyclic_thomas(lo, di, up, s.values);
    s.t += dt;
    s.rho = rho;
}

inline KineticState step(KineticState s, const ModelCoefficients& model, double rho,
                         KineticScheme scheme = KineticScheme::Central) {
    step_inplace(s, model, rho, scheme);
    return s;
}

// If ||f - 1||_inf <= eps, add max(0, eps - ||f - 1||_inf) cos(theta - phi).
// Returns the amplitude added.
inline double reinforce(KineticState& s, double eps) {
    double dev = 0.0;
    for (double v : s.values) dev = std::max(dev, std::abs(v - 1.0));
    if (dev > eps) return 0.0;
    auto J = current_J(s);
    double phi = (J[0] != 0.0 || J[1] != 0.0) ? std::atan2(J[1], J[0]) : 0.0;
    double amp = std::max(0.0, eps - dev);
    for (int i = 0; i < s.m(); ++i) s.values[i] += amp * std::cos(s.theta(i) - phi);
    return amp;
}

struct FreeEnergyValue {
    double value;
    bool clipped;  // some values were <= 0 and were clipped to 1e-300
};

// rho ln rho + rho <f ln f> - Phi(rho |J|)
inline FreeEnergyValue free_energy_discrete_checked(const ModelCoefficients& model, const KineticState& s,
                                                    double rho) {
    double ent = 0.0;
    bool clipped = false;
    for (double v : s.values) {
        if (v <= 0.0) {
            clipped = true;
            v = 1e-300;
        }
        ent += v * std::log(v);
    }
    ent /= s.m();
    double value = rho * std::log(rho) + rho * ent - phi_potential(model, rho * current_J_norm(s));
    return {value, clipped};
}

inline double free_energy_discrete(const ModelCoefficients& model, const KineticState& s, double rho) {
    return free_energy_discrete_checked(model, s, rho).value;
}

struct Trace {
    std::vector<double> times;
    std::vector<double> rho;
    std::vector<double> order_parameter;
    std::vector<double> free_energy;  // empty for runs with varying rho

    // diagnostics over every step, not only recorded ones
    double max_free_energy_increase = -std::numeric_limits<double>::infinity();
    double max_mass_drift = 0.0;
    double min_value = std::numeric_limits<double>::infinity();
    bool positivity_violated = false;
    std::size_t steps = 0;
};

using StepObserver = std::function<void(const KineticState&)>;

struct RelaxationOptions {
    KineticScheme scheme = KineticScheme::Central;
    int record_every = 1;
    StepObserver observer;  // called after every step
};

inline Trace run_relaxation(const ModelCoefficients& model, KineticState f0, double rho, double t_end,
                            const RelaxationOptions& opt = {}) {
    if (std::abs(mass(f0) - 1.0) > 1e-10) throw DomainError("initial density must have mean one");
    Trace tr;
    KineticState s = std::move(f0);
    s.rho = rho;
    const double m0 = mass(s);
    double F = free_energy_discrete(model, s, rho);
    auto record = [&](double Fv) {
        tr.times.push_back(s.t);
        tr.rho.push_back(rho);
        tr.order_parameter.push_back(current_J_norm(s));
        tr.free_energy.push_back(Fv);
    };
    record(F);
    const auto nsteps = static_cast<std::size_t>(std::llround(t_end / s.dt));
    for (std::size_t k = 1; k <= nsteps; ++k) {
        step_inplace(s, model, rho, opt.scheme);
        double Jn = current_J_norm(s);
        if (!(Jn <= 1.0 + 1e-6))
            throw NumericalError("kinetic run diverged: |J| = " + std::to_string(Jn) + " at t = " + std::to_string(s.t),
                                 Jn);
        for (double v : s.values) tr.min_value = std::min(tr.min_value, v);
        if (tr.min_value < 0.0) tr.positivity_violated = true;
        tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(mass(s) - m0));
        double Fn = free_energy_discrete(model, s, rho);
        tr.max_free_energy_increase = std::max(tr.max_free_energy_increase, Fn - F);
        F = Fn;
        if (opt.observer) opt.observer(s);
        if (k % opt.record_every == 0 || k == nsteps) record(F);
    }
    tr.steps = nsteps;
    return tr;
}

struct DecayFit {
    double rate;
    double r_squared;
    std::size_t points;
};

// Least-squares slope of log(distance) against time on [t0, t1].
inline DecayFit measure_decay_rate(const std::vector<double>& times, const std::vector<double>& distance,
                                   double t0, double t1, double min_r_squared = 0.999) {
    if (times.size() != distance.size()) throw DomainError("times and distances differ in length");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0 || times[i] > t1) continue;
        if (!(distance[i] > 0.0)) continue;
        x.push_back(times[i]);
        y.push_back(std::log(distance[i]));
    }
    if (x.size() < 3) throw NumericalError("no decay detected: fewer than 3 positive samples in the window");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    double slope = sxy / sxx;
    double spread = std::exp(y.front() - y.back());
    if (syy == 0.0 || std::abs(slope) * (x.back() - x.front()) < 1e-6 || !(spread > 1.0))
        throw NumericalError("no decay detected");
    double r2 = sxy * sxy / (sxx * syy);
    if (r2 < min_r_squared)
        throw NumericalError("decay is not log-linear in the window (R^2 = " + std::to_string(r2) + ")", r2);
    return {-slope, r2, x.size()};
}

// ---------------------------------------------------------------------------
// Hysteresis protocol: rho(t) cycled slowly, with a small reinforcement of
// |J| whenever f is within eps of the uniform state.

struct HysteresisProtocol {
    double T = 500.0;
    double epsilon = 0.02;
    double t_end = 1000.0;
    double dt = 0.01;
    int m = 100;
    double perturbation = 1e-3;  // initial f = 1 + perturbation cos(theta)
    std::function<double(double)> rho_of_t;  // default 1.75 - 0.75 cos(pi t / T)
    int record_every = 10;

    double rho_at(double t) const {
        if (rho_of_t) return rho_of_t(t);
        return 1.75 - 0.75 * std::cos(M_PI * t / T);
    }
};

inline void validate(const HysteresisProtocol& p) {
    if (!(p.T > 0.0) || !(p.dt > 0.0) || !(p.t_end > 0.0)) throw DomainError("protocol needs T, dt, t_end > 0");
    if (p.m < 16) throw DomainError("protocol needs m >= 16");
    if (!(p.epsilon >= 0.0)) throw DomainError("protocol needs epsilon >= 0");
    if (p.record_every < 1) throw DomainError("record_every must be >= 1");
    const int probes = 1000;
    for (int i = 0; i <= probes; ++i)
        if (!(p.rho_at(p.t_end * i / probes) > 0.0)) throw DomainError("rho(t) must stay positive");
}

inline Trace run_hysteresis(const ModelCoefficients& model, const HysteresisProtocol& p,
                            KineticScheme scheme = KineticScheme::Central) {
    validate(p);
    KineticState s = uniform_state(p.m, p.rho_at(0.0), p.dt);
    for (int i = 0; i < p.m; ++i) s.values[i] += p.perturbation * std::cos(s.theta(i));
    Trace tr;
    const double m0 = mass(s);
    const auto nsteps = static_cast<std::size_t>(std::llround(p.t_end / p.dt));
    tr.times.push_back(0.0);
    tr.rho.push_back(p.rho_at(0.0));
    tr.order_parameter.push_back(current_J_norm(s));
    tr.free_energy.push_back(free_energy_discrete(model, s, p.rho_at(0.0)));
    for (std::size_t k = 0; k < nsteps; ++k) {
        double rho = p.rho_at(k * p.dt);
        step_inplace(s, model, rho, scheme);
        if (p.epsilon > 0.0) reinforce(s, p.epsilon);
        double Jn = current_J_norm(s);
        if (!(Jn <= 1.0 + 1e-6))
            throw NumericalError("hysteresis run diverged at t = " + std::to_string(s.t), Jn);
        for (double v : s.values) tr.min_value = std::min(tr.min_value, v);
        if (tr.min_value < 0.0) tr.positivity_violated = true;
        tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(mass(s) - m0));
        if ((k + 1) % p.record_every == 0 || k + 1 == nsteps) {
            tr.times.push_back(s.t);
            tr.rho.push_back(rho);
            tr.order_parameter.push_back(Jn);
            tr.free_energy.push_back(free_energy_discrete(model, s, rho));
        }
    }
    tr.steps = nsteps;
    return tr;
}

// ---------------------------------------------------------------------------
// Loop analysis shared by the kinetic and particle engines.

struct LoopAnalysis {
    double up_jump_rho = std::numeric_limits<double>::quiet_NaN();
    double down_jump_rho = std::numeric_limits<double>::quiet_NaN();
    double area = 0.0;          // -closed integral of c1 d rho; positive for a clockwise loop
    double floor = 0.0;         // mean c1 on the rising half with rho <= floor_rho
    double upper_plateau = 0.0; // mean c1 around the rho maximum
};

namespace detail {

// c1 resampled on a uniform rho grid along a half-cycle where rho is monotone.
inline double steepest_rho(const std::vector<double>& rho, const std::vector<double>& c, std::size_t a, std::size_t b,
                           bool rising, double drho) {
    std::vector<double> rs, cs;
    for (std::size_t i = a; i < b; ++i) {
        rs.push_back(rising ? rho[i] : -rho[i]);
        cs.push_back(c[i]);
    }
    if (rs.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    double lo = rs.front(), hi = rs.back();
    std::vector<double> grid_c;
    std::size_t j = 0;
    for (double r = lo; r <= hi; r += drho) {
        while (j + 1 < rs.size() && rs[j + 1] < r) ++j;
        if (j + 1 >= rs.size()) break;
        double w = rs[j + 1] > rs[j] ? (r - rs[j]) / (rs[j + 1] - rs[j]) : 0.0;
        grid_c.push_back(cs[j] + w * (cs[j + 1] - cs[j]));
    }
    double best = 0.0, at = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < grid_c.size(); ++i) {
        double slope = std::abs(grid_c[i + 1] - grid_c[i]);
        if (slope > best) {
            best = slope;
            at = lo + (i + 0.5) * drho;
        }
    }
    return rising ? at : -at;
}

}  // namespace detail

inline LoopAnalysis analyze_loop(const Trace& tr, double floor_rho = 1.1, double drho = 1e-3) {
    LoopAnalysis out;
    const auto& r = tr.rho;
    const auto& c = tr.order_parameter;
    if (r.size() < 4) return out;
    std::size_t peak = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    out.up_jump_rho = detail::steepest_rho(r, c, 0, peak + 1, true, drho);
    out.down_jump_rho = detail::steepest_rho(r, c, peak, r.size(), false, drho);
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) area -= 0.5 * (c[i] + c[i + 1]) * (r[i + 1] - r[i]);
    out.area = area;
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i <= peak; ++i)
        if (r[i] <= floor_rho) { sum += c[i]; ++cnt; }
    out.floor = cnt ? sum / cnt : std::numeric_limits<double>::quiet_NaN();
    sum = 0.0;
    cnt = 0;
    double rmax = r[peak];
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] >= rmax - 0.01) { sum += c[i]; ++cnt; }
    out.upper_plateau = cnt ? sum / cnt : 0.0;
    return out;
}

}  // namespace phaselab
