#pragma once

// Particle system on the circle: angles theta_i, J = mean of (cos, sin),
//   d theta_i = -nu(rho|J|) sin(theta_i - phi_J) dt + sqrt(2 tau(rho|J|)) dW_i
// advanced by splitting (drift flow, then Brownian increment).

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "phaselab/errors.hpp"
#include "phaselab/kinetic.hpp"
#include "phaselab/model.hpp"

namespace phaselab {

// Counter-based generator: every draw is a pure function of
// (seed, particle, step, stream), so results do not depend on ordering.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t particle, std::uint64_t step, std::uint64_t stream) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ particle);
    h = splitmix64(h ^ (step * 4 + stream));
    return h;
}

// uniform on (0, 1), never 0
inline double uniform(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

inline double normal(std::uint64_t seed, std::uint64_t particle, std::uint64_t step, std::uint64_t stream) {
    double u1 = uniform(hash(seed, particle, step, stream));
    double u2 = uniform(hash(seed, particle, step, stream + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace rng

enum class DriftScheme { Exact, Euler };

struct ParticleEnsemble {
    std::vector<double> angles;
    std::uint64_t seed = 0;
    double t = 0.0;
    std::uint64_t step_index = 0;

    std::size_t N() const { return angles.size(); }
};

inline ParticleEnsemble init_uniform(std::size_t N, std::uint64_t seed) {
    if (N < 1) throw DomainError("init_uniform needs N >= 1");
    ParticleEnsemble e;
    e.seed = seed;
    e.angles.resize(N);
    // stream 2 of step "-1" is reserved for initial positions
    const std::uint64_t init_step = std::numeric_limits<std::uint64_t>::max() / 4;
    for (std::size_t i = 0; i < N; ++i) e.angles[i] = 2.0 * M_PI * rng::uniform(rng::hash(seed, i, init_step, 2));
    return e;
}

// test hook: prescribed angles
inline ParticleEnsemble from_angles(std::vector<double> angles, std::uint64_t seed = 0) {
    if (angles.empty()) throw DomainError("ensemble needs at least one particle");
    ParticleEnsemble e;
    e.angles = std::move(angles);
    e.seed = seed;
    return e;
}

inline std::array<double, 2> current_J(const ParticleEnsemble& e) {
    double x = 0.0, y = 0.0;
    for (double a : e.angles) {
        x += std::cos(a);
        y += std::sin(a);
    }
    double inv = 1.0 / static_cast<double>(e.N());
    return {x * inv, y * inv};
}

inline double current_J_norm(const ParticleEnsemble& e) {
    auto J = current_J(e);
    return std::hypot(J[0], J[1]);
}

inline void step_splitting(ParticleEnsemble& e, const ModelCoefficients& model, double rho, double dt,
                           DriftScheme drift = DriftScheme::Exact) {
    if (!(dt > 0.0)) throw DomainError("step_splitting needs dt > 0");
    auto J = current_J(e);
    double Jn = std::hypot(J[0], J[1]);
    double phi = Jn > 0.0 ? std::atan2(J[1], J[0]) : 0.0;
    double a = rho * Jn;
    double nu = model.nu(a), tau = model.tau(a);
    double decay = std::exp(-nu * dt);
    double sigma = std::sqrt(2.0 * tau * dt);
    const std::uint64_t k = e.step_index;
    for (std::size_t i = 0; i < e.N(); ++i) {
        double psi = e.angles[i] - phi;
        if (drift == DriftScheme::Exact) {
            // tan(psi/2) decays like exp(-nu t)
            psi = 2.0 * std::atan2(decay * std::sin(0.5 * psi), std::cos(0.5 * psi));
        } else {
            psi -= nu * dt * std::sin(psi);
        }
        if (sigma > 0.0) psi += sigma * rng::normal(e.seed, i, k, 0);
        double th = std::remainder(psi + phi, 2.0 * M_PI);
        e.angles[i] = th;
    }
    e.t += dt;
    ++e.step_index;
}

// Mean of |J| for N uniform unit vectors, large-N form sqrt(pi) / (2 sqrt(N)).
inline double rayleigh_baseline(std::size_t N) {
    if (N < 1) throw DomainError("rayleigh_baseline needs N >= 1");
    return std::sqrt(M_PI) / (2.0 * std::sqrt(static_cast<double>(N)));
}

// CDF of |J| under the Rayleigh law with parameter 1/sqrt(2N).
inline double rayleigh_cdf(double r, std::size_t N) {
    if (r <= 0.0) return 0.0;
    return 1.0 - std::exp(-static_cast<double>(N) * r * r);
}

struct ParticleRunOptions {
    DriftScheme drift = DriftScheme::Exact;
    int realizations = 1;  // > 1 averages |J| over seeds seed, seed+1, ...
    ParticleEnsemble* final_state = nullptr;  // receives the last ensemble of the first realization
};

inline Trace run_hysteresis_particles(const ModelCoefficients& model, const HysteresisProtocol& p, std::size_t N,
                                      std::uint64_t seed, const ParticleRunOptions& opt = {}) {
    validate(p);
    if (N < 1) throw DomainError("particle run needs N >= 1");
    if (opt.realizations < 1) throw DomainError("realizations must be >= 1");
    const auto nsteps = static_cast<std::size_t>(std::llround(p.t_end / p.dt));
    Trace tr;
    for (int r = 0; r < opt.realizations; ++r) {
        auto e = init_uniform(N, seed + static_cast<std::uint64_t>(r));
        std::size_t row = 0;
        auto record = [&](double t, double rho, double c) {
            if (r == 0) {
                tr.times.push_back(t);
                tr.rho.push_back(rho);
                tr.order_parameter.push_back(c / opt.realizations);
            } else {
                tr.order_parameter[row] += c / opt.realizations;
            }
            ++row;
        };
        record(0.0, p.rho_at(0.0), current_J_norm(e));
        for (std::size_t k = 0; k < nsteps; ++k) {
            double rho = p.rho_at(k * p.dt);
            step_splitting(e, model, rho, p.dt, opt.drift);
            if ((k + 1) % p.record_every == 0 || k + 1 == nsteps) record(e.t, rho, current_J_norm(e));
        }
        if (r == 0 && opt.final_state) *opt.final_state = e;
    }
    tr.steps = nsteps;
    return tr;
}

// Fixed-rho run; returns |J| at every recorded step.
inline Trace run_particles(const ModelCoefficients& model, ParticleEnsemble e, double rho, double t_end, double dt,
                           int record_every = 1, DriftScheme drift = DriftScheme::Exact) {
    HysteresisProtocol p;
    p.dt = dt;
    p.t_end = t_end;
    p.record_every = record_every;
    p.rho_of_t = [rho](double) { return rho; };
    validate(p);
    const auto nsteps = static_cast<std::size_t>(std::llround(t_end / dt));
    Trace tr;
    tr.times.push_back(e.t);
    tr.rho.push_back(rho);
    tr.order_parameter.push_back(current_J_norm(e));
    for (std::size_t k = 0; k < nsteps; ++k) {
        step_splitting(e, model, rho, dt, drift);
        if ((k + 1) % record_every == 0 || k + 1 == nsteps) {
            tr.times.push_back(e.t);
            tr.rho.push_back(rho);
            tr.order_parameter.push_back(current_J_norm(e));
        }
    }
    tr.steps = nsteps;
    return tr;
}

inline void write_snapshot_csv(std::ostream& os, const ParticleEnsemble& e) {
    os << "index,angle\n";
    os.precision(17);
    for (std::size_t i = 0; i < e.N(); ++i) os << i << ',' << e.angles[i] << '\n';
}

}  // namespace phaselab
