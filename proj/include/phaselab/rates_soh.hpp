#pragma once

// Relaxation rates at uniform and VMF equilibria, diffusion coefficient of
// the disordered regime, and the coefficients of the self-organized
// hydrodynamic (SOH) system.

#include <cmath>
#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "phaselab/equilibria.hpp"
#include "phaselab/errors.hpp"
#include "phaselab/model.hpp"
#include "phaselab/spectral.hpp"
#include "phaselab/vmf.hpp"

namespace phaselab {

// lambda_0 = (n-1) tau_0 (1 - rho/rho_c)
inline double rate_uniform(const ModelCoefficients& m, int n, double rho) {
    double rc = critical_density_rho_c(m, n);
    if (!(rho > 0.0) || !(rho < rc))
        throw DomainError("rate_uniform needs 0 < rho < rho_c = " + std::to_string(rc));
    double f = std::isfinite(rc) ? 1.0 - rho / rc : 1.0;
    return (n - 1) * m.tau0() * f;
}

// D = 1 / ((n-1) n tau_0 (1 - rho/rho_c))
inline double diffusion_coefficient(const ModelCoefficients& m, int n, double rho) {
    if (m.preset == Preset::Constant) throw DomainError("no disordered region: rho_c = 0 for a constant model");
    double rc = critical_density_rho_c(m, n);
    if (!(rho >= 0.0) || !(rho < rc))
        throw DomainError("diffusion_coefficient needs 0 <= rho < rho_c = " + std::to_string(rc));
    double f = std::isfinite(rc) ? 1.0 - rho / rc : 1.0;
    return 1.0 / ((n - 1) * n * m.tau0() * f);
}

// lambda = (c tau(j) / j') Lambda_kappa (j/c)'
inline double rate_vmf(const ModelCoefficients& m, int n, double rho, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("rate_vmf needs kappa > 0");
    auto v = vmf_moments(kappa, n);
    double j = j_of_kappa(m, kappa);
    double jp = j_prime_of_kappa(m, kappa);
    double defect = std::abs(rho * v.c - j);
    if (defect > 1e-8 * std::max(1.0, j)) throw ConsistencyError("(rho, kappa) is not an equilibrium");
    double slope = ratio_slope_from(kappa, n, j, jp, v);
    if (classify_slope(slope, rho) != Stability::Stable)
        throw DomainError("rate_vmf needs a stable equilibrium; (j/c)' = " + std::to_string(slope));
    return v.c * m.tau(j) / jp * poincare_constant(kappa, n) * slope;
}

// Closed form of the VMF rate for the hysteresis model.
inline double rate_vmf_hysteresis_closed(int n, double kappa) {
    double c = order_parameter_c(kappa, n);
    double j = 2.0 * kappa / (std::sqrt(1.0 + 4.0 * kappa) + 1.0);
    return poincare_constant(kappa, n) / (1.0 + j) *
           (1.0 - (1.0 / c - c - (n - 1) / kappa) * j * (1.0 + 2.0 * j));
}

struct SohCoefficients {
    double rho = 0.0;
    double kappa = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double theta = 0.0;
    double theta_alt = 0.0;       // kappa-only expression of Theta
    bool theta_diverging = false; // near a fold, where d kappa / d rho blows up
    double delta = 0.0;
    bool hyperbolic = false;
    double dkappa_drho = 0.0;
    double lambda_kappa_rate = std::numeric_limits<double>::quiet_NaN();
    double lambda0_rate = std::numeric_limits<double>::quiet_NaN();
    double k2 = 0.0;              // kernel second moment, carried through unchanged
    double c_prime_defect = 0.0;  // |identity for dc/dkappa - quadrature c'|
};

enum class BranchSelect { Largest, Smallest };

struct SohOptions {
    BranchSelect branch = BranchSelect::Largest;
    bool with_rate = true;
    double k2 = 0.0;
    int gci_grid = 2048;
    double divergence_slope = 1e-6;  // |(j/c)'| below this * (1 + rho) flags divergence
};

// Coefficients at a given equilibrium concentration kappa (rho = j/c).
inline SohCoefficients soh_coefficients_at_kappa(const ModelCoefficients& m, int n, double kappa,
                                                 const SohOptions& opt = {}) {
    if (!(kappa > 0.0)) throw DomainError("SOH coefficients need kappa > 0");
    SohCoefficients s;
    s.kappa = kappa;
    s.k2 = opt.k2;
    auto v = vmf_moments(kappa, n);
    s.c1 = v.c;
    s.c2 = c_tilde(kappa, n, opt.gci_grid);
    if (m.preset == Preset::Constant) {
        // kappa = nu/tau does not depend on rho
        s.rho = std::numeric_limits<double>::quiet_NaN();
        s.dkappa_drho = 0.0;
        s.theta = s.theta_alt = 1.0 / kappa;
        s.delta = m.nu(0.0) / v.c * ((n - 1) / kappa + s.c2);
        s.hyperbolic = s.theta > 0.0;
        return s;
    }
    double j = j_of_kappa(m, kappa);
    double jp = j_prime_of_kappa(m, kappa);
    s.rho = j / v.c;
    double drho = ratio_slope_from(kappa, n, j, jp, v);
    if (classify_slope(drho, s.rho) != Stability::Stable)
        throw DomainError("SOH coefficients need a stable branch; (j/c)' = " + std::to_string(drho));
    s.dkappa_drho = 1.0 / drho;
    s.theta = 1.0 / kappa + (s.c2 - v.c) * (s.rho / kappa) * s.dkappa_drho;
    double q = kappa * jp / j;
    s.c_prime_defect = std::abs(c_prime_identity(kappa, v.c, n) - v.c_prime);
    s.theta_alt = (n - kappa / v.c + kappa * s.c2 - 1.0 + q) / (kappa * (n - kappa / v.c + kappa * v.c - 1.0 + q));
    s.theta_diverging = std::abs(drho) < opt.divergence_slope * (1.0 + s.rho);
    s.delta = m.nu(j) / v.c * ((n - 1) / kappa + s.c2);
    s.hyperbolic = s.theta > 0.0;
    if (opt.with_rate) s.lambda_kappa_rate = v.c * m.tau(j) / jp * poincare_constant(kappa, n) * drho;
    double rc = critical_density_rho_c(m, n);
    if (s.rho < rc) s.lambda0_rate = rate_uniform(m, n, s.rho);
    return s;
}

inline SohCoefficients soh_coefficients(const ModelCoefficients& m, int n, double rho, const SohOptions& opt = {},
                                        const RatioTable* table = nullptr) {
    if (m.preset == Preset::Constant) {
        auto s = soh_coefficients_at_kappa(m, n, m.k(0.0), opt);
        s.rho = rho;
        return s;
    }
    auto sol = table ? solve_compatibility(m, n, rho, *table) : solve_compatibility(m, n, rho);
    std::vector<double> stable;
    for (std::size_t i = 1; i < sol.roots.size(); ++i)
        if (sol.roots[i].stability == Stability::Stable) stable.push_back(sol.roots[i].kappa);
    if (stable.empty()) throw DomainError("no stable ordered equilibrium at rho=" + std::to_string(rho));
    double kappa = opt.branch == BranchSelect::Largest ? stable.back() : stable.front();
    auto s = soh_coefficients_at_kappa(m, n, kappa, opt);
    s.rho = rho;
    return s;
}

struct HyperbolicityScan {
    std::vector<SohCoefficients> rows;
    std::vector<std::pair<double, std::string>> failures;  // (rho, message)
    std::vector<double> sign_changes;                      // midpoints between rows where Theta changes sign
};

inline HyperbolicityScan hyperbolicity_scan(const ModelCoefficients& m, int n, const std::vector<double>& rho_grid,
                                            const SohOptions& opt = {}) {
    HyperbolicityScan out;
    if (rho_grid.empty()) return out;
    std::optional<RatioTable> table;
    if (m.preset != Preset::Constant)
        table = build_ratio_table(m, n, *std::max_element(rho_grid.begin(), rho_grid.end()));
    for (double rho : rho_grid) {
        try {
            out.rows.push_back(soh_coefficients(m, n, rho, opt, table ? &*table : nullptr));
        } catch (const std::exception& e) {
            out.failures.emplace_back(rho, e.what());
        }
    }
    for (std::size_t i = 0; i + 1 < out.rows.size(); ++i)
        if ((out.rows[i].theta > 0.0) != (out.rows[i + 1].theta > 0.0))
            out.sign_changes.push_back(0.5 * (out.rows[i].rho + out.rows[i + 1].rho));
    return out;
}

}  // namespace phaselab
