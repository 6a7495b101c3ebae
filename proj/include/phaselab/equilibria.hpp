#pragma once

// Equilibria of the homogeneous equation: solutions of rho c(kappa) = j(kappa),
// critical densities, stability, phase diagrams and free energies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "phaselab/errors.hpp"
#include "phaselab/model.hpp"
#include "phaselab/vmf.hpp"

namespace phaselab {

enum class Stability { Stable, Unstable, Marginal };

inline const char* stability_name(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Marginal: return "marginal";
    }
    return "?";
}

struct CompatibilityRoot {
    double kappa = 0.0;
    double rho = 0.0;
    double c1 = 0.0;
    Stability stability = Stability::Marginal;
    double slope = std::numeric_limits<double>::quiet_NaN();  // d(j/c)/dkappa; NaN for kappa = 0
};

struct CompatibilityResult {
    double rho = 0.0;
    std::vector<CompatibilityRoot> roots;  // roots[0] is the uniform state
    std::vector<std::string> warnings;

    std::size_t positive_count() const { return roots.empty() ? 0 : roots.size() - 1; }
};

struct CriticalDensities {
    double rho_c = 0.0;
    double rho_star = 0.0;
    double kappa_star = 0.0;
};

struct ScanOptions {
    int nodes = 2000;
    double kappa_min = 1e-6;
    double headroom = 10.0;  // scan until j/c exceeds headroom * rho
};

inline double marginal_tolerance(double rho) { return 1e-8 * (1.0 + rho); }

// ---------------------------------------------------------------------------
// j/c and its derivative

inline double ratio_j_over_c(const ModelCoefficients& m, int n, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("ratio j/c needs kappa > 0");
    double j = j_of_kappa(m, kappa);
    return j / order_parameter_c(kappa, n);
}

// (j/c)' = (j' c - j c') / c^2, regrouped as j' (c - k c') + (k j' - j) c'
// so that both terms stay accurate as kappa -> 0.
inline double ratio_slope_from(double kappa, int n, double j, double jp, const VmfMoments& v) {
    return (jp * c_minus_kappa_c_prime(kappa, n) + (kappa * jp - j) * v.c_prime) / (v.c * v.c);
}

inline double ratio_j_over_c_slope(const ModelCoefficients& m, int n, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("ratio slope needs kappa > 0");
    auto v = vmf_moments(kappa, n);
    return ratio_slope_from(kappa, n, j_of_kappa(m, kappa), j_prime_of_kappa(m, kappa), v);
}

// Limit of j/c at kappa -> 0: n / k'(0), infinite if k'(0) = 0.
inline double critical_density_rho_c(const ModelCoefficients& m, int n) {
    require_j(m);
    double kp0 = m.k_prime(0.0);
    if (!(kp0 > 0.0)) return std::numeric_limits<double>::infinity();
    return n / kp0;
}

namespace detail {

// Upper end of the kappa scan: j/c(kappa_hi) > target.
inline double scan_upper(const ModelCoefficients& m, int n, double target) {
    if (std::isfinite(m.kappa_max)) {
        // j/c stays bounded here; if the target is never reached, scan up to
        // just below kappa_max
        double gap = 0.5 * m.kappa_max;
        for (int it = 0; it < 30; ++it) {
            double kap = m.kappa_max - gap;
            if (ratio_j_over_c(m, n, kap) > target) return kap;
            gap *= 0.5;
        }
        return m.kappa_max - gap;
    }
    double kap = 1.0;
    while (ratio_j_over_c(m, n, kap) <= target) {
        kap *= 2.0;
        if (kap > 1e12) throw NumericalError("j/c does not exceed the scan target", target);
    }
    return kap;
}

// 2000 nodes: half log-spaced from kappa_min, half linear up to kappa_hi.
inline std::vector<double> scan_nodes(double kappa_lo, double kappa_hi, int count) {
    std::vector<double> x;
    int half = count / 2;
    double la = std::log(kappa_lo), lb = std::log(kappa_hi);
    for (int i = 0; i < half; ++i) x.push_back(std::exp(la + (lb - la) * i / (half - 1)));
    for (int i = 1; i <= count - half; ++i) x.push_back(kappa_lo + (kappa_hi - kappa_lo) * i / (count - half));
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

template <class F>
double refine_root(F&& f, double a, double b, double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return 0.5 * (r.first + r.second);
}

struct CriticalPoint {
    double kappa;
    double value;  // j/c at kappa
    bool minimum;
};

inline std::vector<CriticalPoint> critical_points_in(const ModelCoefficients& m, int n, double kappa_hi,
                                                     const ScanOptions& opt) {
    auto x = scan_nodes(opt.kappa_min, kappa_hi, opt.nodes);
    auto slope = [&](double k) { return ratio_j_over_c_slope(m, n, k); };
    std::vector<double> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = slope(x[i]);
    std::vector<CriticalPoint> out;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (s[i] == 0.0 || (s[i] < 0.0) != (s[i + 1] < 0.0)) {
            if (s[i + 1] == 0.0) continue;
            double k = refine_root(slope, x[i], x[i + 1], s[i], s[i + 1]);
            out.push_back({k, ratio_j_over_c(m, n, k), s[i] < 0.0});
        }
    }
    return out;
}

inline double reference_density(const ModelCoefficients& m, int n) {
    double k1 = std::isfinite(m.kappa_max) ? std::min(1.0, 0.5 * m.kappa_max) : 1.0;
    return ratio_j_over_c(m, n, k1);
}

}  // namespace detail

// Interior extrema of j/c over the kappa range relevant to densities up to rho_max.
inline std::vector<detail::CriticalPoint> ratio_critical_points(const ModelCoefficients& m, int n,
                                                                double rho_max, const ScanOptions& opt = {}) {
    double hi = detail::scan_upper(m, n, opt.headroom * rho_max);
    return detail::critical_points_in(m, n, hi, opt);
}

inline CriticalDensities critical_densities(const ModelCoefficients& m, int n, const ScanOptions& opt = {}) {
    require_j(m);
    CriticalDensities cd;
    cd.rho_c = critical_density_rho_c(m, n);
    double ref = detail::reference_density(m, n);
    if (std::isfinite(cd.rho_c)) ref = std::max(ref, cd.rho_c);
    auto cps = ratio_critical_points(m, n, ref, opt);
    cd.rho_star = cd.rho_c;
    cd.kappa_star = 0.0;
    for (const auto& cp : cps) {
        if (cp.minimum && cp.value < cd.rho_star) {
            cd.rho_star = cp.value;
            cd.kappa_star = cp.kappa;
        }
    }
    if (!std::isfinite(cd.rho_star))
        throw NumericalError("no minimum of j/c found although rho_c is infinite");
    return cd;
}

inline Stability uniform_stability(const ModelCoefficients& m, int n, double rho) {
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
    double rc = critical_density_rho_c(m, n);
    if (std::isfinite(rc) && std::abs(rho - rc) <= 1e-12 * rc) return Stability::Marginal;
    return rho < rc ? Stability::Stable : Stability::Unstable;
}

inline Stability classify_slope(double slope, double rho) {
    double tol = marginal_tolerance(rho);
    if (slope > tol) return Stability::Stable;
    if (slope < -tol) return Stability::Unstable;
    return Stability::Marginal;
}

// j/c sampled once on the scan nodes; reused for every density up to rho_max.
struct RatioTable {
    std::vector<double> kappa;
    std::vector<double> ratio;
    double rho_max = 0.0;
};

inline RatioTable build_ratio_table(const ModelCoefficients& m, int n, double rho_max, const ScanOptions& opt = {}) {
    require_j(m);
    RatioTable t;
    t.rho_max = rho_max;
    double hi = detail::scan_upper(m, n, opt.headroom * rho_max);
    t.kappa = detail::scan_nodes(opt.kappa_min, hi, opt.nodes);
    t.ratio.resize(t.kappa.size());
    for (std::size_t i = 0; i < t.kappa.size(); ++i) t.ratio[i] = ratio_j_over_c(m, n, t.kappa[i]);
    // add the interior extrema as nodes, so that a pair of roots close to a
    // fold still straddles a node
    std::vector<double> extra;
    auto slope = [&](double k) { return ratio_j_over_c_slope(m, n, k); };
    for (std::size_t i = 1; i + 1 < t.kappa.size(); ++i) {
        double a = t.ratio[i] - t.ratio[i - 1], b = t.ratio[i + 1] - t.ratio[i];
        if ((a < 0.0) == (b < 0.0)) continue;
        double sa = slope(t.kappa[i - 1]), sb = slope(t.kappa[i + 1]);
        if ((sa < 0.0) == (sb < 0.0)) continue;
        extra.push_back(detail::refine_root(slope, t.kappa[i - 1], t.kappa[i + 1], sa, sb));
    }
    if (!extra.empty()) {
        std::vector<std::pair<double, double>> kr;
        for (std::size_t i = 0; i < t.kappa.size(); ++i) kr.emplace_back(t.kappa[i], t.ratio[i]);
        for (double k : extra) kr.emplace_back(k, ratio_j_over_c(m, n, k));
        std::sort(kr.begin(), kr.end());
        t.kappa.clear();
        t.ratio.clear();
        for (const auto& [k, r] : kr) {
            if (!t.kappa.empty() && k == t.kappa.back()) continue;
            t.kappa.push_back(k);
            t.ratio.push_back(r);
        }
    }
    return t;
}

inline CompatibilityResult solve_compatibility(const ModelCoefficients& m, int n, double rho,
                                               const RatioTable& table) {
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
    if (rho > table.rho_max) throw DomainError("rho exceeds the range of the precomputed j/c table");
    require_j(m);
    CompatibilityResult res;
    res.rho = rho;
    CompatibilityRoot zero;
    zero.kappa = 0.0;
    zero.rho = rho;
    zero.c1 = 0.0;
    zero.stability = uniform_stability(m, n, rho);
    res.roots.push_back(zero);

    const auto& x = table.kappa;
    auto f = [&](double k) { return ratio_j_over_c(m, n, k) - rho; };
    std::vector<double> fv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) fv[i] = table.ratio[i] - rho;

    std::size_t last_cell = static_cast<std::size_t>(-2);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        bool change = (fv[i] == 0.0) || ((fv[i] < 0.0) != (fv[i + 1] < 0.0) && fv[i + 1] != 0.0);
        if (!change) continue;
        if (i == last_cell + 1)
            res.warnings.push_back("roots in adjacent scan cells near kappa=" + std::to_string(x[i]) +
                                   "; scan resolution limit reached");
        last_cell = i;
        double k = detail::refine_root(f, x[i], x[i + 1], fv[i], fv[i + 1]);
        auto v = vmf_moments(k, n);
        double j = j_of_kappa(m, k);
        double resid = std::abs(rho * v.c - j);
        if (resid > 1e-10 * std::max(1.0, j))
            res.warnings.push_back("root at kappa=" + std::to_string(k) + " has residual " + std::to_string(resid));
        CompatibilityRoot r;
        r.kappa = k;
        r.rho = rho;
        r.c1 = v.c;
        r.slope = ratio_j_over_c_slope(m, n, k);
        r.stability = classify_slope(r.slope, rho);
        res.roots.push_back(r);
    }
    return res;
}

inline CompatibilityResult solve_compatibility(const ModelCoefficients& m, int n, double rho,
                                               const ScanOptions& opt = {}) {
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
    return solve_compatibility(m, n, rho, build_ratio_table(m, n, rho, opt));
}

// ---------------------------------------------------------------------------
// Free energy of an equilibrium rho M_kappa:
//   rho ln rho + rho (kappa c - ln Z) - Phi(j(kappa))

inline double equilibrium_free_energy(const ModelCoefficients& m, int n, double rho, double kappa) {
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
    if (kappa == 0.0) return rho * std::log(rho);
    auto v = vmf_moments(kappa, n);
    double j = j_of_kappa(m, kappa);
    double defect = std::abs(rho * v.c - j);
    if (defect > 1e-8 * std::max(1.0, j))
        throw ConsistencyError("(rho, kappa) = (" + std::to_string(rho) + ", " + std::to_string(kappa) +
                               ") violates rho c = j by " + std::to_string(defect));
    return rho * std::log(rho) + rho * (kappa * v.c - v.log_z) - phi_potential(m, j);
}

// Density rho_1 in (rho_*, rho_c) where the stable branch and the uniform
// state have equal free energy.  Empty for second-order transitions.
struct FreeEnergyCrossing {
    double rho1;
    double kappa1;
    int sign_changes;  // on the sampling grid; 1 means unique
};

inline std::optional<FreeEnergyCrossing> free_energy_crossing(const ModelCoefficients& m, int n) {
    auto cd = critical_densities(m, n);
    if (!(cd.rho_star < cd.rho_c) || !std::isfinite(cd.rho_c)) return std::nullopt;
    auto top = solve_compatibility(m, n, cd.rho_c);
    double kappa_c = top.roots.back().kappa;
    auto gap = [&](double k) {
        double rho = ratio_j_over_c(m, n, k);
        return equilibrium_free_energy(m, n, rho, k) - rho * std::log(rho);
    };
    const int samples = 200;
    std::vector<double> ks(samples + 1), gs(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        ks[i] = cd.kappa_star + (kappa_c - cd.kappa_star) * i / samples;
        gs[i] = gap(ks[i]);
    }
    int changes = 0, cell = -1;
    for (int i = 0; i < samples; ++i)
        if ((gs[i] < 0.0) != (gs[i + 1] < 0.0)) {
            ++changes;
            if (cell < 0) cell = i;
        }
    if (cell < 0) return std::nullopt;
    double k = detail::refine_root(gap, ks[cell], ks[cell + 1], gs[cell], gs[cell + 1]);
    return FreeEnergyCrossing{ratio_j_over_c(m, n, k), k, changes};
}

// ---------------------------------------------------------------------------
// Phase diagram

struct BranchPoint {
    double rho;
    double kappa;
    double c1;
    Stability stability;
    double free_energy;
};

struct Branch {
    int id = 0;                 // 0 is the uniform state
    double kappa_lo = 0.0;      // kappa interval of this monotone piece of j/c
    double kappa_hi = 0.0;
    std::vector<BranchPoint> points;
};

struct FoldEvent {
    int branch;
    double rho_last_good;
    double kappa_last_good;
    std::string message;
};

struct PhaseDiagram {
    std::vector<double> rho_grid;
    std::vector<Branch> branches;
    std::vector<FoldEvent> folds;
    std::vector<std::string> warnings;
};

inline PhaseDiagram phase_diagram(const ModelCoefficients& m, int n, const std::vector<double>& rho_grid,
                                  const ScanOptions& opt = {}) {
    if (rho_grid.empty()) throw DomainError("rho grid is empty");
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        if (!(rho_grid[i] > 0.0)) throw DomainError("rho grid must be positive");
        if (i > 0 && !(rho_grid[i] > rho_grid[i - 1])) throw DomainError("rho grid must be increasing");
    }
    PhaseDiagram pd;
    pd.rho_grid = rho_grid;
    auto cps = ratio_critical_points(m, n, rho_grid.back(), opt);
    std::vector<double> edges{0.0};
    for (const auto& cp : cps) edges.push_back(cp.kappa);
    edges.push_back(std::numeric_limits<double>::infinity());

    pd.branches.resize(edges.size());
    pd.branches[0].id = 0;
    for (std::size_t b = 1; b < edges.size(); ++b) {
        pd.branches[b].id = static_cast<int>(b);
        pd.branches[b].kappa_lo = edges[b - 1];
        pd.branches[b].kappa_hi = edges[b];
    }

    std::vector<std::vector<bool>> present(edges.size(), std::vector<bool>(rho_grid.size(), false));
    auto table = build_ratio_table(m, n, rho_grid.back(), opt);
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        double rho = rho_grid[i];
        auto sol = solve_compatibility(m, n, rho, table);
        for (auto& w : sol.warnings) pd.warnings.push_back("rho=" + std::to_string(rho) + ": " + w);
        pd.branches[0].points.push_back({rho, 0.0, 0.0, sol.roots[0].stability, rho * std::log(rho)});
        present[0][i] = true;
        for (std::size_t r = 1; r < sol.roots.size(); ++r) {
            const auto& root = sol.roots[r];
            std::size_t b = 1;
            while (b + 1 < edges.size() && root.kappa > edges[b]) ++b;
            double F = equilibrium_free_energy(m, n, rho, root.kappa);
            pd.branches[b].points.push_back({rho, root.kappa, root.c1, root.stability, F});
            present[b][i] = true;
        }
    }
    for (std::size_t b = 1; b < edges.size(); ++b) {
        const auto& br = pd.branches[b];
        std::size_t p = 0;
        for (std::size_t i = 0; i + 1 < rho_grid.size(); ++i) {
            if (present[b][i] && !present[b][i + 1]) {
                const auto& pt = br.points[p];
                pd.folds.push_back({br.id, pt.rho, pt.kappa,
                                    "branch ends between rho=" + std::to_string(rho_grid[i]) + " and rho=" +
                                        std::to_string(rho_grid[i + 1])});
            }
            if (!present[b][i] && present[b][i + 1]) {
                const auto& pt = br.points[p];
                pd.folds.push_back({br.id, pt.rho, pt.kappa,
                                    "branch begins between rho=" + std::to_string(rho_grid[i]) + " and rho=" +
                                        std::to_string(rho_grid[i + 1])});
            }
            if (present[b][i]) ++p;
        }
    }
    return pd;
}

// ---------------------------------------------------------------------------
// Critical exponent

struct ExponentFit {
    std::optional<double> beta;
    std::optional<double> alpha0;
    double r_squared = 0.0;
    std::string reason;  // set when no exponent is defined
};

inline ExponentFit critical_exponent_fit(const ModelCoefficients& m, int n, double window_lo = 1e-4,
                                         double window_hi = 1e-3, int samples = 12) {
    ExponentFit out;
    auto cd = critical_densities(m, n);
    if (!std::isfinite(cd.rho_c)) {
        out.reason = "rho_c is infinite";
        return out;
    }
    if (cd.rho_star < cd.rho_c * (1.0 - 1e-9)) {
        out.reason = "first-order transition: rho_* = " + std::to_string(cd.rho_star) + " < rho_c = " +
                     std::to_string(cd.rho_c);
        return out;
    }
    std::vector<double> lx, ly;
    auto table = build_ratio_table(m, n, cd.rho_c * (1.0 + window_hi));
    for (int i = 0; i < samples; ++i) {
        double d = cd.rho_c * window_lo * std::pow(window_hi / window_lo, double(i) / (samples - 1));
        auto sol = solve_compatibility(m, n, cd.rho_c + d, table);
        if (sol.positive_count() == 0) throw NumericalError("no ordered root just above rho_c", d);
        lx.push_back(std::log(d));
        ly.push_back(std::log(sol.roots.back().c1));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) { mx += lx[i]; my += ly[i]; }
    mx /= lx.size();
    my /= ly.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    double slope = sxy / sxx;
    out.beta = slope;
    out.alpha0 = std::exp(my - slope * mx);
    out.r_squared = sxy * sxy / (sxx * syy);
    return out;
}

// Second-order sufficient condition: k(|J|)/|J| non-increasing on a |J| grid
// implies (j/c)' > 0.  Returns true when both hold on the sampled grids.
struct SecondOrderCheck {
    bool k_over_J_nonincreasing;
    bool ratio_increasing;
};

inline SecondOrderCheck check_second_order_criterion(const ModelCoefficients& m, int n, double kappa_hi = 20.0,
                                                     int samples = 200) {
    SecondOrderCheck out{true, true};
    double jhi = j_of_kappa(m, std::min(kappa_hi, 0.999 * m.kappa_max));
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= samples; ++i) {
        double J = jhi * i / samples;
        double q = m.k(J) / J;
        if (q > prev * (1.0 + 1e-12)) out.k_over_J_nonincreasing = false;
        prev = q;
    }
    for (int i = 1; i <= samples; ++i) {
        double kap = std::min(kappa_hi, 0.999 * m.kappa_max) * i / samples;
        if (!(ratio_j_over_c_slope(m, n, kap) > 0.0)) out.ratio_increasing = false;
    }
    return out;
}

}  // namespace phaselab
