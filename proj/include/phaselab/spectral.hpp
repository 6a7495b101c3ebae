#pragma once

// Weighted Poincare constant of the VMF measure and the generalized
// collisional invariant h_kappa.
//
// Lambda_kappa: the operator -(1/M) div(M grad g) is conjugated by M^{1/2} to
// the Schroedinger form -Delta + V with
//     V = kappa^2 sin^2(theta)/4 - (n-1) kappa cos(theta)/2,
// which is diagonalised sector by sector in a zonal harmonic basis.  In
// sector l (harmonic degree on the equatorial sphere) the basis is
// sin^l(theta) C_k^{(l+(n-2)/2)}(cos theta), on which cos(theta) acts through
// the three-term Gegenbauer recurrence.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phaselab/errors.hpp"
#include "phaselab/vmf.hpp"

namespace phaselab {

namespace detail {

// Orthonormal Gegenbauer recurrence coefficient a_k (x p_{k-1} contains a_k p_k).
inline double gegenbauer_offdiag(double lam, int k) {
    if (lam == 0.0 && k == 1) return std::sqrt(0.5);
    return std::sqrt(k * (k + 2.0 * lam - 1.0) / (4.0 * (k + lam) * (k + lam - 1.0)));
}

inline Eigen::VectorXd sector_eigenvalues(double kappa, int n, int sector, int size) {
    const double lam = sector + 0.5 * (n - 2);
    // X is built one size larger so X^2 is exact on the retained block.
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(size + 1, size + 1);
    for (int k = 1; k <= size; ++k) {
        double a = gegenbauer_offdiag(lam, k);
        X(k - 1, k) = a;
        X(k, k - 1) = a;
    }
    Eigen::MatrixXd X2 = (X * X).topLeftCorner(size, size);
    Eigen::MatrixXd H = -0.25 * kappa * kappa * X2 - 0.5 * (n - 1) * kappa * X.topLeftCorner(size, size);
    for (int k = 0; k < size; ++k) {
        double l = k + sector;
        H(k, k) += l * (l + n - 2) + 0.25 * kappa * kappa;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("sector eigensolve failed");
    return es.eigenvalues();
}

}  // namespace detail

struct PoincareDetail {
    double lambda = 0.0;
    double ground = 0.0;          // should vanish (constants)
    double even_second = 0.0;     // second eigenvalue of sector 0
    double odd_first = 0.0;       // first eigenvalue of sector 1
    int basis_size = 0;
    double truncation_change = 0.0;
};

inline PoincareDetail poincare_detail(double kappa, int n) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be finite and >= 0");
    if (n != 2 && n != 3) throw DomainError("spectral computations support n = 2 and n = 3");
    int size = 32 + static_cast<int>(8.0 * std::sqrt(kappa));
    PoincareDetail prev;
    double change = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 6; ++attempt) {
        auto e0 = detail::sector_eigenvalues(kappa, n, 0, size);
        auto e1 = detail::sector_eigenvalues(kappa, n, 1, size);
        PoincareDetail d;
        d.ground = e0[0];
        d.even_second = e0[1];
        d.odd_first = e1[0];
        d.lambda = std::min(d.even_second, d.odd_first);
        d.basis_size = size;
        if (attempt > 0) {
            change = std::abs(d.lambda - prev.lambda);
            if (change <= 1e-12 * std::max(1.0, d.lambda)) {
                d.truncation_change = change;
                double scale = std::max(1.0, 0.25 * kappa * kappa);
                if (std::abs(d.ground) > 1e-12 * scale)
                    throw NumericalError("ground state of the weighted operator is not zero", d.ground);
                return d;
            }
        }
        prev = d;
        size = size * 3 / 2;
    }
    throw NumericalError("Poincare constant did not converge in the basis size", change);
}

inline double poincare_constant(double kappa, int n) { return poincare_detail(kappa, n).lambda; }

// ---------------------------------------------------------------------------
// GCI: g solves
//   -(w g')' + (n-2) sin^{n-4} e^{kappa cos} g = sin^{n-1} e^{kappa cos},
//   w = sin^{n-2} e^{kappa cos},  g(0) = g(pi) = 0,
// and h(cos theta) = g(theta) / sin(theta).

struct GciSolution {
    double kappa = 0.0;
    int n = 2;
    std::vector<double> theta;  // uniform grid on [0, pi], grid+1 points
    std::vector<double> g;
    std::vector<double> h;
    double residual = 0.0;           // weighted L2 defect of the discrete equations
    double richardson_change = 0.0;  // max |extrapolated - fine grid|, an error estimate
};

namespace detail {

struct GciRows {
    std::vector<double> lower, diag, upper, rhs;
};

// Rows 1..N-1 divided by w(theta_i) so no exponential over/underflows.
inline GciRows gci_rows(double kappa, int n, int N) {
    const double dt = M_PI / N;
    GciRows r;
    r.lower.assign(N + 1, 0.0);
    r.diag.assign(N + 1, 1.0);
    r.upper.assign(N + 1, 0.0);
    r.rhs.assign(N + 1, 0.0);
    for (int i = 1; i < N; ++i) {
        double th = i * dt, s = std::sin(th), c = std::cos(th);
        auto ratio = [&](double tm) {
            double sm = std::sin(tm);
            return std::pow(sm / s, n - 2) * std::exp(kappa * (std::cos(tm) - c));
        };
        double wp = ratio(th + 0.5 * dt), wm = ratio(th - 0.5 * dt);
        r.lower[i] = -wm / (dt * dt);
        r.upper[i] = -wp / (dt * dt);
        r.diag[i] = (wp + wm) / (dt * dt) + (n - 2) / (s * s);
        r.rhs[i] = s;
    }
    return r;
}

inline std::vector<double> thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                  std::vector<double> d) {
    const std::size_t m = b.size();
    for (std::size_t i = 1; i < m; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    std::vector<double> x(m);
    x[m - 1] = d[m - 1] / b[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

// Defect of the discrete equation at g, in the norm weighted by
// sin^{n-2} e^{kappa (cos - 1)}.
inline double gci_defect(double kappa, int n, int N, const std::vector<double>& g) {
    auto rows = gci_rows(kappa, n, N);
    double num = 0.0, den = 0.0;
    for (int i = 1; i < N; ++i) {
        double th = M_PI * i / N;
        double Lg = rows.lower[i] * g[i - 1] + rows.diag[i] * g[i] + rows.upper[i] * g[i + 1];
        double d = Lg - rows.rhs[i];
        double w = std::pow(std::sin(th), n - 2) * std::exp(kappa * (std::cos(th) - 1.0));
        num += w * d * d;
        den += w;
    }
    return std::sqrt(num / den);
}

inline std::vector<double> gci_solve_grid(double kappa, int n, int N) {
    auto r = gci_rows(kappa, n, N);
    return thomas(r.lower, r.diag, r.upper, r.rhs);
}

}  // namespace detail

inline GciSolution gci_h(double kappa, int n, int grid = 2048) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("gci_h needs kappa > 0");
    if (n != 2 && n != 3) throw DomainError("gci_h supports n = 2 and n = 3");
    if (grid < 16) throw DomainError("gci grid too coarse");
    const int N = grid;
    auto gN = detail::gci_solve_grid(kappa, n, N);
    auto g2 = detail::gci_solve_grid(kappa, n, 2 * N);

    GciSolution s;
    s.kappa = kappa;
    s.n = n;
    s.theta.resize(N + 1);
    s.g.resize(N + 1);
    double change = 0.0;
    for (int i = 0; i <= N; ++i) {
        s.theta[i] = M_PI * i / N;
        s.g[i] = (4.0 * g2[2 * i] - gN[i]) / 3.0;
        change = std::max(change, std::abs(s.g[i] - g2[2 * i]));
    }
    s.richardson_change = change;

    const double dt = M_PI / N;
    s.h.resize(N + 1);
    for (int i = 1; i < N; ++i) s.h[i] = s.g[i] / std::sin(s.theta[i]);
    s.h[0] = (4.0 * s.g[1] - s.g[2]) / (2.0 * dt);
    s.h[N] = (4.0 * s.g[N - 1] - s.g[N - 2]) / (2.0 * dt);

    s.residual = std::max(detail::gci_defect(kappa, n, N, gN), detail::gci_defect(kappa, n, 2 * N, g2));
    if (!(s.residual < 1e-6))
        throw NumericalError("GCI residual exceeds tolerance: " + std::to_string(s.residual), s.residual);
    return s;
}

// c~ = <cos h sin^2>_M / <h sin^2>_M, evaluated by the trapezoid rule on the
// GCI grid (the integrand vanishes to second order at both ends).
inline double c_tilde_from(const GciSolution& s) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i + 1 < s.theta.size(); ++i) {
        double th = s.theta[i];
        double w = s.g[i] * std::pow(std::sin(th), s.n - 1) * std::exp(s.kappa * (std::cos(th) - 1.0));
        num += w * std::cos(th);
        den += w;
    }
    return num / den;
}

inline double c_tilde(double kappa, int n, int grid = 2048) { return c_tilde_from(gci_h(kappa, n, grid)); }

struct SpectralResult {
    double kappa = 0.0;
    int n = 2;
    double lambda_kappa = 0.0;
    std::vector<double> theta;
    std::vector<double> h_samples;
    double c_tilde = 0.0;
    double residual = 0.0;
};

inline SpectralResult spectral_result(double kappa, int n, int grid = 2048) {
    SpectralResult r;
    r.kappa = kappa;
    r.n = n;
    r.lambda_kappa = poincare_constant(kappa, n);
    if (kappa > 0.0) {
        auto s = gci_h(kappa, n, grid);
        r.theta = s.theta;
        r.h_samples = s.h;
        r.c_tilde = c_tilde_from(s);
        r.residual = s.residual;
    }
    return r;
}

}  // namespace phaselab
