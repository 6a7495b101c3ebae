#pragma once

// Gauss rules for the symmetric Jacobi weight (1-u^2)^a on [-1,1],
// normalized so the weights sum to one.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "phaselab/errors.hpp"

namespace phaselab {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Off-diagonal of the Jacobi matrix of the orthonormal polynomials for
// (1-u)^a (1+u)^a.  b[k] couples p_{k-1} and p_k, k >= 1.
inline std::vector<double> symmetric_jacobi_offdiag(double a, int count) {
    std::vector<double> b(count + 1, 0.0);
    for (int k = 1; k <= count; ++k) {
        double s = 2.0 * k + 2.0 * a;
        double b2;
        if (k == 1)
            b2 = 4.0 * (1.0 + a) * (1.0 + a) / ((2.0 + 2.0 * a) * (2.0 + 2.0 * a) * (3.0 + 2.0 * a));
        else
            b2 = 4.0 * k * (k + a) * (k + a) * (k + 2.0 * a) / (s * s * (s + 1.0) * (s - 1.0));
        b[k] = std::sqrt(b2);
    }
    return b;
}

inline GaussRule build_symmetric_jacobi_rule(double a, int npts) {
    auto b = symmetric_jacobi_offdiag(a, npts);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(npts);
    Eigen::VectorXd sub(npts - 1);
    for (int k = 0; k < npts - 1; ++k) sub[k] = b[k + 1];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("Gauss-Jacobi node eigensolve failed");

    GaussRule rule;
    rule.nodes.resize(npts);
    rule.weights.resize(npts);
    for (int i = 0; i < npts; ++i) {
        double x = es.eigenvalues()[i];
        double sum = 0.0;
        // Newton polish on p_N, then Christoffel weight 1 / sum p_k^2.
        for (int it = 0; it < 3; ++it) {
            double pm = 0.0, p = 1.0, dpm = 0.0, dp = 0.0;
            sum = 1.0;
            for (int k = 0; k < npts; ++k) {
                double pn = (x * p - b[k] * pm) / b[k + 1];
                double dpn = (p + x * dp - b[k] * dpm) / b[k + 1];
                pm = p; p = pn; dpm = dp; dp = dpn;
                if (k < npts - 1) sum += p * p;
            }
            if (it < 2 && dp != 0.0) x -= p / dp;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 1.0 / sum;
    }
    return rule;
}

}  // namespace detail

// Cached rule for dimension n (exponent a = (n-3)/2).  Rules are built once
// and never modified, so references stay valid for the program lifetime.
inline const GaussRule& sphere_rule(int n, int npts) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, npts);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto rule = std::make_unique<GaussRule>(
            detail::build_symmetric_jacobi_rule(0.5 * (n - 3), npts));
        it = cache.emplace(key, std::move(rule)).first;
    }
    return *it->second;
}

}  // namespace phaselab
