#pragma once

// Information-entropy measures of the single-particle path through an
// equilibrium compartmental system, in nats:
//
//   H = H(beta) + sum_j x*_j/||u||_1 [ sum_{i!=j} B_ij (1 - log B_ij)
//                                      + z_j (1 - log z_j) ]
//
// together with its split into entry, jump (discrete) and sojourn
// (differential) parts and the rates per unit time and per jump.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "pathent/chain.hpp"
#include "pathent/comsys.hpp"

namespace pathent {

/// x (1 - log x) with the continuous limit 0 at x = 0; subnormal arguments are
/// treated as 0 to avoid -inf * 0.
inline double poisson_entropy_rate(double lambda) {
    if (lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "negative rate");
    if (lambda < 1e-300) return 0.0;
    return lambda * (1.0 - std::log(lambda));
}

/// Differential entropy 1 - log(lambda) of an Exp(lambda) sojourn; may be negative.
inline double exponential_entropy(double lambda) {
    if (lambda <= 0.0) throw Error(ErrorCode::NonpositiveRate, "exponential rate must be positive");
    return 1.0 - std::log(lambda);
}

/// Shannon entropy -sum p log p with 0 log 0 = 0.
inline double discrete_entropy(const Vector& p, double tol = kDefaultTol) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] < -tol) throw Error(ErrorCode::NotADistribution, "negative probability");
        total += p[i];
    }
    if (std::abs(total - 1.0) > std::max(tol, p.size() * 1e-15)) {
        throw Error(ErrorCode::NotADistribution, "probabilities do not sum to 1");
    }
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    }
    return h;
}

/// Path entropy for explicitly supplied rates and stocks.  Only the
/// off-diagonal entries of B are read; x and beta are taken as given, which
/// lets callers evaluate the entropy surface away from the steady-state
/// manifold (used by the MaxEnt concavity checks).
inline double path_entropy_given(const Matrix& B, const Vector& z, const Vector& x,
                                 const Vector& beta, double total_input) {
    const auto d = B.rows();
    double h = discrete_entropy(beta);
    for (Eigen::Index j = 0; j < d; ++j) {
        double column = poisson_entropy_rate(z[j]);
        for (Eigen::Index i = 0; i < d; ++i) {
            if (i != j) column += poisson_entropy_rate(B(i, j));
        }
        h += x[j] / total_input * column;
    }
    return h;
}

inline double path_entropy(const CompartmentalSystem& sys, const SteadyState& ss,
                           double tol = kDefaultTol) {
    return path_entropy_given(sys.B, output_rates(sys.B, tol), ss.x_star,
                              entry_distribution(sys), sys.u.cwiseAbs().sum());
}

inline double path_entropy(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    return path_entropy(sys, steady_state(sys, tol), tol);
}

struct PathEntropyParts {
    double entry;   // H(beta), discrete, >= 0
    double jump;    // sum_j E[N_j] H(P_col_j), discrete, >= 0
    double sojourn; // sum_j E[N_j] (1 - log lambda_j), differential, may be negative
};

/// Splits the path entropy into entry + jump + sojourn uncertainty; the three
/// parts sum to path_entropy exactly (up to roundoff).
inline PathEntropyParts path_entropy_decomposition(const CompartmentalSystem& sys,
                                                   const ChainStats& chain) {
    PathEntropyParts parts{0.0, 0.0, 0.0};
    parts.entry = discrete_entropy(chain.beta);
    const auto d = sys.dimension();
    for (Eigen::Index j = 0; j < d; ++j) {
        if (chain.lambda[j] <= 0.0) continue; // flagged column, contributes nothing
        double column_entropy = 0.0;
        for (Eigen::Index i = 0; i < d + 1; ++i) {
            const double p = chain.jump(i, j);
            if (p > 0.0) column_entropy -= p * std::log(p);
        }
        parts.jump += chain.expected_visits[j] * column_entropy;
        parts.sojourn += chain.expected_visits[j] * (1.0 - std::log(chain.lambda[j]));
    }
    return parts;
}

inline PathEntropyParts path_entropy_decomposition(const CompartmentalSystem& sys,
                                                   double tol = kDefaultTol) {
    return path_entropy_decomposition(sys, derive_chain(sys, tol));
}

inline double entropy_rate_per_time(double path_entropy_value, double mean_transit) {
    return path_entropy_value / mean_transit;
}

inline double entropy_rate_per_jump(double path_entropy_value, double expected_jumps) {
    return path_entropy_value / expected_jumps;
}

struct OnePoolEquivalent {
    double lambda;  // 1 / E[T]
    double H;       // 1 - log lambda
    double theta;   // lambda (1 - log lambda)
    double theta_J; // H / 2 (entry jump + exit jump)
};

/// The one-pool system with the same mean transit time, used as a reference
/// in parameter sweeps.
inline OnePoolEquivalent one_pool_equivalent(double mean_transit) {
    OnePoolEquivalent op;
    op.lambda = 1.0 / mean_transit;
    op.H = exponential_entropy(op.lambda);
    op.theta = poisson_entropy_rate(op.lambda);
    op.theta_J = op.H / 2.0;
    return op;
}

struct EntropyReport {
    double path_entropy;    // H
    double entry_entropy;   // H(beta)
    double jump_entropy;
    double sojourn_entropy;
    double rate_per_time;   // theta = H / E[T]
    double rate_per_jump;   // theta_J = H / E[N]
    OnePoolEquivalent one_pool;
    std::vector<int> zero_rate_columns;
};

inline EntropyReport entropy_report(const CompartmentalSystem& sys, const SteadyState& ss,
                                    const ChainStats& chain, double tol = kDefaultTol) {
    EntropyReport report;
    report.path_entropy = path_entropy(sys, ss, tol);
    const PathEntropyParts parts = path_entropy_decomposition(sys, chain);
    report.entry_entropy = parts.entry;
    report.jump_entropy = parts.jump;
    report.sojourn_entropy = parts.sojourn;
    report.rate_per_time = entropy_rate_per_time(report.path_entropy, chain.mean_transit);
    report.rate_per_jump = entropy_rate_per_jump(report.path_entropy, chain.expected_jumps);
    report.one_pool = one_pool_equivalent(chain.mean_transit);
    report.zero_rate_columns = chain.zero_rate_columns;
    return report;
}

inline EntropyReport entropy_report(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    const SteadyState ss = steady_state(sys, tol);
    return entropy_report(sys, ss, derive_chain(sys, ss, tol), tol);
}

} // namespace pathent
