#pragma once

// One-particle view of an equilibrium compartmental system: the absorbing
// continuous-time Markov chain on {1..d} + exit state whose statistics
// (entry distribution, jump probabilities, expected visits, occupation and
// transit times) follow in closed form from u, B, and x*.

#include <Eigen/Dense>
#include <vector>

#include "pathent/comsys.hpp"
#include "pathent/expm.hpp"

namespace pathent {

struct ChainStats {
    Vector beta;              // entry distribution u / ||u||_1
    Vector lambda;            // total exit rates, lambda_j = -B_jj
    Matrix jump;              // (d+1) x d column-stochastic; row d is the exit row
    std::vector<int> zero_rate_columns; // columns with lambda_j = 0 (flagged, not fatal)
    Vector expected_visits;   // E[N_i] = lambda_i x*_i / ||u||_1
    double expected_jumps;    // E[N] = sum_i E[N_i] + 1 (counting the exit jump)
    Vector mean_occupation;   // E[O_j] = x*_j / ||u||_1
    double mean_transit;      // E[T] = ||x*||_1 / ||u||_1
    Vector exit_distribution; // P(exit pool = j) = z_j x*_j / ||u||_1
};

inline Vector entry_distribution(const CompartmentalSystem& sys) {
    const double total = sys.u.cwiseAbs().sum();
    if (total <= 0.0) throw Error(ErrorCode::ZeroInput, "input vector has zero mass");
    return sys.u / total;
}

inline Matrix jump_probabilities(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    const auto d = sys.dimension();
    const Vector z = output_rates(sys.B, tol);
    Matrix P = Matrix::Zero(d + 1, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double lambda_j = -sys.B(j, j);
        if (std::abs(lambda_j) < tol * std::max(1.0, sys.B.cwiseAbs().maxCoeff())) continue;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (i != j) P(i, j) = sys.B(i, j) / lambda_j;
        }
        P(d, j) = z[j] / lambda_j;
    }
    return P;
}

inline double mean_transit_time(const CompartmentalSystem& sys, const SteadyState& ss) {
    return ss.x_star.sum() / sys.u.cwiseAbs().sum();
}

inline double mean_transit_time(const CompartmentalSystem& sys) {
    return mean_transit_time(sys, steady_state(sys));
}

inline Vector mean_occupation_times(const CompartmentalSystem& sys, const SteadyState& ss) {
    return ss.x_star / sys.u.cwiseAbs().sum();
}

inline Vector mean_occupation_times(const CompartmentalSystem& sys) {
    return mean_occupation_times(sys, steady_state(sys));
}

inline Vector expected_visits(const CompartmentalSystem& sys, const SteadyState& ss) {
    const double total = sys.u.cwiseAbs().sum();
    return (-sys.B.diagonal()).cwiseProduct(ss.x_star) / total;
}

inline Vector expected_visits(const CompartmentalSystem& sys) {
    return expected_visits(sys, steady_state(sys));
}

/// Alternative route through the fundamental matrix M = (I - P|_S)^{-1} of the
/// embedded jump chain; E[N] = M beta.  Kept for cross-validation against the
/// closed form above.
inline Vector expected_visits_fundamental(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    const auto d = sys.dimension();
    const Matrix P = jump_probabilities(sys, tol);
    const Matrix K = Matrix::Identity(d, d) - P.topRows(d);
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::SingularMatrix, "I - P is singular; embedded chain has a closed subsystem");
    }
    return lu.solve(entry_distribution(sys));
}

inline Vector exit_pool_distribution(const CompartmentalSystem& sys, const SteadyState& ss,
                                     double tol = kDefaultTol) {
    return output_rates(sys.B, tol).cwiseProduct(ss.x_star) / sys.u.cwiseAbs().sum();
}

inline Vector exit_pool_distribution(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    return exit_pool_distribution(sys, steady_state(sys), tol);
}

inline ChainStats derive_chain(const CompartmentalSystem& sys, const SteadyState& ss,
                               double tol = kDefaultTol) {
    ChainStats stats;
    stats.beta = entry_distribution(sys);
    stats.lambda = -sys.B.diagonal();
    const double b_scale = std::max(1.0, sys.B.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < stats.lambda.size(); ++j) {
        if (std::abs(stats.lambda[j]) < tol * b_scale) {
            stats.lambda[j] = 0.0;
            stats.zero_rate_columns.push_back(int(j));
        }
    }
    stats.jump = jump_probabilities(sys, tol);
    stats.expected_visits = expected_visits(sys, ss);
    stats.expected_jumps = stats.expected_visits.sum() + 1.0;
    stats.mean_occupation = mean_occupation_times(sys, ss);
    stats.mean_transit = mean_transit_time(sys, ss);
    stats.exit_distribution = exit_pool_distribution(sys, ss, tol);
    return stats;
}

inline ChainStats derive_chain(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    return derive_chain(sys, steady_state(sys, tol), tol);
}

enum class DensityMethod { Auto, MatrixExponential, OdeIntegration };

/// Phase-type transit-time density f(t) = z^T exp(tB) beta.  The default picks
/// the matrix exponential for moderate t*||B|| and the ODE route otherwise.
inline double transit_time_density(const CompartmentalSystem& sys, double t,
                                   DensityMethod method = DensityMethod::Auto) {
    if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "transit time density needs t >= 0");
    const Vector beta = entry_distribution(sys);
    const Vector z = output_rates(sys.B);
    if (method == DensityMethod::Auto) {
        const double scaled_norm = t * sys.B.cwiseAbs().colwise().sum().maxCoeff();
        method = scaled_norm <= 64.0 ? DensityMethod::MatrixExponential
                                     : DensityMethod::OdeIntegration;
    }
    Vector w;
    if (method == DensityMethod::MatrixExponential) {
        w = matrix_exponential(t * sys.B) * beta;
    } else {
        w = propagate_linear_ode(sys.B, beta, t);
    }
    return z.dot(w);
}

} // namespace pathent
