#pragma once

// Maximum-entropy model construction.
//
// Two closed forms:
//  * fixed mean transit time T: all off-diagonal rates 1, uniform exit rate
//    1/T (diagonal -(d-1) - 1/T);
//  * fixed positive steady state x*: B_ij = sqrt(x*_i/x*_j), z_j = 1/sqrt(x*_j),
//    which drives the system with the implied input u = sqrt(x*).
//
// And the numeric structural-identification problem for the 2x2 system with
// u = (1,0), A = I, C = (1,0), whose transfer function
//     Psi(s) = (s + g1) / (s^2 + g2 s + g3)
// pins g1 = B12 + z2, g2 = B21 + z1 + B12 + z2, g3 = z1 B12 + z1 z2 + B21 z2.
// Eliminating gives z2 = g1 - B12, z1 = g2 - g1 - B21, and
// B21 * B12 = (g2 - g1) g1 - g3, leaving B12 as the single free parameter.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "pathent/comsys.hpp"
#include "pathent/entropy.hpp"
#include "pathent/optimize.hpp"

namespace pathent {

struct TransitConstraintProblem {
    int dimension = 1;
    Vector u;
    double target_mean_transit = 1.0;
};

struct SteadyStateConstraintProblem {
    Vector u; // used for dimension consistency; the closed form implies its own input
    Vector x_star;
};

inline CompartmentalSystem maxent_fixed_transit(const TransitConstraintProblem& problem) {
    const int d = problem.dimension;
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
    if (problem.u.size() != d) throw Error(ErrorCode::DimensionMismatch, "input vector length != dimension");
    if (problem.u.cwiseAbs().sum() <= 0.0) throw Error(ErrorCode::ZeroInput, "input vector has zero mass");
    if (!(problem.target_mean_transit > 0.0)) {
        throw Error(ErrorCode::NonpositiveTarget, "mean transit time must be positive");
    }
    const double exit_rate = 1.0 / problem.target_mean_transit;
    CompartmentalSystem sys;
    sys.u = problem.u;
    sys.B = Matrix::Ones(d, d);
    sys.B.diagonal().setConstant(-(double(d - 1) + exit_rate));
    sys.label = "maxent-transit";
    return sys;
}

inline CompartmentalSystem maxent_fixed_steady_state(const SteadyStateConstraintProblem& problem) {
    const auto d = problem.x_star.size();
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "steady-state vector is empty");
    if (problem.u.size() != 0 && problem.u.size() != d) {
        throw Error(ErrorCode::DimensionMismatch, "input vector length != steady-state length");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!(problem.x_star[j] > 0.0)) {
            throw Error(ErrorCode::NonpositiveTarget, "steady-state components must be positive");
        }
    }
    const Vector root = problem.x_star.cwiseSqrt();
    CompartmentalSystem sys;
    sys.u = root; // implied by z_j = 1 / sqrt(x*_j) with steady state x*
    sys.B = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double column_total = 1.0 / root[j];
        for (Eigen::Index i = 0; i < d; ++i) {
            if (i == j) continue;
            sys.B(i, j) = root[i] / root[j];
            column_total += sys.B(i, j);
        }
        sys.B(j, j) = -column_total;
    }
    sys.label = "maxent-steady-state";
    return sys;
}

struct GammaConstraints {
    double gamma1 = 0.0; // B12 + z2
    double gamma2 = 0.0; // B21 + z1 + B12 + z2
    double gamma3 = 0.0; // z1 B12 + z1 z2 + B21 z2
};

struct FeasibleInterval {
    double lo = 0.0;
    double hi = 0.0;
    double rate_product = 0.0; // B21 * B12 = (g2 - g1) g1 - g3
};

/// The range of B12 > 0 for which the eliminated parameters stay nonnegative
/// and B remains an invertible compartmental matrix (det B = gamma3 on the
/// constraint manifold).
inline FeasibleInterval feasible_interval(const GammaConstraints& g) {
    FeasibleInterval interval;
    interval.rate_product = (g.gamma2 - g.gamma1) * g.gamma1 - g.gamma3;
    const double lambda1 = g.gamma2 - g.gamma1; // z1 + B21
    const double lambda2 = g.gamma1;            // z2 + B12

    if (interval.rate_product < 0.0) {
        throw Error(ErrorCode::EmptyFeasibleSet, "B21*B12 would be negative");
    }
    if (lambda2 <= 0.0 || lambda1 < 0.0) {
        throw Error(ErrorCode::EmptyFeasibleSet, "total exit rates would be nonpositive");
    }
    if (g.gamma3 <= 0.0) {
        throw Error(ErrorCode::EmptyFeasibleSet, "det B = gamma3 must be positive for an open system");
    }
    interval.lo = interval.rate_product > 0.0 ? interval.rate_product / lambda1 : 0.0;
    interval.hi = lambda2;
    if (interval.lo > interval.hi) {
        throw Error(ErrorCode::EmptyFeasibleSet, "no B12 satisfies all sign constraints");
    }
    return interval;
}

struct ManifoldPoint {
    double b12 = 0, b21 = 0, z1 = 0, z2 = 0;
    CompartmentalSystem system;
    double theta = 0, H = 0, mean_transit = 0;
};

inline ManifoldPoint eval_on_manifold(const GammaConstraints& g, const FeasibleInterval& interval,
                                      double b12, const Vector& u) {
    ManifoldPoint point;
    point.b12 = b12;
    point.b21 = interval.rate_product > 0.0 ? interval.rate_product / b12 : 0.0;
    point.z2 = std::max(0.0, g.gamma1 - b12);
    point.z1 = std::max(0.0, (g.gamma2 - g.gamma1) - point.b21);
    point.system.u = u;
    point.system.B.resize(2, 2);
    point.system.B << -(point.z1 + point.b21), b12, point.b21, -(point.z2 + b12);
    point.system.label = "identified";

    const SteadyState ss = steady_state(point.system);
    point.H = path_entropy(point.system, ss);
    point.mean_transit = mean_transit_time(point.system, ss);
    point.theta = point.H / point.mean_transit;
    return point;
}

enum class Objective { PathEntropy, RatePerTime, RatePerJump };

inline double objective(const CompartmentalSystem& sys, Objective which) {
    const EntropyReport report = entropy_report(sys);
    switch (which) {
        case Objective::PathEntropy: return report.path_entropy;
        case Objective::RatePerTime: return report.rate_per_time;
        case Objective::RatePerJump: return report.rate_per_jump;
    }
    return report.rate_per_time;
}

struct LocalMaximum {
    Eigen::Vector4d start;            // first grid start converging here (B12, B21, z1, z2)
    double b12 = 0, b21 = 0, z1 = 0, z2 = 0;
    double objective_value = 0;
    double theta = 0, H = 0, mean_transit = 0;
    long n_starts = 0;
};

struct IdentificationResult {
    CompartmentalSystem best_system;
    double best_rate = 0;       // maximised objective value
    double best_b12 = 0;
    FeasibleInterval interval;
    std::vector<LocalMaximum> local_maxima;
    long n_grid_starts = 0;
    long n_feasible = 0;
    long n_converged = 0;
    double scan_best_rate = 0;  // dense one-dimensional scan (brute-force oracle)
    double scan_best_b12 = 0;
    Eigen::Vector3d residuals;  // gamma residuals of the best system
};

struct IdentifyOptions {
    double grid_mesh = 0.2;
    double bounds_lo = 0.0;
    double bounds_hi = 5.0;
    Objective objective = Objective::RatePerTime;
    double param_tol = 1e-10; // golden-section tolerance on B12
    int scan_points = 20001;
};

inline IdentificationResult identify(const GammaConstraints& g, const Vector& u,
                                     const IdentifyOptions& options = {}) {
    IdentificationResult result;
    result.interval = feasible_interval(g);
    const double lo = result.interval.lo;
    const double hi = result.interval.hi;

    auto objective_at = [&](double b12) {
        const ManifoldPoint point = eval_on_manifold(g, result.interval, b12, u);
        switch (options.objective) {
            case Objective::PathEntropy: return point.H;
            case Objective::RatePerTime: return point.theta;
            case Objective::RatePerJump: {
                const double jumps = expected_visits(point.system).sum() + 1.0;
                return point.H / jumps;
            }
        }
        return point.theta;
    };

    auto record_best = [&](double b12) {
        const ManifoldPoint point = eval_on_manifold(g, result.interval, b12, u);
        result.best_system = point.system;
        result.best_b12 = b12;
        result.best_rate = objective_at(b12);
        result.residuals[0] = (point.b12 + point.z2) - g.gamma1;
        result.residuals[1] = (point.b21 + point.z1 + point.b12 + point.z2) - g.gamma2;
        result.residuals[2] =
            (point.z1 * point.b12 + point.z1 * point.z2 + point.b21 * point.z2) - g.gamma3;
    };

    // Degenerate interval: a single feasible model, nothing to optimise.
    if (hi - lo <= options.param_tol) {
        record_best(hi);
        result.scan_best_rate = result.best_rate;
        result.scan_best_b12 = hi;
        const ManifoldPoint point = eval_on_manifold(g, result.interval, hi, u);
        result.local_maxima.push_back({Eigen::Vector4d(point.b12, point.b21, point.z1, point.z2),
                                       point.b12, point.b21, point.z1, point.z2, result.best_rate,
                                       point.theta, point.H, point.mean_transit, 0});
        return result;
    }

    // Dense scan over the interval, refined around the best grid point.
    {
        const int n = std::max(3, options.scan_points);
        double best_value = -std::numeric_limits<double>::infinity();
        double best_b12 = lo;
        const double step = (hi - lo) / double(n - 1);
        for (int k = 0; k < n; ++k) {
            const double b12 = (k == n - 1) ? hi : lo + double(k) * step;
            const double value = objective_at(b12);
            if (value > best_value) {
                best_value = value;
                best_b12 = b12;
            }
        }
        auto [x, fx] = detail::golden_max(objective_at, std::max(lo, best_b12 - step),
                                          std::min(hi, best_b12 + step), options.param_tol);
        if (fx > best_value) {
            best_value = fx;
            best_b12 = x;
        }
        result.scan_best_rate = best_value;
        result.scan_best_b12 = best_b12;
    }

    // Grid multistart over [bounds]^4: a start is feasible when its B12
    // coordinate projects into the interval (the other three coordinates are
    // recovered by the elimination).  Ascents from equal projections are
    // identical, so they are cached.
    std::vector<double> axis;
    for (double v = options.bounds_lo; v <= options.bounds_hi + 1e-12; v += options.grid_mesh) {
        axis.push_back(v);
    }
    const long n_axis = long(axis.size());
    result.n_grid_starts = n_axis * n_axis * n_axis * n_axis;

    struct Ascent {
        double b12, value;
    };
    std::map<std::uint64_t, Ascent> cache;
    struct Bucket {
        double b12, value;
        long n_starts;
        double first_start_b12;
    };
    std::vector<Bucket> buckets;

    const double eps = 1e-12 * std::max(1.0, hi);
    for (double start_b12 : axis) {
        if (start_b12 < lo - eps || start_b12 > hi + eps) continue;
        const double b0 = std::clamp(start_b12, lo, hi);
        result.n_feasible += n_axis * n_axis * n_axis;

        Ascent ascent{};
        const auto key = std::bit_cast<std::uint64_t>(b0);
        if (auto found = cache.find(key); found != cache.end()) {
            ascent = found->second;
        } else {
            auto [x, fx] = detail::local_ascent(objective_at, lo, hi, b0,
                                                std::max(options.grid_mesh / 4.0, (hi - lo) / 256.0),
                                                options.param_tol);
            ascent = {x, fx};
            cache.emplace(key, ascent);
        }
        result.n_converged += n_axis * n_axis * n_axis;

        bool merged = false;
        for (auto& bucket : buckets) {
            if (std::abs(bucket.b12 - ascent.b12) <= 1e-6) {
                bucket.n_starts += n_axis * n_axis * n_axis;
                if (ascent.value > bucket.value) {
                    bucket.value = ascent.value;
                    bucket.b12 = ascent.b12;
                }
                merged = true;
                break;
            }
        }
        if (!merged) buckets.push_back({ascent.b12, ascent.value, n_axis * n_axis * n_axis, start_b12});
    }

    if (buckets.empty()) {
        // No grid start projected into the interval; fall back to the scan.
        buckets.push_back({result.scan_best_b12, result.scan_best_rate, 0, result.scan_best_b12});
    }

    std::sort(buckets.begin(), buckets.end(), [](const Bucket& a, const Bucket& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.b12 < b.b12; // ties broken toward the smaller B12
    });

    for (const auto& bucket : buckets) {
        const ManifoldPoint point = eval_on_manifold(g, result.interval, bucket.b12, u);
        Eigen::Vector4d start(bucket.first_start_b12, 0.0, 0.0, 0.0);
        // Reconstruct the full first start for reporting.
        start[1] = options.bounds_lo;
        start[2] = options.bounds_lo;
        start[3] = options.bounds_lo;
        result.local_maxima.push_back({start, point.b12, point.b21, point.z1, point.z2,
                                       bucket.value, point.theta, point.H, point.mean_transit,
                                       bucket.n_starts});
    }

    record_best(buckets.front().b12);
    return result;
}

} // namespace pathent
