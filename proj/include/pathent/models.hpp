#pragma once

// Named reference models and parameter sweeps.
//
//  * A five-pool global carbon-cycle model (Emanuel et al. 1981, rates as in
//    Thompson & Randerson 1999) with an environmental speed modifier xi that
//    scales every rate.
//  * The two-pool microbial soil model of Wang et al. 2014, linearised at its
//    equilibrium for a given carbon use efficiency epsilon.
//  * Seven small benchmark systems covering serial, parallel and feedback
//    structures.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathent/comsys.hpp"
#include "pathent/entropy.hpp"
#include "pathent/optimize.hpp"

namespace pathent {

/// Five-pool carbon cycle: non-woody tree parts, woody tree parts, ground
/// vegetation, detritus/decomposers, active soil carbon.  Stocks at xi = 1 are
/// (37, 452, 69, 81, 1121) PgC with inputs (77, 0, 36, 0, 0) PgC/yr.
inline CompartmentalSystem emanuel(double xi = 1.0) {
    if (!(xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate modifier must be positive");
    CompartmentalSystem sys;
    sys.u.resize(5);
    sys.u << 77.0, 0.0, 36.0, 0.0, 0.0;
    sys.B.resize(5, 5);
    // Rates are exact flux/stock fractions; keep them as quotients.
    sys.B << -77.0 / 37.0, 0.0,          0.0,         0.0,         0.0,
              31.0 / 37.0, -31.0 / 452.0, 0.0,        0.0,         0.0,
              0.0,          0.0,         -36.0 / 69.0, 0.0,        0.0,
              21.0 / 37.0,  15.0 / 452.0, 12.0 / 69.0, -48.0 / 81.0, 0.0,
              0.0,          2.0 / 452.0,  6.0 / 69.0,  3.0 / 81.0,  -11.0 / 1121.0;
    sys.B *= xi;
    sys.label = "emanuel";
    return sys;
}

struct WangParameters {
    double mu_b = 4.38;      // microbial turnover rate, 1/yr
    double F_NPP = 345.0;    // carbon influx, gC m^-2 yr^-1
    double K_s = 53954.83;   // half-saturation constant, gC m^-2
    double V_s = 59.13;      // max assimilation rate, 1/yr
    double epsilon = 0.39;   // carbon use efficiency, dimensionless
};

/// Equilibrium of the substrate/biomass model, linearised by freezing
/// lambda = C_b V_s / (C_s + K_s) at the steady state:
///   C_s* = K_s / (V_s eps / mu_b - 1),  C_b* = F_NPP / (mu_b (1/eps - 1)).
/// Column 2 sums to zero by construction (no direct outflow from biomass).
inline CompartmentalSystem wang(const WangParameters& p = {}) {
    if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) {
        throw Error(ErrorCode::InvalidEfficiency, "carbon use efficiency must lie in (0, 1)");
    }
    if (!(p.mu_b > 0.0 && p.F_NPP > 0.0 && p.K_s > 0.0 && p.V_s > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "Wang parameters must be positive");
    }
    if (p.V_s * p.epsilon / p.mu_b <= 1.0) {
        throw Error(ErrorCode::InvalidEfficiency,
                    "V_s * epsilon / mu_b must exceed 1 for a positive substrate equilibrium");
    }
    const double c_s = p.K_s / (p.V_s * p.epsilon / p.mu_b - 1.0);
    const double c_b = p.F_NPP / (p.mu_b * (1.0 / p.epsilon - 1.0));
    const double lambda = c_b * p.V_s / (c_s + p.K_s);

    CompartmentalSystem sys;
    sys.u.resize(2);
    sys.u << p.F_NPP, 0.0;
    sys.B.resize(2, 2);
    sys.B << -lambda, p.mu_b, p.epsilon * lambda, -p.mu_b;
    sys.label = "wang";
    return sys;
}

inline Eigen::Vector2d wang_equilibrium_stocks(const WangParameters& p) {
    return {p.K_s / (p.V_s * p.epsilon / p.mu_b - 1.0),
            p.F_NPP / (p.mu_b * (1.0 / p.epsilon - 1.0))};
}

/// The seven benchmark systems; the one-pool system is instantiated at the
/// given rate.
inline std::vector<CompartmentalSystem> table1_systems(double one_pool_rate = 1.0) {
    std::vector<CompartmentalSystem> systems;
    auto add = [&](int d, std::initializer_list<double> b, std::initializer_list<double> u,
                   std::string label) {
        CompartmentalSystem sys;
        sys.B = Eigen::Map<const Matrix>(std::data(b), d, d).transpose(); // rows listed row-major
        sys.u = Eigen::Map<const Vector>(std::data(u), d);
        sys.label = std::move(label);
        systems.push_back(std::move(sys));
    };
    add(1, {-one_pool_rate}, {1}, "one-pool");
    add(2, {-1, 0, 1, -1}, {1, 0}, "serial-2");
    add(2, {-1, 0, 0, -1}, {1, 1}, "parallel-2");
    add(2, {-1, 0.5, 1, -1}, {1, 0}, "feedback-2");
    add(2, {-1, 0.5, 0.5, -1}, {1, 1}, "coupled-2");
    add(3, {-1, 0, 0, 1, -1, 0, 0, 1, -1}, {1, 0, 0}, "serial-3");
    add(3, {-1, 0, 0, 0, -1, 0, 0, 0, -1}, {1, 1, 1}, "parallel-3");
    return systems;
}

struct SweepRow {
    double param = 0.0;
    bool ok = false;
    std::string error;
    Vector stocks;
    double mean_transit = 0, expected_jumps = 0;
    double H = 0, H_beta = 0, H_jump = 0, H_sojourn = 0;
    double theta = 0, theta_J = 0;
    double op_H = 0, op_theta = 0, op_thetaJ = 0;
};

using ModelFamily = std::function<CompartmentalSystem(double)>;

inline SweepRow sweep_row(const ModelFamily& family, double value) {
    SweepRow row;
    row.param = value;
    try {
        const CompartmentalSystem sys = family(value);
        const SteadyState ss = steady_state(sys);
        const ChainStats chain = derive_chain(sys, ss);
        const EntropyReport report = entropy_report(sys, ss, chain);
        row.stocks = ss.x_star;
        row.mean_transit = chain.mean_transit;
        row.expected_jumps = chain.expected_jumps;
        row.H = report.path_entropy;
        row.H_beta = report.entry_entropy;
        row.H_jump = report.jump_entropy;
        row.H_sojourn = report.sojourn_entropy;
        row.theta = report.rate_per_time;
        row.theta_J = report.rate_per_jump;
        row.op_H = report.one_pool.H;
        row.op_theta = report.one_pool.theta;
        row.op_thetaJ = report.one_pool.theta_J;
        row.ok = true;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

/// One row per parameter value; rows that fail keep their error message and
/// the sweep continues.
inline std::vector<SweepRow> sweep(const ModelFamily& family, std::span<const double> values) {
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double value : values) rows.push_back(sweep_row(family, value));
    return rows;
}

struct SweepFeature {
    std::string name;
    double value;
};

/// Curve features extracted from a sweep: sign changes located by bisection on
/// the underlying continuous function, peaks refined by golden sections inside
/// the bracketing grid cells.  Parameter tolerance 1e-3.
inline std::vector<SweepFeature> sweep_features(const std::string& family_name,
                                                const ModelFamily& family,
                                                const std::vector<SweepRow>& rows) {
    std::vector<SweepFeature> features;
    constexpr double tol = 1e-3;
    std::vector<const SweepRow*> good;
    for (const auto& row : rows) {
        if (row.ok) good.push_back(&row);
    }
    if (good.size() < 2) return features;

    if (family_name == "emanuel") {
        auto h_gap = [&](double xi) {
            const SweepRow row = sweep_row(family, xi);
            return row.H - row.op_H;
        };
        for (size_t k = 0; k + 1 < good.size(); ++k) {
            const double ga = good[k]->H - good[k]->op_H;
            const double gb = good[k + 1]->H - good[k + 1]->op_H;
            if (ga == 0.0 || (ga > 0.0) != (gb > 0.0)) {
                if (auto x = detail::bisect_sign_change(h_gap, good[k]->param, good[k + 1]->param, tol)) {
                    features.push_back({"break_even_xi", *x});
                    break;
                }
            }
        }
        size_t peak = 0;
        for (size_t k = 1; k < good.size(); ++k) {
            if (good[k]->theta > good[peak]->theta) peak = k;
        }
        if (peak > 0 && peak + 1 < good.size()) {
            auto theta_of = [&](double xi) { return sweep_row(family, xi).theta; };
            auto [x, fx] = pathent::detail::golden_max(theta_of, good[peak - 1]->param,
                                                       good[peak + 1]->param, tol);
            (void)fx;
            features.push_back({"theta_peak_xi", x});
        }
    } else if (family_name == "wang") {
        auto excess = [&](double eps) { return -family(eps).B(0, 0) - 1.0; };
        for (size_t k = 0; k + 1 < good.size(); ++k) {
            const double ga = excess(good[k]->param);
            const double gb = excess(good[k + 1]->param);
            if (ga == 0.0 || (ga > 0.0) != (gb > 0.0)) {
                if (auto x = detail::bisect_sign_change(excess, good[k]->param, good[k + 1]->param, tol)) {
                    features.push_back({"unit_rate_epsilon", *x});
                    break;
                }
            }
        }
    }
    return features;
}

} // namespace pathent
