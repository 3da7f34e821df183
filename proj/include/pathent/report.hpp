#pragma once

// Text and CSV rendering for analysis, simulation and sweep results.  Human
// output carries 4 significant digits, CSV carries 12.  Rendering is pure
// string building, so identical inputs produce identical bytes.

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pathent/chain.hpp"
#include "pathent/entropy.hpp"
#include "pathent/maxent.hpp"
#include "pathent/models.hpp"
#include "pathent/sampler.hpp"

namespace pathent {

enum class LogBase { Nats, Bits };

inline double to_base(double nats, LogBase base) {
    return base == LogBase::Bits ? nats / std::numbers::ln2 : nats;
}

inline std::string fmt(double value, int significant = 4) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", significant, value);
    return buffer;
}

inline std::string fmt_csv(double value) { return fmt(value, 12); }

inline const char* unit_suffix(LogBase base) { return base == LogBase::Bits ? "bits" : "nats"; }

inline std::string render_analysis_text(const CompartmentalSystem& sys, const SteadyState& ss,
                                        const ChainStats& chain, const EntropyReport& report,
                                        LogBase base = LogBase::Nats) {
    std::ostringstream out;
    const char* unit = unit_suffix(base);
    out << "model: " << (sys.label.empty() ? "(unnamed)" : sys.label)
        << "  d=" << sys.dimension() << "\n";
    out << "steady state x*:";
    for (Eigen::Index j = 0; j < ss.x_star.size(); ++j) out << " " << fmt(ss.x_star[j]);
    out << "\n";
    out << "path entropy H        " << fmt(to_base(report.path_entropy, base)) << " " << unit << "\n";
    out << "  entry part          " << fmt(to_base(report.entry_entropy, base)) << "\n";
    out << "  jump part           " << fmt(to_base(report.jump_entropy, base)) << "\n";
    out << "  sojourn part        " << fmt(to_base(report.sojourn_entropy, base)) << "\n";
    out << "rate per unit time    " << fmt(to_base(report.rate_per_time, base)) << " " << unit
        << "/time\n";
    out << "rate per jump         " << fmt(to_base(report.rate_per_jump, base)) << " " << unit << "\n";
    out << "mean transit E[T]     " << fmt(chain.mean_transit) << "\n";
    out << "mean jumps E[N]       " << fmt(chain.expected_jumps) << "\n";
    out << "mean occupation E[O]:";
    for (Eigen::Index j = 0; j < chain.mean_occupation.size(); ++j) {
        out << " " << fmt(chain.mean_occupation[j]);
    }
    out << "\n";
    out << "exit distribution:   ";
    for (Eigen::Index j = 0; j < chain.exit_distribution.size(); ++j) {
        out << " " << fmt(chain.exit_distribution[j]);
    }
    out << "\n";
    out << "one-pool equivalent   lambda=" << fmt(report.one_pool.lambda)
        << " H=" << fmt(to_base(report.one_pool.H, base))
        << " theta=" << fmt(to_base(report.one_pool.theta, base))
        << " theta_J=" << fmt(to_base(report.one_pool.theta_J, base)) << "\n";
    if (!report.zero_rate_columns.empty()) {
        out << "warning: pools with zero total exit rate:";
        for (int j : report.zero_rate_columns) out << " " << (j + 1);
        out << "\n";
    }
    return out.str();
}

inline std::string render_analysis_csv(const CompartmentalSystem& sys, const SteadyState& ss,
                                       const ChainStats& chain, const EntropyReport& report,
                                       LogBase base = LogBase::Nats) {
    std::ostringstream out;
    const auto d = sys.dimension();
    out << "H,H_beta,H_jump,H_sojourn,theta,thetaJ,ET,EN";
    for (Eigen::Index j = 0; j < d; ++j) out << ",x" << (j + 1);
    for (Eigen::Index j = 0; j < d; ++j) out << ",O" << (j + 1);
    for (Eigen::Index j = 0; j < d; ++j) out << ",exit" << (j + 1);
    out << "\n";
    out << fmt_csv(to_base(report.path_entropy, base)) << ","
        << fmt_csv(to_base(report.entry_entropy, base)) << ","
        << fmt_csv(to_base(report.jump_entropy, base)) << ","
        << fmt_csv(to_base(report.sojourn_entropy, base)) << ","
        << fmt_csv(to_base(report.rate_per_time, base)) << ","
        << fmt_csv(to_base(report.rate_per_jump, base)) << "," << fmt_csv(chain.mean_transit)
        << "," << fmt_csv(chain.expected_jumps);
    for (Eigen::Index j = 0; j < d; ++j) out << "," << fmt_csv(ss.x_star[j]);
    for (Eigen::Index j = 0; j < d; ++j) out << "," << fmt_csv(chain.mean_occupation[j]);
    for (Eigen::Index j = 0; j < d; ++j) out << "," << fmt_csv(chain.exit_distribution[j]);
    out << "\n";
    return out.str();
}

/// Simulation report: estimate, standard error, analytic value and z-score per
/// quantity.  A zero standard error with zero deviation counts as z = 0.
inline std::string render_simulation(const CompartmentalSystem& sys, const ChainStats& chain,
                                     const EntropyReport& analytic,
                                     const MonteCarloEstimates& mc) {
    std::ostringstream out;
    out << "model: " << (sys.label.empty() ? "(unnamed)" : sys.label)
        << "  n_paths=" << mc.n_paths << "  seed=" << mc.seed << "\n";
    out << "quantity        estimate     std_error    analytic     z\n";
    auto z_score = [](double estimate, double se, double analytic_value) {
        const double diff = estimate - analytic_value;
        if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return diff / se;
    };
    auto line = [&](const std::string& name, const Estimate& e, double analytic_value) {
        char buffer[160];
        std::snprintf(buffer, sizeof(buffer), "%-15s %-12.6g %-12.6g %-12.6g %+.3f\n", name.c_str(),
                      e.value, e.std_error, analytic_value, z_score(e.value, e.std_error, analytic_value));
        out << buffer;
    };
    line("E[T]", mc.mean_transit, chain.mean_transit);
    line("E[N]", mc.mean_jumps, chain.expected_jumps);
    for (size_t j = 0; j < mc.mean_occupation.size(); ++j) {
        line("E[O_" + std::to_string(j + 1) + "]", mc.mean_occupation[j],
             chain.mean_occupation[Eigen::Index(j)]);
    }
    for (size_t j = 0; j < mc.exit_distribution.size(); ++j) {
        const double p = mc.exit_distribution[j];
        Estimate freq{p, std::sqrt(std::max(0.0, p * (1.0 - p) / double(mc.n_paths)))};
        line("P[exit=" + std::to_string(j + 1) + "]", freq, chain.exit_distribution[Eigen::Index(j)]);
    }
    line("H", mc.entropy, analytic.path_entropy);
    return out.str();
}

inline double max_abs_z(const CompartmentalSystem& sys, const ChainStats& chain,
                        const EntropyReport& analytic, const MonteCarloEstimates& mc) {
    (void)sys;
    double worst = 0.0;
    auto push = [&](const Estimate& e, double analytic_value) {
        const double diff = e.value - analytic_value;
        double z;
        if (e.std_error == 0.0) {
            z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            z = std::abs(diff / e.std_error);
        }
        worst = std::max(worst, z);
    };
    push(mc.mean_transit, chain.mean_transit);
    push(mc.mean_jumps, chain.expected_jumps);
    for (size_t j = 0; j < mc.mean_occupation.size(); ++j) {
        push(mc.mean_occupation[j], chain.mean_occupation[Eigen::Index(j)]);
    }
    for (size_t j = 0; j < mc.exit_distribution.size(); ++j) {
        const double p = mc.exit_distribution[j];
        push({p, std::sqrt(std::max(0.0, p * (1.0 - p) / double(mc.n_paths)))},
             chain.exit_distribution[Eigen::Index(j)]);
    }
    push(mc.entropy, analytic.path_entropy);
    return worst;
}

inline std::string sweep_csv_header(int d) {
    std::ostringstream out;
    out << "param";
    for (int j = 1; j <= d; ++j) out << ",x" << j;
    out << ",ET,EN,H,H_beta,H_jump,H_sojourn,theta,thetaJ,op_H,op_theta,op_thetaJ";
    return out.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, int d) {
    std::ostringstream out;
    out << sweep_csv_header(d) << "\n";
    for (const auto& row : rows) {
        if (!row.ok) continue;
        out << fmt_csv(row.param);
        for (Eigen::Index j = 0; j < row.stocks.size(); ++j) out << "," << fmt_csv(row.stocks[j]);
        out << "," << fmt_csv(row.mean_transit) << "," << fmt_csv(row.expected_jumps) << ","
            << fmt_csv(row.H) << "," << fmt_csv(row.H_beta) << "," << fmt_csv(row.H_jump) << ","
            << fmt_csv(row.H_sojourn) << "," << fmt_csv(row.theta) << "," << fmt_csv(row.theta_J)
            << "," << fmt_csv(row.op_H) << "," << fmt_csv(row.op_theta) << ","
            << fmt_csv(row.op_thetaJ) << "\n";
    }
    return out.str();
}

inline std::string identify_csv(const IdentificationResult& result) {
    std::ostringstream out;
    out << "start_b12,start_b21,start_z1,start_z2,B12,B21,z1,z2,theta,H,mean_transit,n_starts\n";
    for (const auto& maximum : result.local_maxima) {
        out << fmt_csv(maximum.start[0]) << "," << fmt_csv(maximum.start[1]) << ","
            << fmt_csv(maximum.start[2]) << "," << fmt_csv(maximum.start[3]) << ","
            << fmt_csv(maximum.b12) << "," << fmt_csv(maximum.b21) << "," << fmt_csv(maximum.z1)
            << "," << fmt_csv(maximum.z2) << "," << fmt_csv(maximum.theta) << ","
            << fmt_csv(maximum.H) << "," << fmt_csv(maximum.mean_transit) << ","
            << maximum.n_starts << "\n";
    }
    return out.str();
}

inline std::string render_identification(const IdentificationResult& result) {
    std::ostringstream out;
    out << "feasible interval for B12: [" << fmt(result.interval.lo, 6) << ", "
        << fmt(result.interval.hi, 6) << "]  (B21*B12 = " << fmt(result.interval.rate_product, 6)
        << ")\n";
    out << "grid starts: " << result.n_grid_starts << "  feasible: " << result.n_feasible
        << "  converged: " << result.n_converged << "\n";
    out << "objective maximum: " << fmt(result.best_rate, 6) << " at B12=" << fmt(result.best_b12, 6)
        << "\n";
    out << "dense-scan maximum: " << fmt(result.scan_best_rate, 6) << " at B12="
        << fmt(result.scan_best_b12, 6) << "\n";
    out << "best B:\n";
    for (Eigen::Index i = 0; i < 2; ++i) {
        out << "  [" << fmt(result.best_system.B(i, 0), 6) << ", "
            << fmt(result.best_system.B(i, 1), 6) << "]\n";
    }
    out << "gamma residuals: " << fmt(result.residuals[0], 3) << " " << fmt(result.residuals[1], 3)
        << " " << fmt(result.residuals[2], 3) << "\n";
    out << "local maxima: " << result.local_maxima.size() << "\n";
    return out.str();
}

inline std::string render_validation(const ValidationReport& report) {
    std::ostringstream out;
    if (report.is_valid) {
        out << "valid\n";
        return out.str();
    }
    for (const auto& violation : report.violations) {
        out << violation.code;
        if (violation.row >= 0 || violation.col >= 0) {
            out << " at=(" << (violation.row >= 0 ? std::to_string(violation.row + 1) : "-") << ","
                << (violation.col >= 0 ? std::to_string(violation.col + 1) : "-") << ")";
        }
        out << " magnitude=" << fmt(violation.magnitude) << "\n";
    }
    return out.str();
}

} // namespace pathent
