#pragma once

// Linear autonomous compartmental systems in equilibrium:
//
//     dx/dt = B x + u,   x* = -B^{-1} u,
//
// where B has nonnegative off-diagonals, nonpositive diagonal, and
// nonpositive column sums.  z_j = -sum_i B_ij is the rate of outflow
// from pool j to the environment; invertible B means the system is
// open (everything that enters eventually leaves).

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pathent/error.hpp"

namespace pathent {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultTol = 1e-9;

struct CompartmentalSystem {
    Vector u;          // external inputs, mass / time
    Matrix B;          // flux rates, 1 / time
    std::string label;

    Eigen::Index dimension() const { return u.size(); }
    double total_input() const { return u.sum(); } // ||u||_1 for nonnegative u
};

struct SteadyState {
    Vector x_star;       // equilibrium stocks, mass
    Vector release_flux; // r_j = z_j x*_j, mass / time
};

struct Violation {
    std::string code;
    int row = -1; // -1 when not applicable
    int col = -1;
    double magnitude = 0.0;
};

struct ValidationReport {
    bool is_valid = true;
    std::vector<Violation> violations;
};

/// Column sums negated: z_j = -sum_i B_ij, with |z_j| < tol clamped to exactly 0
/// so that downstream x log x terms take their continuous limit.
inline Vector output_rates(const Matrix& B, double tol = kDefaultTol) {
    const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
    Vector z = -B.colwise().sum().transpose();
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (std::abs(z[j]) < tol * scale) z[j] = 0.0;
    }
    return z;
}

/// Checks every structural invariant of a compartmental system and reports all
/// violations found.  Sign checks use a relative tolerance; singularity is
/// detected with a rank-revealing (full-pivot) LU factorization.
inline ValidationReport validate(const Matrix& B, const Vector& u, double tol = kDefaultTol) {
    ValidationReport report;
    auto flag = [&](std::string code, int i, int j, double magnitude) {
        report.violations.push_back({std::move(code), i, j, magnitude});
    };

    const auto d = B.rows();
    if (d < 1 || B.cols() != d || u.size() != d) {
        flag("DIMENSION_MISMATCH", static_cast<int>(B.rows()), static_cast<int>(B.cols()),
             static_cast<double>(u.size()));
        report.is_valid = false;
        return report;
    }

    const double b_scale = std::max(1.0, B.cwiseAbs().maxCoeff());
    const double u_scale = std::max(1.0, u.cwiseAbs().maxCoeff());

    for (Eigen::Index j = 0; j < d; ++j) {
        if (B(j, j) > tol * b_scale) flag("SIGN_DIAGONAL", int(j), int(j), B(j, j));
        for (Eigen::Index i = 0; i < d; ++i) {
            if (i != j && B(i, j) < -tol * b_scale) flag("SIGN_OFFDIAGONAL", int(i), int(j), -B(i, j));
        }
        const double col_sum = B.col(j).sum();
        if (col_sum > tol * b_scale) flag("COLUMN_SUM", -1, int(j), col_sum);
    }

    for (Eigen::Index i = 0; i < d; ++i) {
        if (u[i] < -tol * u_scale) flag("SIGN_INPUT", int(i), -1, -u[i]);
    }
    if (u.cwiseAbs().sum() == 0.0) flag("ZERO_INPUT", -1, -1, 0.0);

    Eigen::FullPivLU<Matrix> lu(B);
    if (!lu.isInvertible()) {
        flag("SINGULAR_MATRIX", -1, -1, std::abs(lu.determinant()));
    }

    report.is_valid = report.violations.empty();
    return report;
}

inline ValidationReport validate(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    return validate(sys.B, sys.u, tol);
}

inline bool is_valid(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    return validate(sys, tol).is_valid;
}

/// Solves B x = -u with a partially pivoted LU factorization (never an explicit
/// inverse) and derives the release flux r = z .* x*.
inline SteadyState steady_state(const CompartmentalSystem& sys, double tol = kDefaultTol) {
    Eigen::PartialPivLU<Matrix> lu(sys.B);
    Vector x = lu.solve(-sys.u);
    if (!x.allFinite()) {
        throw Error(ErrorCode::SingularMatrix, "steady-state solve failed; B is singular");
    }
    const double residual = (sys.B * x + sys.u).cwiseAbs().maxCoeff();
    const double residual_scale =
        sys.u.cwiseAbs().maxCoeff() + sys.B.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff();
    if (residual > 1e-6 * std::max(1.0, residual_scale)) {
        throw Error(ErrorCode::SingularMatrix, "steady-state residual too large; B is numerically singular");
    }

    const double x_scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] < 0.0) {
            if (x[j] < -tol * x_scale) {
                throw Error(ErrorCode::NegativeSteadyState,
                            "steady-state component " + std::to_string(j + 1) + " is negative");
            }
            x[j] = 0.0;
        }
    }

    SteadyState result;
    result.x_star = std::move(x);
    result.release_flux = output_rates(sys.B, tol).cwiseProduct(result.x_star);
    return result;
}

} // namespace pathent
