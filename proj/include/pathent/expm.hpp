#pragma once

// Dense matrix exponential (scaling and squaring with diagonal Pade
// approximants, following Higham 2005) and an adaptive Dormand-Prince
// integrator for w' = A w as an alternative route for large t*||A||.

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "pathent/error.hpp"

namespace pathent {

namespace detail {

inline Eigen::MatrixXd pade_solve(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
    // exp(A) ~ (V - U)^{-1} (V + U)
    return (V - U).partialPivLu().solve(V + U);
}

inline Eigen::MatrixXd expm_pade3(const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2) {
    static constexpr std::array<double, 4> b{120., 60., 12., 1.};
    const auto I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd U = A * (b[3] * A2 + b[1] * I);
    Eigen::MatrixXd V = b[2] * A2 + b[0] * I;
    return pade_solve(U, V);
}

inline Eigen::MatrixXd expm_pade5(const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2,
                                  const Eigen::MatrixXd& A4) {
    static constexpr std::array<double, 6> b{30240., 15120., 3360., 420., 30., 1.};
    const auto I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd U = A * (b[5] * A4 + b[3] * A2 + b[1] * I);
    Eigen::MatrixXd V = b[4] * A4 + b[2] * A2 + b[0] * I;
    return pade_solve(U, V);
}

inline Eigen::MatrixXd expm_pade7(const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2,
                                  const Eigen::MatrixXd& A4, const Eigen::MatrixXd& A6) {
    static constexpr std::array<double, 8> b{17297280., 8648640., 1995840., 277200.,
                                             25200., 1512., 56., 1.};
    const auto I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd U = A * (b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    Eigen::MatrixXd V = b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    return pade_solve(U, V);
}

inline Eigen::MatrixXd expm_pade9(const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2,
                                  const Eigen::MatrixXd& A4, const Eigen::MatrixXd& A6,
                                  const Eigen::MatrixXd& A8) {
    static constexpr std::array<double, 10> b{17643225600., 8821612800., 2075673600.,
                                              302702400.,   30270240.,   2162160.,
                                              110880.,      3960.,       90.,
                                              1.};
    const auto I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd U = A * (b[9] * A8 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    Eigen::MatrixXd V = b[8] * A8 + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    return pade_solve(U, V);
}

inline Eigen::MatrixXd expm_pade13(const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2,
                                   const Eigen::MatrixXd& A4, const Eigen::MatrixXd& A6) {
    static constexpr std::array<double, 14> b{
        64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
        129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
        1323241920.,        40840800.,          960960.,           16380.,
        182.,               1.};
    const auto I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) +
                             b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    Eigen::MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) +
                        b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    return pade_solve(U, V);
}

} // namespace detail

inline Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "matrix exponential needs a square matrix");
    }
    const double norm = A.cwiseAbs().colwise().sum().maxCoeff(); // 1-norm

    const Eigen::MatrixXd A2 = A * A;
    if (norm <= 1.495585217958292e-2) return detail::expm_pade3(A, A2);
    const Eigen::MatrixXd A4 = A2 * A2;
    if (norm <= 2.539398330063230e-1) return detail::expm_pade5(A, A2, A4);
    const Eigen::MatrixXd A6 = A4 * A2;
    if (norm <= 9.504178996162932e-1) return detail::expm_pade7(A, A2, A4, A6);
    if (norm <= 2.097847961257068e0) {
        return detail::expm_pade9(A, A2, A4, A6, A4 * A4);
    }

    constexpr double theta13 = 5.371920351148152;
    int squarings = 0;
    double scale = 1.0;
    if (norm > theta13) {
        squarings = std::max(0, int(std::ceil(std::log2(norm / theta13))));
        scale = std::ldexp(1.0, -squarings);
    }
    Eigen::MatrixXd As = A * scale;
    Eigen::MatrixXd A2s = A2 * (scale * scale);
    Eigen::MatrixXd A4s = A4 * (scale * scale * scale * scale);
    Eigen::MatrixXd A6s = A2s * A4s;
    Eigen::MatrixXd E = detail::expm_pade13(As, A2s, A4s, A6s);
    for (int k = 0; k < squarings; ++k) E = E * E;
    return E;
}

/// Integrates w' = A w from w(0) = w0 up to time t with an adaptive
/// Dormand-Prince RK5(4) scheme.
inline Eigen::VectorXd propagate_linear_ode(const Eigen::MatrixXd& A, Eigen::VectorXd w,
                                            double t, double rel_tol = 1e-10,
                                            double abs_tol = 1e-14) {
    if (t == 0.0) return w;
    if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "negative integration time");

    const double norm = std::max(A.cwiseAbs().colwise().sum().maxCoeff(), 1e-300);
    double h = std::min(t, 0.1 / norm);
    double time = 0.0;

    Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, w5, w4;
    k1 = A * w;
    while (time < t) {
        h = std::min(h, t - time);
        k2 = A * (w + h * (1.0 / 5.0) * k1);
        k3 = A * (w + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
        k4 = A * (w + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
        k5 = A * (w + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                           64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
        k6 = A * (w + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                           49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
        w5 = w + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                      2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
        k7 = A * w5;
        w4 = w + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4 -
                      92097.0 / 339200.0 * k5 + 187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);

        const double scale_ref = std::max(w.cwiseAbs().maxCoeff(), w5.cwiseAbs().maxCoeff());
        const double err = (w5 - w4).cwiseAbs().maxCoeff() / (abs_tol + rel_tol * scale_ref);
        if (err <= 1.0) {
            time += h;
            w = w5;
            k1 = k7; // first-same-as-last
        }
        const double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (!(h > 0.0) || !w.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "ODE propagation diverged");
        }
    }
    return w;
}

} // namespace pathent
