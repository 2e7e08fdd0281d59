#include "cutfem/linsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <functional>
#include <limits>

#include "cutfem/common.hpp"

namespace cutfem {

namespace {

using Eigen::VectorXd;

SolveReport solve_dense(const SpMat& A, const VectorXd& b, double tol) {
    SolveReport rep;
    rep.method = "dense_lu";
    Eigen::MatrixXd Ad(A);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Ad);
    double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (min_pivot < 1e-14) {
        rep.status = SolveStatus::SingularMatrix;
        rep.x = VectorXd::Zero(b.size());
        rep.residual = 1.0;
        return rep;
    }
    rep.x = lu.solve(b);
    double bn = b.norm();
    rep.residual = (b - A * rep.x).norm() / (bn > 0.0 ? bn : 1.0);
    rep.iterations = 1;
    rep.status = rep.residual <= tol ? SolveStatus::Converged : SolveStatus::NoConvergence;
    return rep;
}

SolveReport solve_sparse(const SpMat& A, const VectorXd& b, double tol) {
    SolveReport rep;
    rep.method = "sparse_lu";
    Eigen::SparseMatrix<double> Ac(A);  // SparseLU wants column-major
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Ac);
    if (lu.info() != Eigen::Success) {
        rep.status = SolveStatus::SingularMatrix;
        rep.x = VectorXd::Zero(b.size());
        rep.residual = 1.0;
        return rep;
    }
    rep.x = lu.solve(b);
    rep.x += lu.solve((b - A * rep.x).eval());  // one refinement step
    double bn = b.norm();
    rep.residual = (b - A * rep.x).norm() / (bn > 0.0 ? bn : 1.0);
    rep.iterations = 1;
    rep.status = rep.residual <= tol ? SolveStatus::Converged : SolveStatus::NoConvergence;
    return rep;
}

// Restarted GMRES (modified Gram-Schmidt Arnoldi with Givens rotations) on
// the symmetrically Jacobi-scaled system S A S y = S b, x = S y, with
// S = diag(|a_ii|)^{-1/2}. Convergence is always certified on the true
// residual of the original system.
SolveReport solve_gmres(const SpMat& A, const VectorXd& b, const SolveOptions& opts) {
    SolveReport rep;
    rep.method = "gmres";
    const int n = static_cast<int>(A.rows());
    const int m = std::max(1, opts.restart);
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n;
    const double bn = b.norm();

    VectorXd s(n);
    for (int i = 0; i < n; ++i) {
        double d = std::abs(A.coeff(i, i));
        s[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
    }
    auto apply = [&](const VectorXd& v) -> VectorXd {
        return s.asDiagonal() * (A * (s.asDiagonal() * v)).eval();
    };
    const VectorXd bhat = s.asDiagonal() * b;
    const double bhn = bhat.norm();

    VectorXd y = VectorXd::Zero(n);
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    VectorXd cs(m), sn(m), g(m + 1);

    int iters = 0;
    double best_res = std::numeric_limits<double>::infinity();
    VectorXd best_x = VectorXd::Zero(n);
    // Aim below tol in the scaled norm; the outer true-residual check decides.
    const double inner_target = 0.25 * opts.tol * (bhn > 0.0 ? bhn : 1.0);

    while (iters < max_iter) {
        VectorXd r = bhat - apply(y);
        double beta = r.norm();
        if (beta == 0.0) break;
        V.col(0) = r / beta;
        g.setZero();
        g[0] = beta;

        int j = 0;
        for (; j < m && iters < max_iter; ++j) {
            ++iters;
            VectorXd w = apply(V.col(j));
            for (int i = 0; i <= j; ++i) {
                H(i, j) = V.col(i).dot(w);
                w -= H(i, j) * V.col(i);
            }
            H(j + 1, j) = w.norm();
            if (H(j + 1, j) > 0.0) V.col(j + 1) = w / H(j + 1, j);

            for (int i = 0; i < j; ++i) {
                double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
                H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
                H(i, j) = t;
            }
            double denom = std::hypot(H(j, j), H(j + 1, j));
            if (denom == 0.0) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = H(j, j) / denom;
                sn[j] = H(j + 1, j) / denom;
            }
            H(j, j) = denom;
            H(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            // Covers lucky breakdown too: a zero subdiagonal zeroes sn and g.
            if (std::abs(g[j + 1]) <= inner_target) {
                ++j;
                break;
            }
        }

        // Back-substitute the j x j triangular system and update y.
        VectorXd yy(j);
        for (int i = j - 1; i >= 0; --i) {
            double t = g[i];
            for (int k = i + 1; k < j; ++k) t -= H(i, k) * yy[k];
            yy[i] = t / H(i, i);
        }
        y += V.leftCols(j) * yy;

        VectorXd x = s.asDiagonal() * y;
        double res = (b - A * x).norm() / (bn > 0.0 ? bn : 1.0);
        if (res < best_res) {
            best_res = res;
            best_x = x;
        }
        if (res <= opts.tol) break;
    }

    rep.x = best_x;
    rep.iterations = iters;
    rep.residual = best_res;
    rep.status = best_res <= opts.tol ? SolveStatus::Converged : SolveStatus::NoConvergence;
    return rep;
}

}  // namespace

SolveReport solve(const SpMat& A, const VectorXd& b, const SolveOptions& opts) {
    if (A.rows() != A.cols() || A.rows() != b.size()) throw Error("solve: shape mismatch");
    if (b.norm() == 0.0) {
        SolveReport rep;
        rep.x = VectorXd::Zero(b.size());
        rep.method = "trivial";
        return rep;
    }
    if (opts.force_gmres) return solve_gmres(A, b, opts);
    if (A.rows() <= opts.dense_threshold) return solve_dense(A, b, opts.tol);
    SolveReport rep = solve_sparse(A, b, opts.tol);
    if (rep.status != SolveStatus::NoConvergence) return rep;
    SolveReport it = solve_gmres(A, b, opts);
    return it.residual <= rep.residual ? it : rep;
}

ConditionEstimate estimate_condition(const SpMat& A, const SolveOptions& opts) {
    const int n = static_cast<int>(A.rows());
    ConditionEstimate est;
    if (n == 0) return est;
    SpMat At = SpMat(A.transpose());

    // Largest singular value: power iteration on A^T A.
    VectorXd v = VectorXd::Ones(n) / std::sqrt(double(n));
    double lam = 0.0;
    for (int it = 0; it < 50; ++it) {
        VectorXd w = At * (A * v).eval();
        lam = w.norm();
        if (lam == 0.0) return est;
        v = w / lam;
    }
    est.sigma_max = std::sqrt(lam);

    // Smallest singular value: inverse iteration, (A^T A)^{-1} applied as a
    // transpose solve followed by a solve, reusing one factorization per
    // matrix (dense or sparse by size).
    std::function<VectorXd(const VectorXd&)> apply_inv;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu, lut;
    Eigen::SparseMatrix<double> Ac, Atc;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> slu, slut;
    if (n <= opts.dense_threshold) {
        lu.compute(Eigen::MatrixXd(A));
        lut.compute(Eigen::MatrixXd(At));
        apply_inv = [&](const VectorXd& z) { return lu.solve(lut.solve(z)).eval(); };
    } else {
        Ac = A;
        Atc = At;
        slu.compute(Ac);
        slut.compute(Atc);
        if (slu.info() == Eigen::Success && slut.info() == Eigen::Success) {
            apply_inv = [&](const VectorXd& z) { return slu.solve(slut.solve(z)).eval(); };
        } else {
            apply_inv = [&](const VectorXd& z) {
                SolveOptions so = opts;
                so.max_iter = 0;
                SolveReport r1 = solve(At, z, so);
                SolveReport r2 = solve(A, r1.x, so);
                return r2.x;
            };
        }
    }
    v = VectorXd::Ones(n) / std::sqrt(double(n));
    double mu = 0.0;
    for (int it = 0; it < 50; ++it) {
        VectorXd w = apply_inv(v);
        mu = w.norm();
        if (mu == 0.0 || !std::isfinite(mu)) return est;
        v = w / mu;
    }
    est.sigma_min = 1.0 / std::sqrt(mu);
    est.kappa = est.sigma_max / est.sigma_min;
    return est;
}

}  // namespace cutfem
