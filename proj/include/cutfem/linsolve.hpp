#pragma once

#include <Eigen/Sparse>
#include <string>

namespace cutfem {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class SolveStatus { Converged, NoConvergence, SingularMatrix };

struct SolveReport {
    Eigen::VectorXd x;       // solution, or best iterate on NoConvergence
    int iterations = 0;
    double residual = 0.0;   // |b - A x| / |b| (absolute when b = 0)
    SolveStatus status = SolveStatus::Converged;
    std::string method;      // "dense_lu", "sparse_lu" or "gmres"
};

struct SolveOptions {
    double tol = 1e-10;       // relative residual target
    int max_iter = 0;         // 0: 10 * N
    int restart = 100;
    int dense_threshold = 2000;  // dense factorization up to this size
    bool force_gmres = false;    // skip the direct paths (testing, huge systems)
};

// Direct factorization first: partially pivoted dense LU up to
// dense_threshold, supernodal sparse LU above it. Restarted GMRES with
// symmetric Jacobi (diagonal) scaling serves as the fallback and can be
// forced; cut P3 systems condition too badly for it to be the default.
// Success always means the true relative residual meets tol.
SolveReport solve(const SpMat& A, const Eigen::VectorXd& b, const SolveOptions& opts = {});

struct ConditionEstimate {
    double kappa = 0.0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
};

// Rough 2-norm condition number: 50 power iterations on A^T A for the top
// singular value, 50 inverse iterations (each one a transpose solve plus a
// solve) for the bottom one, both from an all-ones start.
ConditionEstimate estimate_condition(const SpMat& A, const SolveOptions& opts = {});

}  // namespace cutfem
