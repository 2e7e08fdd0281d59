#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cutfem/linsolve.hpp"

using namespace cutfem;

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat diagonal(const std::vector<double>& d) {
    SpMat A(static_cast<int>(d.size()), static_cast<int>(d.size()));
    Triplets t;
    for (size_t i = 0; i < d.size(); ++i)
        t.emplace_back(static_cast<int>(i), static_cast<int>(i), d[i]);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

}  // namespace

TEST_CASE("identity and diagonal systems solve exactly") {
    SpMat I = diagonal({1.0, 1.0, 1.0});
    Eigen::VectorXd b(3);
    b << 0.3, -1.2, 7.0;
    SolveReport rep = solve(I, b);
    CHECK(rep.status == SolveStatus::Converged);
    CHECK(rep.method == "dense_lu");
    CHECK((rep.x - b).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(rep.residual <= 1e-10);

    SpMat D = diagonal({2.0, 4.0});
    Eigen::VectorXd b2(2);
    b2 << 2.0, 8.0;
    SolveReport rep2 = solve(D, b2);
    CHECK(rep2.x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rep2.x[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("zero right-hand side short-circuits") {
    SpMat D = diagonal({2.0, 4.0, 8.0});
    SolveReport rep = solve(D, Eigen::VectorXd::Zero(3));
    CHECK(rep.status == SolveStatus::Converged);
    CHECK(rep.x.norm() == 0.0);
    CHECK(rep.iterations == 0);
}

TEST_CASE("singular systems are reported, not mis-solved") {
    Triplets t;
    t.emplace_back(0, 0, 1.0);
    t.emplace_back(0, 1, 1.0);
    t.emplace_back(1, 0, 1.0);
    t.emplace_back(1, 1, 1.0);
    SpMat A(2, 2);
    A.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd b(2);
    b << 1.0, 2.0;
    SolveReport rep = solve(A, b);
    CHECK(rep.status == SolveStatus::SingularMatrix);
}

TEST_CASE("forced gmres agrees with the direct path") {
    std::mt19937 rng(307);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int n = 60;
    // Diagonally dominant random system.
    Triplets t;
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
            if (i == j) continue;
            double v = uni(rng);
            off += std::abs(v);
            t.emplace_back(i, j, v);
        }
        t.emplace_back(i, i, off + 1.0);
    }
    SpMat A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = uni(rng);

    SolveReport direct = solve(A, b);
    REQUIRE(direct.status == SolveStatus::Converged);
    CHECK(direct.method == "dense_lu");

    SolveOptions opts;
    opts.force_gmres = true;
    SolveReport iter = solve(A, b, opts);
    REQUIRE(iter.status == SolveStatus::Converged);
    CHECK(iter.method == "gmres");
    CHECK(iter.iterations > 0);
    CHECK((iter.x - direct.x).lpNorm<Eigen::Infinity>() < 1e-7);
    // The reported residual is the true one.
    double true_res = (b - A * iter.x).norm() / b.norm();
    CHECK(iter.residual == doctest::Approx(true_res).epsilon(1e-10));
    CHECK(iter.residual <= opts.tol);
}

TEST_CASE("large systems take the sparse factorization path") {
    const int n = 2500;  // above the dense threshold
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = 1.0 + static_cast<double>(i) / n;
    SpMat A = diagonal(d);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
    SolveReport rep = solve(A, b);
    CHECK(rep.status == SolveStatus::Converged);
    CHECK(rep.method == "sparse_lu");
    CHECK(rep.residual <= 1e-10);
    for (int i = 0; i < n; i += 97)
        CHECK(rep.x[i] == doctest::Approx(1.0 / d[i]).epsilon(1e-12));
}

TEST_CASE("condition estimates recover diagonal extremes") {
    ConditionEstimate ce = estimate_condition(diagonal({1.0, 100.0}));
    CHECK(ce.sigma_max == doctest::Approx(100.0).epsilon(0.01));
    CHECK(ce.sigma_min == doctest::Approx(1.0).epsilon(0.01));
    CHECK(ce.kappa == doctest::Approx(100.0).epsilon(0.02));

    // Sparse-path estimate, diagonal spread 1..50.
    const int n = 2200;
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = 1.0 + 49.0 * i / (n - 1);
    ConditionEstimate big = estimate_condition(diagonal(d));
    CHECK(big.kappa > 25.0);
    CHECK(big.kappa < 60.0);
}
