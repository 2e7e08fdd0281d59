#pragma once

#include <limits>
#include <string>
#include <vector>

#include "cutfem/assembly.hpp"
#include "cutfem/linsolve.hpp"

namespace cutfem {

// Flat key = value experiment description (see parse_config_text for the
// accepted keys). Kept deliberately dumb: no sections, no types beyond
// numbers, strings, comma lists and on/off switches.
struct ExperimentConfig {
    // Geometry. `offset` translates the level set against the fixed mesh.
    std::string geometry = "ring";  // ring | ellipse | circle | affine
    double r_inner = 0.25, r_outer = 0.75;
    double ellipse_a = 0.75, ellipse_b = 0.5;
    Vec2 circle_center{0.0, 0.0};
    double circle_radius = 0.5;
    Vec2 affine_normal{0.0, 1.0};
    double affine_offset = 0.0;
    Vec2 offset{0.0, 0.0};

    // Discretization.
    int order = 2;
    std::string method = "symmetric_k1";  // symmetric_k1 | nonsymmetric_taylor | exact_boundary
    int taylor_k = 1;
    double beta = 100.0;
    double gamma_j = 0.1;
    std::string nu_source = "facet";  // facet | exact_normal
    std::vector<int> levels = {16, 32, 64, 128};
    double box_x0 = -1.0, box_y0 = -1.0, box_x1 = 1.0, box_y1 = 1.0;

    // Solver.
    double solver_tol = 1e-10;
    int max_iter = 0;  // 0: 10 N

    // Outputs (paths are relative to out_dir).
    std::string out_dir = ".";
    std::string csv = "study.csv";
    std::string svg = "study.svg";
    std::string gnuplot = "study.gp";
    bool mesh_dump = false;
    bool matrix_dump = false;
    bool condition_estimate = false;
    bool exact_domain_error = true;
    bool quiet = false;

    void validate() const;  // throws ConfigError
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

LevelSet make_level_set(const ExperimentConfig& cfg);
FormConfig make_form_config(const ExperimentConfig& cfg);

struct ErrorNorms {
    double l2 = 0.0;
    double h1 = 0.0;      // gradient seminorm over the discrete domain
    double energy = 0.0;
    double l2_exact = std::numeric_limits<double>::quiet_NaN();  // over the exact domain
};

// Norms of u_exact - u_h, volume terms by cut-cell quadrature at degree
// 2p+2. The exact-domain L2 re-cuts each active element against the exact
// level set with a 4-level uniform sub-triangulation and per-subcell
// centroid sign sampling.
ErrorNorms compute_errors(const ActiveMesh& am, const DofMap& dm, const LevelSet& ls,
                          double gamma_j, const std::vector<BoundaryQuadPoint>& bqp,
                          const Eigen::VectorXd& u, bool exact_domain);

struct LevelResult {
    int n = 0;
    double h = 0.0;
    int ndof = 0;
    double l2 = std::numeric_limits<double>::quiet_NaN();
    double h1 = std::numeric_limits<double>::quiet_NaN();
    double energy = std::numeric_limits<double>::quiet_NaN();
    double l2_exact = std::numeric_limits<double>::quiet_NaN();
    double eoc_l2 = std::numeric_limits<double>::quiet_NaN();
    double max_rho = 0.0;
    double cond = std::numeric_limits<double>::quiet_NaN();
    int iters = 0;
    double seconds = 0.0;
    std::string error;  // nonempty when this level failed
};

struct StudyReport {
    ExperimentConfig cfg;
    std::vector<LevelResult> levels;
    bool ok = true;
};

// Convergence rate between two consecutive levels; NaN when either error is
// at rounding level (< 1e-14).
double eoc(double err_coarse, double err_fine, double h_coarse, double h_fine);

// Least-squares slope of log(v) vs log(h).
double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& v);

// One mesh level, fully assembled and solved. Heavyweight; meant for single
// runs and for tests that need access to the discrete operator.
struct SolvedLevel {
    ActiveMesh am;
    DofMap dm;
    std::vector<BoundaryQuadPoint> bqp;
    AssembledSystem sys;
    SolveReport solution;
};

SolvedLevel solve_level(const ExperimentConfig& cfg, int n);

// Nodal values as "x y value" rows, one per degree of freedom.
void write_solution(const DofMap& dm, const Eigen::VectorXd& u, const std::string& path);

// Full pipeline per level: mesh, assemble, solve, error norms. A failing
// level is recorded in its result and clears ok; later levels still run.
StudyReport run_study(const ExperimentConfig& cfg);

void write_csv(const StudyReport& report, const std::string& path);
void write_svg_plot(const StudyReport& report, const std::string& path);
void write_gnuplot_script(const StudyReport& report, const std::string& csv_name,
                          const std::string& path);

struct ConditionSweepRow {
    int n = 0;
    double h = 0.0;
    int t = 0;          // offset index, shift = t h / 16
    double offset = 0.0;
    int ndof = 0;
    double kappa = 0.0;
};

// Translates the level set by t h/16, t = 0..15, for every level and
// estimates the condition number of each assembled system.
std::vector<ConditionSweepRow> condition_sweep(const ExperimentConfig& cfg);

void write_condition_csv(const std::vector<ConditionSweepRow>& rows, const std::string& path);

}  // namespace cutfem
