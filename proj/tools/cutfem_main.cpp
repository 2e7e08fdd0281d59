// Command line frontend: single solves, mesh refinement studies and
// cut-position condition sweeps, all driven by flat key = value configs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cutfem/study.hpp"

namespace {

using namespace cutfem;

const char* kRingDemo = R"(# Ring between two concentric circles, quadratic elements,
# symmetric first-order boundary correction.
geometry = ring
r_inner = 0.25
r_outer = 0.75
p = 2
method = symmetric_k1
beta = 100
gamma_j = 0.1
levels = 16, 32, 64, 128
box = -1, -1, 1, 1
csv = ring_p2.csv
svg = ring_p2.svg
gnuplot = ring_p2.gp
)";

const char* kEllipseDemo = R"(# Ellipse with a smooth manufactured solution, cubic elements,
# second-order boundary correction.
geometry = ellipse
ellipse_a = 0.75
ellipse_b = 0.5
p = 3
method = nonsymmetric_taylor
taylor_k = 2
beta = 100
gamma_j = 0.1
levels = 16, 32, 64, 128
box = -1, -1, 1, 1
csv = ellipse_p3.csv
svg = ellipse_p3.svg
gnuplot = ellipse_p3.gp
)";

std::string join(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir + "/" + name;
}

ExperimentConfig load(const std::string& config_path, const std::string& out_dir,
                      bool quiet) {
    ExperimentConfig cfg = parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (quiet) cfg.quiet = true;
    cfg.validate();
    make_form_config(cfg).validate(cfg.order);
    if (!cfg.out_dir.empty() && cfg.out_dir != ".")
        std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

int run_solve(const ExperimentConfig& cfg) {
    int n = cfg.levels.front();
    SolvedLevel sl = solve_level(cfg, n);
    if (sl.solution.status == SolveStatus::SingularMatrix) {
        std::fprintf(stderr, "error: singular system matrix (n=%d)\n", n);
        return 2;
    }
    if (sl.solution.status == SolveStatus::NoConvergence) {
        std::fprintf(stderr,
                     "error: solver stalled at relative residual %.3e after %d iterations\n",
                     sl.solution.residual, sl.solution.iterations);
        return 2;
    }

    std::string sol_path = join(cfg.out_dir, "solution.txt");
    write_solution(sl.dm, sl.solution.x, sol_path);
    if (cfg.mesh_dump)
        dump_mesh(sl.am, join(cfg.out_dir, "mesh_" + std::to_string(n) + ".txt"));
    if (cfg.matrix_dump)
        dump_matrix(sl.sys.A, join(cfg.out_dir, "matrix_" + std::to_string(n) + ".txt"));

    if (!cfg.quiet) {
        std::printf("n=%d  h=%.6g  ndof=%d  %s iters=%d  residual=%.3e\n", n, sl.am.h,
                    sl.dm.ndof, sl.solution.method.c_str(), sl.solution.iterations,
                    sl.solution.residual);
        LevelSet ls = make_level_set(cfg);
        if (ls.has_solution()) {
            ErrorNorms en = compute_errors(sl.am, sl.dm, ls, cfg.gamma_j, sl.bqp,
                                           sl.solution.x, cfg.exact_domain_error);
            std::printf("errors: l2=%.6e  h1=%.6e  energy=%.6e", en.l2, en.h1, en.energy);
            if (cfg.exact_domain_error) std::printf("  l2_exact_domain=%.6e", en.l2_exact);
            std::printf("\n");
        }
        std::printf("solution written to %s\n", sol_path.c_str());
    }
    return 0;
}

int run_convergence(const ExperimentConfig& cfg) {
    StudyReport rep = run_study(cfg);
    write_csv(rep, join(cfg.out_dir, cfg.csv));
    write_svg_plot(rep, join(cfg.out_dir, cfg.svg));
    write_gnuplot_script(rep, cfg.csv, join(cfg.out_dir, cfg.gnuplot));
    if (!cfg.quiet)
        std::printf("wrote %s, %s, %s\n", join(cfg.out_dir, cfg.csv).c_str(),
                    join(cfg.out_dir, cfg.svg).c_str(),
                    join(cfg.out_dir, cfg.gnuplot).c_str());
    if (!rep.ok) {
        for (const LevelResult& lr : rep.levels)
            if (!lr.error.empty())
                std::fprintf(stderr, "error: level n=%d failed: %s\n", lr.n,
                             lr.error.c_str());
        return 2;
    }
    return 0;
}

int run_condition(const ExperimentConfig& cfg) {
    std::vector<ConditionSweepRow> rows = condition_sweep(cfg);
    // Prefixed so a convergence run in the same directory keeps its CSV.
    std::string csv_path = join(cfg.out_dir, "condition_" + cfg.csv);
    write_condition_csv(rows, csv_path);

    std::map<int, std::pair<double, double>> extent;  // n -> (min, max)
    for (const ConditionSweepRow& r : rows) {
        auto it = extent.find(r.n);
        if (it == extent.end()) extent[r.n] = {r.kappa, r.kappa};
        else {
            it->second.first = std::min(it->second.first, r.kappa);
            it->second.second = std::max(it->second.second, r.kappa);
        }
    }
    if (!cfg.quiet) {
        for (const auto& [n, mm] : extent)
            std::printf("n=%4d  cond in [%.4e, %.4e]  max/min = %.3f\n", n, mm.first,
                        mm.second, mm.second / mm.first);
        std::printf("wrote %s\n", csv_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cut finite element Poisson solver with boundary-corrected Nitsche "
                 "Dirichlet conditions"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool quiet = false;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides out_dir)");
        sub->add_flag("--quiet", quiet, "suppress progress output");
    };

    CLI::App* solve_cmd =
        app.add_subcommand("solve", "solve the coarsest configured level, dump the solution");
    CLI::App* conv_cmd =
        app.add_subcommand("convergence", "run the full mesh refinement study");
    CLI::App* cond_cmd = app.add_subcommand(
        "condition", "sweep the cut position and estimate condition numbers");
    app.add_subcommand("demo", "print ready-made example configs");
    add_common(solve_cmd);
    add_common(conv_cmd);
    add_common(cond_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand("demo")) {
            std::printf("%s\n%s", kRingDemo, kEllipseDemo);
            return 0;
        }
        ExperimentConfig cfg = load(config_path, out_dir, quiet);
        if (app.got_subcommand(solve_cmd)) return run_solve(cfg);
        if (app.got_subcommand(conv_cmd)) return run_convergence(cfg);
        if (app.got_subcommand(cond_cmd)) return run_condition(cfg);
    } catch (const cutfem::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const cutfem::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
