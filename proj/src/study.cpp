#include "cutfem/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cutfem {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    size_t b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number for '" + key + "': '" + val + "'");
    }
}

int to_int(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        int v = std::stoi(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for '" + key + "': '" + val + "'");
    }
}

bool to_bool(const std::string& key, const std::string& val) {
    if (val == "on" || val == "true" || val == "1" || val == "yes") return true;
    if (val == "off" || val == "false" || val == "0" || val == "no") return false;
    throw ConfigError("bad switch for '" + key + "': '" + val + "' (use on/off)");
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) out.push_back(trim(item));
    return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir + "/" + name;
}

// snprintf-based shortest-roundtrip-ish formatting; empty string for
// non-finite values so unset CSV cells stay blank.
std::string fmt_g(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt_f(double v, int prec) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (geometry != "ring" && geometry != "ellipse" && geometry != "circle" &&
        geometry != "affine")
        fail("unknown geometry '" + geometry + "'");
    if (geometry == "ring" && !(r_inner > 0.0 && r_outer > r_inner))
        fail("ring radii must satisfy 0 < r_inner < r_outer");
    if (geometry == "ellipse" && !(ellipse_a > 0.0 && ellipse_b > 0.0))
        fail("ellipse semi-axes must be positive");
    if (geometry == "circle" && !(circle_radius > 0.0))
        fail("circle_radius must be positive");
    if (geometry == "affine" && !(norm(affine_normal) > 0.0))
        fail("affine_normal must be nonzero");
    if (order < 1 || order > 3) fail("p must be 1, 2 or 3");
    if (method != "symmetric_k1" && method != "nonsymmetric_taylor" &&
        method != "exact_boundary")
        fail("unknown method '" + method + "'");
    if (taylor_k < 0 || taylor_k > 2) fail("taylor_k must be 0, 1 or 2");
    if (!(beta > 0.0)) fail("beta must be positive");
    if (gamma_j < 0.0) fail("gamma_j must be nonnegative");
    if (nu_source != "facet" && nu_source != "exact_normal")
        fail("unknown nu_source '" + nu_source + "'");
    if (levels.empty()) fail("levels must be nonempty");
    for (size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 1) fail("levels must be positive");
        if (i > 0 && levels[i] <= levels[i - 1]) fail("levels must be strictly increasing");
    }
    if (!(box_x1 > box_x0) || !(box_y1 > box_y0)) fail("box must have positive extent");
    if (!(solver_tol > 0.0)) fail("solver_tol must be positive");
    if (max_iter < 0) fail("max_iter must be nonnegative");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = raw;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" +
                              key + "'");

        if (key == "geometry") cfg.geometry = val;
        else if (key == "r_inner") cfg.r_inner = to_double(key, val);
        else if (key == "r_outer") cfg.r_outer = to_double(key, val);
        else if (key == "ellipse_a") cfg.ellipse_a = to_double(key, val);
        else if (key == "ellipse_b") cfg.ellipse_b = to_double(key, val);
        else if (key == "circle_center_x") cfg.circle_center.x = to_double(key, val);
        else if (key == "circle_center_y") cfg.circle_center.y = to_double(key, val);
        else if (key == "circle_radius") cfg.circle_radius = to_double(key, val);
        else if (key == "affine_normal_x") cfg.affine_normal.x = to_double(key, val);
        else if (key == "affine_normal_y") cfg.affine_normal.y = to_double(key, val);
        else if (key == "affine_offset") cfg.affine_offset = to_double(key, val);
        else if (key == "offset_x") cfg.offset.x = to_double(key, val);
        else if (key == "offset_y") cfg.offset.y = to_double(key, val);
        else if (key == "p") cfg.order = to_int(key, val);
        else if (key == "method") cfg.method = val;
        else if (key == "taylor_k") cfg.taylor_k = to_int(key, val);
        else if (key == "beta") cfg.beta = to_double(key, val);
        else if (key == "gamma_j") cfg.gamma_j = to_double(key, val);
        else if (key == "nu_source") cfg.nu_source = val;
        else if (key == "levels") {
            cfg.levels.clear();
            for (const auto& item : split_commas(val)) cfg.levels.push_back(to_int(key, item));
        } else if (key == "box") {
            auto parts = split_commas(val);
            if (parts.size() != 4)
                throw ConfigError("box needs 4 comma-separated numbers: x0,y0,x1,y1");
            cfg.box_x0 = to_double(key, parts[0]);
            cfg.box_y0 = to_double(key, parts[1]);
            cfg.box_x1 = to_double(key, parts[2]);
            cfg.box_y1 = to_double(key, parts[3]);
        } else if (key == "solver_tol") cfg.solver_tol = to_double(key, val);
        else if (key == "max_iter") cfg.max_iter = to_int(key, val);
        else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "csv") cfg.csv = val;
        else if (key == "svg") cfg.svg = val;
        else if (key == "gnuplot") cfg.gnuplot = val;
        else if (key == "mesh_dump") cfg.mesh_dump = to_bool(key, val);
        else if (key == "matrix_dump") cfg.matrix_dump = to_bool(key, val);
        else if (key == "condition_estimate") cfg.condition_estimate = to_bool(key, val);
        else if (key == "exact_domain_error") cfg.exact_domain_error = to_bool(key, val);
        else if (key == "quiet") cfg.quiet = to_bool(key, val);
        else
            throw ConfigError("unknown key '" + key + "' (line " + std::to_string(lineno) +
                              ")");
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

LevelSet make_level_set(const ExperimentConfig& cfg) {
    LevelSet ls;
    if (cfg.geometry == "ring") ls = make_ring(cfg.r_inner, cfg.r_outer);
    else if (cfg.geometry == "ellipse") ls = make_ellipse(cfg.ellipse_a, cfg.ellipse_b);
    else if (cfg.geometry == "circle") ls = make_circle(cfg.circle_center, cfg.circle_radius);
    else if (cfg.geometry == "affine") ls = make_affine(cfg.affine_normal, cfg.affine_offset);
    else throw ConfigError("unknown geometry '" + cfg.geometry + "'");
    ls.shift = cfg.offset;
    return ls;
}

FormConfig make_form_config(const ExperimentConfig& cfg) {
    FormConfig fc;
    if (cfg.method == "symmetric_k1") fc.variant = Variant::SymmetricK1;
    else if (cfg.method == "nonsymmetric_taylor") fc.variant = Variant::NonsymmetricTaylor;
    else if (cfg.method == "exact_boundary") fc.variant = Variant::ExactBoundaryNitsche;
    else throw ConfigError("unknown method '" + cfg.method + "'");
    fc.taylor_k = cfg.taylor_k;
    fc.beta = cfg.beta;
    fc.gamma_j = cfg.gamma_j;
    if (cfg.nu_source == "facet") fc.nu_source = NuSource::FacetNormal;
    else if (cfg.nu_source == "exact_normal") fc.nu_source = NuSource::ExactNormalAtProjection;
    else throw ConfigError("unknown nu_source '" + cfg.nu_source + "'");
    return fc;
}

namespace {

// Discrete solution and gradient inside one element, physical coordinates.
struct ElementField {
    const ReferenceElement* re;
    ElementMap em;
    const std::vector<int>* dofs;
    const Eigen::VectorXd* u;

    double value(Vec2 x) const {
        Vec2 ref = em.inverse_map(x);
        double vals[10];
        re->values(ref, vals);
        double s = 0.0;
        for (int i = 0; i < re->num_basis(); ++i) s += (*u)[(*dofs)[i]] * vals[i];
        return s;
    }
    Vec2 gradient(Vec2 x) const {
        Vec2 ref = em.inverse_map(x);
        double dx[10], dy[10];
        re->partial(1, 0, ref, dx);
        re->partial(0, 1, ref, dy);
        Vec2 gref{0.0, 0.0};
        for (int i = 0; i < re->num_basis(); ++i) {
            double c = (*u)[(*dofs)[i]];
            gref.x += c * dx[i];
            gref.y += c * dy[i];
        }
        return em.push_gradient(gref);
    }
};

// L2 error over the exact domain inside one background triangle: uniform
// midpoint refinement to `depth` levels, keep sub-triangles whose centroid
// lies in {phi < 0}, integrate with the degree-2 edge-midpoint rule.
double exact_domain_l2_sq(const LevelSet& ls, const ElementField& ef,
                          const std::array<Vec2, 3>& tri, int depth) {
    if (depth == 0) {
        Vec2 c = (tri[0] + tri[1] + tri[2]) / 3.0;
        if (!(ls.value(c) < 0.0)) return 0.0;
        double area = std::abs(triangle_area(tri[0], tri[1], tri[2]));
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            Vec2 m = 0.5 * (tri[i] + tri[(i + 1) % 3]);
            double e = ls.solution(m) - ef.value(m);
            acc += e * e;
        }
        return acc * area / 3.0;
    }
    Vec2 m01 = 0.5 * (tri[0] + tri[1]);
    Vec2 m12 = 0.5 * (tri[1] + tri[2]);
    Vec2 m20 = 0.5 * (tri[2] + tri[0]);
    double s = 0.0;
    s += exact_domain_l2_sq(ls, ef, {tri[0], m01, m20}, depth - 1);
    s += exact_domain_l2_sq(ls, ef, {m01, tri[1], m12}, depth - 1);
    s += exact_domain_l2_sq(ls, ef, {m20, m12, tri[2]}, depth - 1);
    s += exact_domain_l2_sq(ls, ef, {m01, m12, m20}, depth - 1);
    return s;
}

}  // namespace

ErrorNorms compute_errors(const ActiveMesh& am, const DofMap& dm, const LevelSet& ls,
                          double gamma_j, const std::vector<BoundaryQuadPoint>& bqp,
                          const Eigen::VectorXd& u, bool exact_domain) {
    const ReferenceElement& re = ReferenceElement::get(dm.order);
    TriangleRule rule = triangle_rule(2 * dm.order + 2);

    double l2 = 0.0, h1 = 0.0, l2x = 0.0;
    for (int ord = 0; ord < am.num_active(); ++ord) {
        auto verts = am.element_vertices(am.active_elements[ord]);
        ElementField ef{&re, make_element_map(verts[0], verts[1], verts[2]),
                        &dm.element_dofs[ord], &u};
        for (const QuadPoint& q : element_volume_quadrature(am, ord, rule)) {
            double e = ls.solution(q.x) - ef.value(q.x);
            Vec2 ge = ls.solution_gradient(q.x) - ef.gradient(q.x);
            l2 += q.w * e * e;
            h1 += q.w * dot(ge, ge);
        }
        if (exact_domain) l2x += exact_domain_l2_sq(ls, ef, verts, 4);
    }

    // Boundary part of the energy norm: h |n.grad e|^2 + h^{-1} |e|^2 on the
    // discrete boundary. The ghost penalty part uses u_h alone since the
    // smooth reference solution has no inter-element derivative jumps; it is
    // evaluated face by face, not via the assembled matrix, which cannot
    // resolve jump energies below its entry-cancellation noise.
    double bdry = 0.0;
    for (const BoundaryQuadPoint& q : bqp) {
        auto verts = am.element_vertices(am.active_elements[q.ordinal]);
        ElementField ef{&re, make_element_map(verts[0], verts[1], verts[2]),
                        &dm.element_dofs[q.ordinal], &u};
        double e = ls.solution(q.x) - ef.value(q.x);
        Vec2 ge = ls.solution_gradient(q.x) - ef.gradient(q.x);
        double dn = dot(q.n_h, ge);
        bdry += q.weight * (am.h * dn * dn + e * e / am.h);
    }
    double jump = ghost_penalty_value(am, dm, gamma_j, u);

    ErrorNorms en;
    en.l2 = std::sqrt(l2);
    en.h1 = std::sqrt(h1);
    en.energy = std::sqrt(h1 + jump + bdry);
    if (exact_domain) en.l2_exact = std::sqrt(l2x);
    return en;
}

double eoc(double err_coarse, double err_fine, double h_coarse, double h_fine) {
    if (!(err_coarse > 1e-14) || !(err_fine > 1e-14))
        return std::numeric_limits<double>::quiet_NaN();
    return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& v) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (size_t i = 0; i < h.size() && i < v.size(); ++i) {
        if (!(h[i] > 0.0) || !(v[i] > 0.0)) continue;
        double x = std::log(h[i]), y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    double denom = m * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return std::numeric_limits<double>::quiet_NaN();
    return (m * sxy - sx * sy) / denom;
}

SolvedLevel solve_level(const ExperimentConfig& cfg, int n) {
    LevelSet ls = make_level_set(cfg);
    FormConfig fc = make_form_config(cfg);
    fc.validate(cfg.order);

    SolvedLevel out;
    BackgroundMesh bg =
        build_background({cfg.box_x0, cfg.box_y0}, {cfg.box_x1, cfg.box_y1}, n);
    out.am = build_active_mesh(ls, bg);
    if (out.am.num_active() == 0)
        throw ConfigError("active mesh is empty: the level set misses the box");

    if (!cfg.quiet) {
        double margin = std::numeric_limits<double>::infinity();
        for (const CutSegment& s : out.am.segments) {
            if (s.length <= 0.0) continue;
            for (Vec2 pnt : {s.a, s.b}) {
                margin = std::min(margin, pnt.x - cfg.box_x0);
                margin = std::min(margin, cfg.box_x1 - pnt.x);
                margin = std::min(margin, pnt.y - cfg.box_y0);
                margin = std::min(margin, cfg.box_y1 - pnt.y);
            }
        }
        if (margin < 2.0 * out.am.h)
            std::fprintf(stderr,
                         "warning: n=%d boundary comes within %.3g of the box edge "
                         "(< 2h = %.3g); keep a margin so the active mesh stays inside\n",
                         n, margin, 2.0 * out.am.h);
    }

    out.dm = build_dof_map(out.am, cfg.order);
    out.bqp = build_boundary_quadrature(out.am, ls, cfg.order + 2, fc.nu_source);
    out.sys = assemble_system(out.am, out.dm, ls, fc, out.bqp);

    SolveOptions so;
    so.tol = cfg.solver_tol;
    so.max_iter = cfg.max_iter;
    out.solution = solve(out.sys.A, out.sys.b, so);
    return out;
}

void write_solution(const DofMap& dm, const Eigen::VectorXd& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    for (int i = 0; i < dm.ndof; ++i)
        out << fmt_g(dm.dof_coords[i].x) << ' ' << fmt_g(dm.dof_coords[i].y) << ' '
            << fmt_g(u[i]) << '\n';
}

StudyReport run_study(const ExperimentConfig& cfg) {
    cfg.validate();
    make_form_config(cfg).validate(cfg.order);  // reject bad forms before any work
    LevelSet ls = make_level_set(cfg);

    StudyReport rep;
    rep.cfg = cfg;
    bool want_dumps = cfg.mesh_dump || cfg.matrix_dump;
    if (want_dumps && !cfg.out_dir.empty() && cfg.out_dir != ".")
        std::filesystem::create_directories(cfg.out_dir);

    for (int n : cfg.levels) {
        LevelResult lr;
        lr.n = n;
        auto t0 = std::chrono::steady_clock::now();
        try {
            SolvedLevel sl = solve_level(cfg, n);
            lr.h = sl.am.h;
            lr.ndof = sl.dm.ndof;
            lr.iters = sl.solution.iterations;
            for (const BoundaryQuadPoint& q : sl.bqp)
                lr.max_rho = std::max(lr.max_rho, std::abs(q.rho_h));
            if (cfg.mesh_dump)
                dump_mesh(sl.am, join_path(cfg.out_dir, "mesh_" + std::to_string(n) + ".txt"));
            if (cfg.matrix_dump)
                dump_matrix(sl.sys.A,
                            join_path(cfg.out_dir, "matrix_" + std::to_string(n) + ".txt"));
            if (sl.solution.status == SolveStatus::SingularMatrix) {
                lr.error = "singular system matrix";
            } else if (sl.solution.status == SolveStatus::NoConvergence) {
                char buf[128];
                std::snprintf(buf, sizeof buf,
                              "solver (%s) stalled at relative residual %.3e after %d "
                              "iterations",
                              sl.solution.method.c_str(), sl.solution.residual,
                              sl.solution.iterations);
                lr.error = buf;
            } else {
                if (ls.has_solution()) {
                    ErrorNorms en = compute_errors(sl.am, sl.dm, ls, cfg.gamma_j, sl.bqp,
                                                   sl.solution.x, cfg.exact_domain_error);
                    lr.l2 = en.l2;
                    lr.h1 = en.h1;
                    lr.energy = en.energy;
                    lr.l2_exact = en.l2_exact;
                }
                if (cfg.condition_estimate) {
                    SolveOptions so;
                    so.tol = cfg.solver_tol;
                    so.max_iter = cfg.max_iter;
                    lr.cond = estimate_condition(sl.sys.A, so).kappa;
                }
            }
        } catch (const Error& e) {
            lr.error = e.what();
        }
        lr.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.levels.push_back(lr);
        if (!lr.error.empty()) {
            // A failed level poisons the report but later levels still run.
            rep.ok = false;
            if (!cfg.quiet) std::fprintf(stderr, "n=%d failed: %s\n", n, lr.error.c_str());
            continue;
        }
        if (!cfg.quiet)
            std::printf("n=%4d  h=%.4e  ndof=%6d  iters=%5d  l2=%.4e  h1=%.4e  "
                        "energy=%.4e  (%.2fs)\n",
                        n, lr.h, lr.ndof, lr.iters, lr.l2, lr.h1, lr.energy, lr.seconds);
    }

    for (size_t i = 1; i < rep.levels.size(); ++i)
        rep.levels[i].eoc_l2 = eoc(rep.levels[i - 1].l2, rep.levels[i].l2,
                                   rep.levels[i - 1].h, rep.levels[i].h);
    return rep;
}

void write_csv(const StudyReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "level,h,ndof,l2_err,h1_err,energy_err,l2_err_exact_domain,eoc_l2,"
           "max_rho_h,cond_est,iters,seconds\n";
    for (const LevelResult& lr : report.levels) {
        out << lr.n << ',' << fmt_g(lr.h) << ',' << lr.ndof << ',' << fmt_g(lr.l2) << ','
            << fmt_g(lr.h1) << ',' << fmt_g(lr.energy) << ',' << fmt_g(lr.l2_exact) << ','
            << fmt_g(lr.eoc_l2) << ',' << fmt_g(lr.max_rho) << ',' << fmt_g(lr.cond) << ','
            << lr.iters << ',' << fmt_f(lr.seconds, 3) << '\n';
    }
}

namespace {

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<Vec2> pts;  // (h, error), level order
    double slope = std::numeric_limits<double>::quiet_NaN();  // final-pair EOC
};

std::vector<PlotSeries> error_series(const StudyReport& report) {
    struct Pick {
        const char* label;
        const char* color;
        double LevelResult::* field;
    };
    static const Pick picks[] = {
        {"L2", "#1b6ca8", &LevelResult::l2},
        {"H1 semi", "#c23b22", &LevelResult::h1},
        {"energy", "#3d8c40", &LevelResult::energy},
    };
    std::vector<PlotSeries> out;
    for (const Pick& p : picks) {
        PlotSeries s;
        s.label = p.label;
        s.color = p.color;
        for (const LevelResult& lr : report.levels) {
            double v = lr.*(p.field);
            if (std::isfinite(v) && v > 0.0 && lr.h > 0.0) s.pts.push_back({lr.h, v});
        }
        if (s.pts.size() >= 2) {
            const Vec2& a = s.pts[s.pts.size() - 2];
            const Vec2& b = s.pts.back();
            s.slope = eoc(a.y, b.y, a.x, b.x);
        }
        if (!s.pts.empty()) out.push_back(std::move(s));
    }
    return out;
}

std::string series_title(const PlotSeries& s) {
    if (std::isfinite(s.slope)) return s.label + " (EOC " + fmt_f(s.slope, 2) + ")";
    return s.label;
}

}  // namespace

void write_svg_plot(const StudyReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");

    const double W = 760, H = 520;
    const double left = 80, right = 590, top = 40, bottom = 460;

    std::vector<PlotSeries> series = error_series(report);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    std::string title = report.cfg.geometry + ", p=" + std::to_string(report.cfg.order) +
                        ", " + report.cfg.method;
    out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
        << title << "</text>\n";

    if (series.empty()) {
        out << "<text x=\"" << left << "\" y=\"" << (top + bottom) / 2
            << "\" font-family=\"sans-serif\" font-size=\"14\">no error data</text>\n"
            << "</svg>\n";
        return;
    }

    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const PlotSeries& s : series)
        for (const Vec2& p : s.pts) {
            xlo = std::min(xlo, std::log10(p.x));
            xhi = std::max(xhi, std::log10(p.x));
            ylo = std::min(ylo, std::log10(p.y));
            yhi = std::max(yhi, std::log10(p.y));
        }
    if (xhi - xlo < 1e-12) { xlo -= 0.5; xhi += 0.5; }
    if (yhi - ylo < 1e-12) { ylo -= 0.5; yhi += 0.5; }
    double xpad = 0.05 * (xhi - xlo), ypad = 0.05 * (yhi - ylo);
    xlo -= xpad; xhi += xpad; ylo -= ypad; yhi += ypad;

    auto sx = [&](double lx) { return left + (lx - xlo) / (xhi - xlo) * (right - left); };
    auto sy = [&](double ly) { return bottom - (ly - ylo) / (yhi - ylo) * (bottom - top); };

    // Decade grid lines with labels.
    for (int d = static_cast<int>(std::ceil(ylo)); d <= static_cast<int>(std::floor(yhi));
         ++d) {
        double y = sy(d);
        out << "<line x1=\"" << left << "\" y1=\"" << fmt_f(y, 2) << "\" x2=\"" << right
            << "\" y2=\"" << fmt_f(y, 2) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << fmt_f(y + 4, 2)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << d
            << "</text>\n";
    }
    // One x tick per mesh level.
    for (const LevelResult& lr : report.levels) {
        if (!(lr.h > 0.0)) continue;
        double x = sx(std::log10(lr.h));
        out << "<line x1=\"" << fmt_f(x, 2) << "\" y1=\"" << bottom << "\" x2=\""
            << fmt_f(x, 2) << "\" y2=\"" << top << "\" stroke=\"#eeeeee\"/>\n";
        char lbl[32];
        std::snprintf(lbl, sizeof lbl, "%.3g", lr.h);
        out << "<text x=\"" << fmt_f(x, 2) << "\" y=\"" << bottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << lbl
            << "</text>\n";
    }
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left
        << "\" height=\"" << bottom - top << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 38
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">h</text>\n";
    out << "<text x=\"22\" y=\"" << (top + bottom) / 2
        << "\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 22 "
        << (top + bottom) / 2 << ")\" text-anchor=\"middle\">error</text>\n";

    double ly = top + 16;
    for (const PlotSeries& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (const Vec2& p : s.pts)
            out << fmt_f(sx(std::log10(p.x)), 2) << ',' << fmt_f(sy(std::log10(p.y)), 2) << ' ';
        out << "\"/>\n";
        for (const Vec2& p : s.pts)
            out << "<circle cx=\"" << fmt_f(sx(std::log10(p.x)), 2) << "\" cy=\""
                << fmt_f(sy(std::log10(p.y)), 2) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        out << "<line x1=\"" << right + 12 << "\" y1=\"" << fmt_f(ly - 4, 2) << "\" x2=\""
            << right + 34 << "\" y2=\"" << fmt_f(ly - 4, 2) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << right + 40 << "\" y=\"" << fmt_f(ly, 2)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series_title(s)
            << "</text>\n";
        ly += 20;
    }
    out << "</svg>\n";
}

void write_gnuplot_script(const StudyReport& report, const std::string& csv_name,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");

    std::string stem = csv_name;
    size_t dotpos = stem.rfind('.');
    if (dotpos != std::string::npos) stem.erase(dotpos);

    out << "# Convergence history; render with: gnuplot " << path << "\n";
    out << "set terminal svg size 760,520 font 'sans-serif,12'\n";
    out << "set output '" << stem << "_plot.svg'\n";
    out << "set datafile separator ','\n";
    out << "set logscale xy\n";
    out << "set grid\n";
    out << "set key bottom right\n";
    out << "set xlabel 'h'\n";
    out << "set ylabel 'error'\n";
    out << "set title '" << report.cfg.geometry << ", p=" << report.cfg.order << ", "
        << report.cfg.method << "'\n";

    std::vector<PlotSeries> series = error_series(report);
    if (series.empty()) {
        out << "# no error data to plot\n";
        return;
    }
    // CSV columns: 2 = h, 4 = l2, 5 = h1, 6 = energy.
    out << "plot ";
    bool first = true;
    for (const PlotSeries& s : series) {
        int col = 6;
        if (s.label == "L2") col = 4;
        else if (s.label == "H1 semi") col = 5;
        if (!first) out << ", \\\n     ";
        out << (first ? std::string("'") + csv_name + "'" : std::string("''"))
            << " skip 1 using 2:" << col << " with linespoints lw 2 title '"
            << series_title(s) << "'";
        first = false;
    }
    out << "\n";
}

std::vector<ConditionSweepRow> condition_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    make_form_config(cfg).validate(cfg.order);

    std::vector<ConditionSweepRow> rows;
    for (int n : cfg.levels) {
        BackgroundMesh bg =
            build_background({cfg.box_x0, cfg.box_y0}, {cfg.box_x1, cfg.box_y1}, n);
        for (int t = 0; t < 16; ++t) {
            double off = t * bg.h / 16.0;
            ExperimentConfig shifted = cfg;
            shifted.offset.x += off;
            shifted.quiet = true;

            LevelSet ls = make_level_set(shifted);
            FormConfig fc = make_form_config(shifted);
            ActiveMesh am = build_active_mesh(ls, bg);
            if (am.num_active() == 0)
                throw ConfigError("active mesh is empty: the level set misses the box");
            DofMap dm = build_dof_map(am, shifted.order);
            auto bqp = build_boundary_quadrature(am, ls, shifted.order + 2, fc.nu_source);
            AssembledSystem sys = assemble_system(am, dm, ls, fc, bqp);

            SolveOptions so;
            so.tol = cfg.solver_tol;
            so.max_iter = cfg.max_iter;
            ConditionEstimate ce = estimate_condition(sys.A, so);
            rows.push_back({n, bg.h, t, off, dm.ndof, ce.kappa});
            if (!cfg.quiet)
                std::printf("n=%4d  t=%2d  offset=%.4e  ndof=%6d  cond=%.4e\n", n, t, off,
                            dm.ndof, ce.kappa);
        }
    }
    return rows;
}

void write_condition_csv(const std::vector<ConditionSweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "level,h,t,offset,ndof,cond_est\n";
    for (const ConditionSweepRow& r : rows)
        out << r.n << ',' << fmt_g(r.h) << ',' << r.t << ',' << fmt_g(r.offset) << ','
            << r.ndof << ',' << fmt_g(r.kappa) << '\n';
}

}  // namespace cutfem
