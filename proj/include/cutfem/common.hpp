#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace cutfem {

// Minimal 2d point/vector type. Heavier linear algebra goes through Eigen;
// geometry and quadrature code only ever needs these few operations.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
// z-component of the 3d cross product; twice the signed area of (0,a,b).
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

inline double triangle_area(Vec2 a, Vec2 b, Vec2 c) {
    return 0.5 * cross(b - a, c - a);
}

// Error taxonomy. Numerical failures that a caller may want to recover from
// (solver stagnation) are reported through status fields instead; everything
// here indicates invalid input or a geometry/mesh bug and aborts the run.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Level-set gradient too small to define a normal direction.
struct DegenerateGradient : Error {
    explicit DegenerateGradient(const std::string& msg) : Error(msg) {}
};

// Line search for the boundary found no zero of the level set.
struct NoRoot : Error {
    explicit NoRoot(const std::string& msg) : Error(msg) {}
};

// Cut-cell decomposition hit an ambiguous configuration the vertex-sign
// nudge rule should have prevented.
struct DegenerateCut : Error {
    explicit DegenerateCut(const std::string& msg) : Error(msg) {}
};

// Element with (near-)zero Jacobian determinant.
struct DegenerateElement : Error {
    explicit DegenerateElement(const std::string& msg) : Error(msg) {}
};

// Bad configuration file or inconsistent parameter combination.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace cutfem
