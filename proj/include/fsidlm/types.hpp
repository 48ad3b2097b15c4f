#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace fsidlm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr bool operator==(const Vec2&) const = default;

    [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y); }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

/// 2D cross product (z-component of the 3D cross).
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// Axis-aligned rectangle, used for fluid cells and bounding boxes.
struct Rect {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    [[nodiscard]] constexpr double width() const { return x1 - x0; }
    [[nodiscard]] constexpr double height() const { return y1 - y0; }
    [[nodiscard]] constexpr double area() const { return width() * height(); }
};

// Error taxonomy. Each maps to one failure mode named in the module contracts.
struct PointOutsideDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ClippingDegenerate : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MeshMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownRule : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownBoundarySet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularBlock : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MaxIterations : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Breakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FactorizationStale : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NewtonDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NegativeElementArea : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fsidlm
