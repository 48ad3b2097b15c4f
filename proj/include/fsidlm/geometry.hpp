#pragma once

#include "fsidlm/types.hpp"

#include <array>
#include <vector>

namespace fsidlm {

/// Simple polygon with counterclockwise vertex order and positive area.
struct Polygon {
    std::vector<Vec2> vertices;

    [[nodiscard]] bool empty() const { return vertices.size() < 3; }
    [[nodiscard]] std::size_t size() const { return vertices.size(); }

    /// Signed shoelace area (positive for counterclockwise order).
    [[nodiscard]] double signed_area() const;
    [[nodiscard]] Vec2 barycenter() const;
};

struct Triangle {
    std::array<Vec2, 3> p;
    [[nodiscard]] double signed_area() const {
        return 0.5 * cross(p[1] - p[0], p[2] - p[0]);
    }
};

[[nodiscard]] double shoelace_area(const std::array<Vec2, 4>& quad);

/// Sutherland-Hodgman clip of a polygon against an axis-aligned rectangle.
///
/// Output is counterclockwise; vertices closer than 1e-14 are merged and
/// results with area below 1e-14 * cell.area() are returned empty.
[[nodiscard]] Polygon clip_polygon_to_cell(const Polygon& poly, const Rect& cell);

/// Fan triangulation from the barycenter. A triangle is passed through
/// unchanged; an N-gon yields N triangles whose areas sum to the polygon area.
[[nodiscard]] std::vector<Triangle> triangulate_from_barycenter(const Polygon& poly);

/// Bilinear map of the unit square onto a quad given by its corners in
/// counterclockwise order: (0,0)->q[0], (1,0)->q[1], (1,1)->q[2], (0,1)->q[3].
[[nodiscard]] Vec2 forward_bilinear(const std::array<Vec2, 4>& quad, const Vec2& ref);

/// Inverse of forward_bilinear. Solved from the quadratic resolvent with a
/// Newton fallback; throws NoConvergence if the residual stays above 1e-10
/// after 50 Newton steps.
[[nodiscard]] Vec2 inverse_bilinear(const std::array<Vec2, 4>& quad, const Vec2& x);

/// Index of a strictly reflex corner (interior angle > pi), or -1 if the quad
/// is convex. More than one reflex corner means the quad is invalid (folded).
[[nodiscard]] int reflex_corner(const std::array<Vec2, 4>& quad);

} // namespace fsidlm
