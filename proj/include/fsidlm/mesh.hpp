#pragma once

#include "fsidlm/geometry.hpp"
#include "fsidlm/types.hpp"

#include <array>
#include <vector>

namespace fsidlm {

enum class DomainKind { FluidBox, SolidRect, SolidQuarterAnnulus };

/// Structured quadrilateral mesh of either the fluid box or the solid
/// reference domain. Elements are stored row-major (x/theta fastest) with
/// counterclockwise vertex order and positive area.
///
/// FluidBox meshes are uniform axis-aligned rectangles, which is what makes
/// locate_point O(1). The quarter annulus puts nx divisions along theta in
/// [0, pi/2] and ny along r in [r_in, r_out]; edges are kept straight.
class QuadMesh {
public:
    static QuadMesh fluid_box(int nx, int ny, const Rect& box);
    static QuadMesh solid_rect(int nx, int ny, const Rect& box);
    static QuadMesh quarter_annulus(int nx, int ny, double r_in, double r_out);

    [[nodiscard]] DomainKind kind() const { return kind_; }
    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }
    [[nodiscard]] int n_elems() const { return nx_ * ny_; }
    [[nodiscard]] int n_vertices() const { return (nx_ + 1) * (ny_ + 1); }
    [[nodiscard]] const Rect& box() const { return box_; }

    [[nodiscard]] const std::vector<Vec2>& vertices() const { return vertices_; }
    [[nodiscard]] const std::array<int, 4>& elem_vertices(int e) const {
        return elem_to_vertex_[static_cast<std::size_t>(e)];
    }
    [[nodiscard]] std::array<Vec2, 4> elem_corners(int e) const;
    [[nodiscard]] double elem_area(int e) const { return shoelace_area(elem_corners(e)); }
    [[nodiscard]] double total_area() const;

    /// Axis-aligned extent of a FluidBox cell.
    [[nodiscard]] Rect cell_rect(int e) const;

    /// O(1) location of a point in a FluidBox mesh by floor division.
    /// Points on interior cell edges go to the larger-index cell; points up
    /// to 1e-12 outside the box are clamped, farther ones throw
    /// PointOutsideDomain.
    [[nodiscard]] int locate_point(const Vec2& x) const;

    /// Elements adjacent to each vertex, ascending element index.
    [[nodiscard]] const std::vector<std::vector<int>>& vertex_to_elems() const;

private:
    QuadMesh() = default;
    void build_connectivity(bool flip_orientation);
    void validate() const;

    DomainKind kind_ = DomainKind::FluidBox;
    int nx_ = 0, ny_ = 0;
    Rect box_{};
    double r_in_ = 0.0, r_out_ = 0.0;
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 4>> elem_to_vertex_;
    std::vector<std::vector<int>> vertex_to_elems_;
};

} // namespace fsidlm
