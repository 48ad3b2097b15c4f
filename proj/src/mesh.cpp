#include "fsidlm/mesh.hpp"

#include <cmath>
#include <numbers>

namespace fsidlm {

namespace {
constexpr double boundary_clamp_tol = 1e-12;
}

QuadMesh QuadMesh::fluid_box(int nx, int ny, const Rect& box) {
    QuadMesh m;
    m.kind_ = DomainKind::FluidBox;
    m.nx_ = nx;
    m.ny_ = ny;
    m.box_ = box;
    m.vertices_.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    const double hx = box.width() / nx;
    const double hy = box.height() / ny;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices_.push_back({box.x0 + i * hx, box.y0 + j * hy});
    m.build_connectivity(false);
    m.validate();
    return m;
}

QuadMesh QuadMesh::solid_rect(int nx, int ny, const Rect& box) {
    QuadMesh m = fluid_box(nx, ny, box);
    m.kind_ = DomainKind::SolidRect;
    return m;
}

QuadMesh QuadMesh::quarter_annulus(int nx, int ny, double r_in, double r_out) {
    QuadMesh m;
    m.kind_ = DomainKind::SolidQuarterAnnulus;
    m.nx_ = nx;
    m.ny_ = ny;
    m.r_in_ = r_in;
    m.r_out_ = r_out;
    m.box_ = Rect{0.0, std::numbers::pi / 2.0, r_in, r_out}; // parameter box (theta, r)
    m.vertices_.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        const double r = r_in + (r_out - r_in) * j / ny;
        for (int i = 0; i <= nx; ++i) {
            const double theta = (std::numbers::pi / 2.0) * i / nx;
            m.vertices_.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }
    // The (theta, r) parameterization is orientation-reversing in the plane.
    m.build_connectivity(true);
    m.validate();
    return m;
}

void QuadMesh::build_connectivity(bool flip_orientation) {
    elem_to_vertex_.reserve(static_cast<std::size_t>(nx_ * ny_));
    const int stride = nx_ + 1;
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const int v00 = j * stride + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + stride;
            const int v11 = v01 + 1;
            if (flip_orientation)
                elem_to_vertex_.push_back({v00, v01, v11, v10});
            else
                elem_to_vertex_.push_back({v00, v10, v11, v01});
        }
    }
    vertex_to_elems_.assign(static_cast<std::size_t>(n_vertices()), {});
    for (int e = 0; e < n_elems(); ++e)
        for (const int v : elem_to_vertex_[static_cast<std::size_t>(e)])
            vertex_to_elems_[static_cast<std::size_t>(v)].push_back(e);
}

void QuadMesh::validate() const {
    for (int e = 0; e < n_elems(); ++e) {
        if (elem_area(e) <= 0.0)
            throw NegativeElementArea("mesh element " + std::to_string(e) +
                                      " has non-positive area");
    }
}

std::array<Vec2, 4> QuadMesh::elem_corners(int e) const {
    const auto& idx = elem_to_vertex_[static_cast<std::size_t>(e)];
    return {vertices_[static_cast<std::size_t>(idx[0])],
            vertices_[static_cast<std::size_t>(idx[1])],
            vertices_[static_cast<std::size_t>(idx[2])],
            vertices_[static_cast<std::size_t>(idx[3])]};
}

double QuadMesh::total_area() const {
    double a = 0.0;
    for (int e = 0; e < n_elems(); ++e) a += elem_area(e);
    return a;
}

Rect QuadMesh::cell_rect(int e) const {
    const double hx = box_.width() / nx_;
    const double hy = box_.height() / ny_;
    const int i = e % nx_;
    const int j = e / nx_;
    return Rect{box_.x0 + i * hx, box_.x0 + (i + 1) * hx, box_.y0 + j * hy, box_.y0 + (j + 1) * hy};
}

int QuadMesh::locate_point(const Vec2& x) const {
    if (kind_ != DomainKind::FluidBox)
        throw MeshMismatch("locate_point requires a FluidBox mesh");
    double px = x.x;
    double py = x.y;
    if (px < box_.x0 || px > box_.x1 || py < box_.y0 || py > box_.y1) {
        if (px < box_.x0 - boundary_clamp_tol || px > box_.x1 + boundary_clamp_tol ||
            py < box_.y0 - boundary_clamp_tol || py > box_.y1 + boundary_clamp_tol)
            throw PointOutsideDomain("point (" + std::to_string(px) + ", " + std::to_string(py) +
                                     ") outside fluid box");
        px = std::min(std::max(px, box_.x0), box_.x1);
        py = std::min(std::max(py, box_.y0), box_.y1);
    }
    const double hx = box_.width() / nx_;
    const double hy = box_.height() / ny_;
    int i = static_cast<int>(std::floor((px - box_.x0) / hx));
    int j = static_cast<int>(std::floor((py - box_.y0) / hy));
    i = std::min(std::max(i, 0), nx_ - 1);
    j = std::min(std::max(j, 0), ny_ - 1);
    return j * nx_ + i;
}

const std::vector<std::vector<int>>& QuadMesh::vertex_to_elems() const { return vertex_to_elems_; }

} // namespace fsidlm
