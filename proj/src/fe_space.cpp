#include "fsidlm/fe_space.hpp"

#include <algorithm>

namespace fsidlm {

void eval_q1_basis(const Vec2& r, double* v, Vec2* g) {
    const double xi = r.x, eta = r.y;
    // Counterclockwise corner order (0,0),(1,0),(1,1),(0,1).
    v[0] = (1.0 - xi) * (1.0 - eta);
    v[1] = xi * (1.0 - eta);
    v[2] = xi * eta;
    v[3] = (1.0 - xi) * eta;
    if (g) {
        g[0] = {-(1.0 - eta), -(1.0 - xi)};
        g[1] = {1.0 - eta, -xi};
        g[2] = {eta, xi};
        g[3] = {-eta, 1.0 - xi};
    }
}

namespace {

inline void q2_line(double t, double* n, double* d) {
    n[0] = (2.0 * t - 1.0) * (t - 1.0);
    n[1] = 4.0 * t * (1.0 - t);
    n[2] = t * (2.0 * t - 1.0);
    if (d) {
        d[0] = 4.0 * t - 3.0;
        d[1] = 4.0 - 8.0 * t;
        d[2] = 4.0 * t - 1.0;
    }
}

} // namespace

void eval_q2_basis(const Vec2& r, double* v, Vec2* g) {
    double nx[3], ny[3], dx[3], dy[3];
    q2_line(r.x, nx, g ? dx : nullptr);
    q2_line(r.y, ny, g ? dy : nullptr);
    // Lexicographic 3x3 local ordering, nodes at (i/2, j/2).
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            const int k = 3 * j + i;
            v[k] = nx[i] * ny[j];
            if (g) g[k] = {dx[i] * ny[j], nx[i] * dy[j]};
        }
}

FeSpace::FeSpace(SpaceKind kind, const QuadMesh& mesh) : kind_(kind), mesh_(&mesh) {
    switch (kind_) {
    case SpaceKind::VectorQ2:
        if (mesh.kind() != DomainKind::FluidBox)
            throw MeshMismatch("VectorQ2 space requires a FluidBox mesh");
        build_q2();
        break;
    case SpaceKind::DiscP1: build_p1(); break;
    case SpaceKind::VectorQ1: build_q1(); break;
    }
    build_boundary_sets();
}

void FeSpace::build_q2() {
    const int nx = mesh_->nx(), ny = mesh_->ny();
    const int gx = 2 * nx + 1;
    n_scalar_nodes_ = gx * (2 * ny + 1);
    n_dofs_ = 2 * n_scalar_nodes_;
    n_local_ = 9;
    elem_node_map_.resize(static_cast<std::size_t>(mesh_->n_elems()) * 9);
    for (int e = 0; e < mesh_->n_elems(); ++e) {
        const int ex = e % nx, ey = e / nx;
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i)
                elem_node_map_[static_cast<std::size_t>(e) * 9 + 3 * j + i] =
                    (2 * ey + j) * gx + (2 * ex + i);
    }
    node_to_elems_.assign(static_cast<std::size_t>(n_scalar_nodes_), {});
    for (int e = 0; e < mesh_->n_elems(); ++e)
        for (int k = 0; k < 9; ++k)
            node_to_elems_[static_cast<std::size_t>(elem_nodes(e)[k])].push_back(e);
}

void FeSpace::build_q1() {
    n_scalar_nodes_ = mesh_->n_vertices();
    n_dofs_ = 2 * n_scalar_nodes_;
    n_local_ = 4;
    elem_node_map_.resize(static_cast<std::size_t>(mesh_->n_elems()) * 4);
    for (int e = 0; e < mesh_->n_elems(); ++e) {
        const auto& verts = mesh_->elem_vertices(e);
        for (int k = 0; k < 4; ++k)
            elem_node_map_[static_cast<std::size_t>(e) * 4 + k] = verts[static_cast<std::size_t>(k)];
    }
    node_to_elems_ = mesh_->vertex_to_elems();
}

void FeSpace::build_p1() {
    n_scalar_nodes_ = 3 * mesh_->n_elems();
    n_dofs_ = n_scalar_nodes_;
    n_local_ = 3;
    elem_node_map_.resize(static_cast<std::size_t>(mesh_->n_elems()) * 3);
    node_to_elems_.assign(static_cast<std::size_t>(n_scalar_nodes_), {});
    for (int e = 0; e < mesh_->n_elems(); ++e)
        for (int k = 0; k < 3; ++k) {
            elem_node_map_[static_cast<std::size_t>(e) * 3 + k] = 3 * e + k;
            node_to_elems_[static_cast<std::size_t>(3 * e + k)] = {e};
        }
}

BasisEval FeSpace::eval_basis(int elem, const Vec2& ref_pt) const {
    BasisEval out;
    eval_basis(elem, ref_pt, out);
    return out;
}

void FeSpace::eval_basis(int /*elem*/, const Vec2& r, BasisEval& out) const {
    out.values.resize(static_cast<std::size_t>(n_local_));
    out.ref_grads.resize(static_cast<std::size_t>(n_local_));
    switch (kind_) {
    case SpaceKind::VectorQ2: eval_q2_basis(r, out.values.data(), out.ref_grads.data()); break;
    case SpaceKind::VectorQ1: eval_q1_basis(r, out.values.data(), out.ref_grads.data()); break;
    case SpaceKind::DiscP1:
        out.values[0] = 1.0;
        out.values[1] = r.x - 0.5;
        out.values[2] = r.y - 0.5;
        out.ref_grads[0] = {0.0, 0.0};
        out.ref_grads[1] = {1.0, 0.0};
        out.ref_grads[2] = {0.0, 1.0};
        break;
    }
}

void FeSpace::build_boundary_sets() {
    if (!is_vector()) return;
    if (mesh_->kind() == DomainKind::SolidQuarterAnnulus) return;

    const int nx = mesh_->nx(), ny = mesh_->ny();
    const int gx = kind_ == SpaceKind::VectorQ2 ? 2 * nx + 1 : nx + 1;
    const int gy = kind_ == SpaceKind::VectorQ2 ? 2 * ny + 1 : ny + 1;

    auto edge_nodes = [&](const std::string& which) {
        std::vector<int> nodes;
        for (int j = 0; j < gy; ++j)
            for (int i = 0; i < gx; ++i) {
                const bool hit = (which == "left" && i == 0) || (which == "right" && i == gx - 1) ||
                                 (which == "bottom" && j == 0) || (which == "top" && j == gy - 1);
                if (hit) nodes.push_back(j * gx + i);
            }
        return nodes;
    };

    for (const std::string edge : {"left", "right", "bottom", "top"}) {
        std::vector<int> full, normal;
        const int comp = (edge == "left" || edge == "right") ? 0 : 1;
        for (const int n : edge_nodes(edge)) {
            full.push_back(2 * n);
            full.push_back(2 * n + 1);
            normal.push_back(2 * n + comp);
        }
        std::sort(full.begin(), full.end());
        std::sort(normal.begin(), normal.end());
        boundary_sets_[edge] = std::move(full);
        boundary_sets_[edge + "_normal"] = std::move(normal);
    }

    std::vector<int> all;
    for (const std::string edge : {"left", "right", "bottom", "top"})
        all.insert(all.end(), boundary_sets_[edge].begin(), boundary_sets_[edge].end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    boundary_sets_["all"] = std::move(all);
}

const std::vector<int>& FeSpace::boundary_dofs(const std::string& name) const {
    const auto it = boundary_sets_.find(name);
    if (it == boundary_sets_.end())
        throw UnknownBoundarySet("unknown boundary set \"" + name + "\"");
    return it->second;
}

} // namespace fsidlm
