#pragma once

#include "fsidlm/mesh.hpp"
#include "fsidlm/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace fsidlm {

enum class SpaceKind {
    VectorQ2, ///< continuous biquadratic, 2 components (fluid velocity)
    DiscP1,   ///< discontinuous element-wise linear (fluid pressure)
    VectorQ1, ///< continuous bilinear, 2 components (solid map / multiplier)
};

/// Values and reference gradients of the scalar basis at one reference point.
struct BasisEval {
    std::vector<double> values;
    std::vector<Vec2> ref_grads;
};

/// A finite element space over a QuadMesh.
///
/// Scalar nodes are numbered lexicographically over the tensor grid; vector
/// dofs interleave components as 2*node + component. DiscP1 has 3 dofs per
/// element, local basis {1, xi-1/2, eta-1/2} about the element center (the
/// physical basis {1, (x-x_c)/h_x, (y-y_c)/h_y} on rectangle cells).
class FeSpace {
public:
    FeSpace(SpaceKind kind, const QuadMesh& mesh);

    [[nodiscard]] SpaceKind kind() const { return kind_; }
    [[nodiscard]] const QuadMesh& mesh() const { return *mesh_; }
    [[nodiscard]] int n_dofs() const { return n_dofs_; }
    [[nodiscard]] int n_scalar_nodes() const { return n_scalar_nodes_; }
    [[nodiscard]] int n_local() const { return n_local_; }
    [[nodiscard]] bool is_vector() const { return kind_ != SpaceKind::DiscP1; }

    /// Global scalar node/dof indices of element e (n_local entries).
    [[nodiscard]] const int* elem_nodes(int e) const {
        return elem_node_map_.data() + static_cast<std::size_t>(e) * n_local_;
    }

    /// Scalar basis values and reference gradients at a reference point.
    [[nodiscard]] BasisEval eval_basis(int elem, const Vec2& ref_pt) const;
    void eval_basis(int elem, const Vec2& ref_pt, BasisEval& out) const;

    /// Elements that carry each scalar node, ascending element index.
    [[nodiscard]] const std::vector<std::vector<int>>& node_to_elems() const {
        return node_to_elems_;
    }

    /// Named boundary dof sets ("left", "top", ..., "left_normal", ..., "all").
    /// Only vector spaces on box-shaped meshes carry boundary sets.
    [[nodiscard]] const std::vector<int>& boundary_dofs(const std::string& name) const;

private:
    void build_q2();
    void build_q1();
    void build_p1();
    void build_boundary_sets();

    SpaceKind kind_;
    const QuadMesh* mesh_;
    int n_dofs_ = 0;
    int n_scalar_nodes_ = 0;
    int n_local_ = 0;
    std::vector<int> elem_node_map_;
    std::vector<std::vector<int>> node_to_elems_;
    std::map<std::string, std::vector<int>> boundary_sets_;
};

/// Scalar reference-basis evaluators on [0,1]^2.
void eval_q1_basis(const Vec2& r, double* values, Vec2* grads);
void eval_q2_basis(const Vec2& r, double* values, Vec2* grads);

} // namespace fsidlm
