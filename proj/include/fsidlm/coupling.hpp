#pragma once

#include "fsidlm/csr.hpp"
#include "fsidlm/fe_space.hpp"
#include "fsidlm/quadrature.hpp"

#include <span>

namespace fsidlm {

enum class CouplingStrategy {
    VertexRule,   ///< corner quadrature per solid element, no mesh intersection
    Intersection, ///< clip the mapped solid mesh against the fluid grid
};

struct CouplingStats {
    long polygons = 0;
    long triangles = 0;
    long quadrature_points = 0;
    double wall_seconds = 0.0;
};

/// The fluid-solid coupling matrix L_f(X): rows are multiplier scalar dofs
/// on the solid mesh, columns are fluid velocity scalar dofs.
struct CouplingAssembly {
    CouplingStrategy strategy = CouplingStrategy::VertexRule;
    CsrMatrix L_f;
    CouplingStats stats;
};

struct CouplingOptions {
    CouplingStrategy strategy = CouplingStrategy::VertexRule;
    /// Triangle rule for the intersection strategy. TriangleDegree6 makes the
    /// composite quadrature exact for Q1 x (Q2 composed with an affine map)
    /// pieces; Triangle4pt is the coarser degree-3 alternative.
    RuleKind triangle_rule = RuleKind::TriangleDegree6;
    int n_threads = 1;
};

/// Assemble L_f(X) for the deformation given by nodal values X (2 per solid
/// node, interleaved). Mapped points outside the fluid box raise
/// PointOutsideDomain; the intersection strategy raises ClippingDegenerate
/// when an element's pulled-back pieces fail to tile it (1e-8 relative).
[[nodiscard]] CouplingAssembly assemble_coupling(const FeSpace& V, const FeSpace& S,
                                                 std::span<const double> X,
                                                 const CouplingOptions& options);

} // namespace fsidlm
