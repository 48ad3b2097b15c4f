#pragma once

#include "fsidlm/types.hpp"

#include <vector>

namespace fsidlm {

enum class RuleKind {
    GaussQuad3x3,    ///< 3x3 tensor Gauss-Legendre on [0,1]^2 (volume terms)
    VertexQuad,      ///< 4 corners of [0,1]^2, weights 1/4 (coarse coupling)
    Triangle4pt,     ///< degree-3 triangle rule, weights (25/48)x3 and -9/16
    TriangleDegree6, ///< 12-point degree-6 symmetric triangle rule
};

/// Quadrature points and weights. Quad rules store (xi,eta) on [0,1]^2 and
/// weigh to unit measure; triangle rules store the first two barycentric
/// coordinates and are normalized so the weights sum to 1 (apply as
/// area(T) * sum_k w_k f(q_k)).
struct QuadratureRule {
    std::vector<Vec2> points;
    std::vector<double> weights;
    [[nodiscard]] std::size_t size() const { return weights.size(); }
};

[[nodiscard]] const QuadratureRule& volume_quadrature(RuleKind kind);

} // namespace fsidlm
