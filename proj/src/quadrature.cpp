#include "fsidlm/quadrature.hpp"

#include <cmath>

namespace fsidlm {

namespace {

QuadratureRule make_gauss_3x3() {
    const double g = 0.5 * std::sqrt(3.0 / 5.0);
    const double pts[3] = {0.5 - g, 0.5, 0.5 + g};
    const double wts[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    QuadratureRule r;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            r.points.push_back({pts[i], pts[j]});
            r.weights.push_back(wts[i] * wts[j]);
        }
    return r;
}

QuadratureRule make_vertex() {
    QuadratureRule r;
    r.points = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    r.weights = {0.25, 0.25, 0.25, 0.25};
    return r;
}

QuadratureRule make_triangle_4pt() {
    QuadratureRule r;
    r.points = {{3.0 / 5.0, 1.0 / 5.0},
                {1.0 / 5.0, 3.0 / 5.0},
                {1.0 / 5.0, 1.0 / 5.0},
                {1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {25.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, -9.0 / 16.0};
    return r;
}

// 12-point degree-6 symmetric rule (Dunavant), weights normalized to 1.
QuadratureRule make_triangle_degree6() {
    const double a1 = 0.063089014491502;
    const double w1 = 0.050844906370207;
    const double a2 = 0.249286745170910;
    const double w2 = 0.116786275726379;
    const double b1 = 0.053145049844816;
    const double b2 = 0.310352451033785;
    const double w3 = 0.082851075618374;
    QuadratureRule r;
    auto orbit3 = [&](double a, double w) {
        r.points.push_back({1.0 - 2.0 * a, a});
        r.points.push_back({a, 1.0 - 2.0 * a});
        r.points.push_back({a, a});
        r.weights.insert(r.weights.end(), 3, w);
    };
    orbit3(a1, w1);
    orbit3(a2, w2);
    const double b3 = 1.0 - b1 - b2;
    const Vec2 perms[6] = {{b1, b2}, {b2, b1}, {b1, b3}, {b3, b1}, {b2, b3}, {b3, b2}};
    for (const Vec2& p : perms) {
        r.points.push_back(p);
        r.weights.push_back(w3);
    }
    return r;
}

} // namespace

const QuadratureRule& volume_quadrature(RuleKind kind) {
    static const QuadratureRule gauss3 = make_gauss_3x3();
    static const QuadratureRule vertex = make_vertex();
    static const QuadratureRule tri4 = make_triangle_4pt();
    static const QuadratureRule tri12 = make_triangle_degree6();
    switch (kind) {
    case RuleKind::GaussQuad3x3: return gauss3;
    case RuleKind::VertexQuad: return vertex;
    case RuleKind::Triangle4pt: return tri4;
    case RuleKind::TriangleDegree6: return tri12;
    }
    throw UnknownRule("unknown quadrature rule");
}

} // namespace fsidlm
