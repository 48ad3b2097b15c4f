#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsidlm/fe_space.hpp"
#include "fsidlm/quadrature.hpp"

#include <random>
#include <set>

using namespace fsidlm;

namespace {

// Exact integral of a monomial l1^a l2^b over the reference triangle with
// unit area normalization: 2 * a! b! / (a + b + 2)!.
double tri_monomial_exact(int a, int b) {
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    return 2.0 * fact(a) * fact(b) / fact(a + b + 2);
}

double apply_tri_rule(const QuadratureRule& rule, int a, int b) {
    // Rule weights are area-normalized; reference triangle has area 1/2.
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double l1 = rule.points[q].x;
        const double l2 = rule.points[q].y;
        s += rule.weights[q] * std::pow(l1, a) * std::pow(l2, b);
    }
    return 0.5 * s;
}

} // namespace

TEST_CASE("quadrature constants") {
    const auto& tri = volume_quadrature(RuleKind::Triangle4pt);
    REQUIRE(tri.size() == 4);
    CHECK(tri.weights[0] == 25.0 / 48.0);
    CHECK(tri.weights[1] == 25.0 / 48.0);
    CHECK(tri.weights[2] == 25.0 / 48.0);
    CHECK(tri.weights[3] == -9.0 / 16.0);
    CHECK(tri.weights[0] + tri.weights[1] + tri.weights[2] + tri.weights[3] ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tri.points[0].x == doctest::Approx(3.0 / 5.0));

    const auto& vert = volume_quadrature(RuleKind::VertexQuad);
    REQUIRE(vert.size() == 4);
    double total = 0.0;
    for (const double w : vert.weights) total += w;
    CHECK(total == 1.0); // times cell area A gives 4 x A/4

    const auto& gauss = volume_quadrature(RuleKind::GaussQuad3x3);
    double ix2y2 = 0.0, sum = 0.0;
    for (std::size_t q = 0; q < gauss.size(); ++q) {
        ix2y2 += gauss.weights[q] * gauss.points[q].x * gauss.points[q].x * gauss.points[q].y *
                 gauss.points[q].y;
        sum += gauss.weights[q];
    }
    CHECK(ix2y2 == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("triangle rules integrate their exactness class") {
    const auto& tri4 = volume_quadrature(RuleKind::Triangle4pt);
    for (int a = 0; a + 0 <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b)
            CHECK(apply_tri_rule(tri4, a, b) ==
                  doctest::Approx(tri_monomial_exact(a, b)).epsilon(1e-14));

    const auto& tri12 = volume_quadrature(RuleKind::TriangleDegree6);
    REQUIRE(tri12.size() == 12);
    for (int a = 0; a <= 6; ++a)
        for (int b = 0; a + b <= 6; ++b)
            CHECK(apply_tri_rule(tri12, a, b) ==
                  doctest::Approx(tri_monomial_exact(a, b)).epsilon(1e-12));
}

TEST_CASE("vertex rule is exact for bilinear functions on rectangles") {
    // f(x,y) = (2x-1)(3y+1) on a rectangle [0,2]x[0,0.5]; corner rule with
    // weight area/4 must integrate it exactly.
    const auto& vert = volume_quadrature(RuleKind::VertexQuad);
    const double hx = 2.0, hy = 0.5, area = hx * hy;
    auto f = [](double x, double y) { return (2.0 * x - 1.0) * (3.0 * y + 1.0); };
    double got = 0.0;
    for (std::size_t q = 0; q < vert.size(); ++q)
        got += area * vert.weights[q] * f(hx * vert.points[q].x, hy * vert.points[q].y);
    // Exact: int (2x-1) dx over [0,2] = 2; int (3y+1) dy over [0,0.5] = 0.875
    CHECK(got == doctest::Approx(2.0 * 0.875).epsilon(1e-14));
}

TEST_CASE("basis point values") {
    const QuadMesh fluid = QuadMesh::fluid_box(2, 2, {0.0, 1.0, 0.0, 1.0});
    const QuadMesh solid = QuadMesh::solid_rect(2, 2, {0.0, 1.0, 0.0, 1.0});
    const FeSpace V(SpaceKind::VectorQ2, fluid);
    const FeSpace Q(SpaceKind::DiscP1, fluid);
    const FeSpace S(SpaceKind::VectorQ1, solid);

    const auto q1 = S.eval_basis(0, {0.0, 0.0});
    CHECK(q1.values[0] == 1.0);
    CHECK(q1.values[1] == 0.0);
    CHECK(q1.values[2] == 0.0);
    CHECK(q1.values[3] == 0.0);

    const auto q2 = V.eval_basis(0, {0.5, 0.5});
    double sum = 0.0;
    for (const double v : q2.values) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q2.values[4] == doctest::Approx(1.0).epsilon(1e-14)); // center node

    const auto p1 = Q.eval_basis(0, {0.5, 0.5});
    CHECK(p1.values[0] == 1.0);
    CHECK(p1.values[1] == 0.0);
    CHECK(p1.values[2] == 0.0);
}

TEST_CASE("partition of unity at random points") {
    const QuadMesh fluid = QuadMesh::fluid_box(3, 3, {0.0, 1.0, 0.0, 1.0});
    const QuadMesh solid = QuadMesh::quarter_annulus(6, 3, 0.3, 0.5);
    const FeSpace V(SpaceKind::VectorQ2, fluid);
    const FeSpace S(SpaceKind::VectorQ1, solid);
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 r{unif(rng), unif(rng)};
        const auto e2 = V.eval_basis(0, r);
        const auto e1 = S.eval_basis(0, r);
        double s2 = 0.0, s1 = 0.0;
        Vec2 g2{0, 0}, g1{0, 0};
        for (std::size_t k = 0; k < e2.values.size(); ++k) {
            s2 += e2.values[k];
            g2 += e2.ref_grads[k];
        }
        for (std::size_t k = 0; k < e1.values.size(); ++k) {
            s1 += e1.values[k];
            g1 += e1.ref_grads[k];
        }
        CHECK(std::abs(s2 - 1.0) <= 1e-14);
        CHECK(std::abs(s1 - 1.0) <= 1e-14);
        CHECK(std::abs(g2.x) + std::abs(g2.y) <= 1e-13);
        CHECK(std::abs(g1.x) + std::abs(g1.y) <= 1e-14);
    }
}

TEST_CASE("dof maps are bijective onto [0, n_dofs)") {
    const QuadMesh fluid = QuadMesh::fluid_box(4, 3, {0.0, 2.0, 0.0, 1.0});
    const QuadMesh solid = QuadMesh::quarter_annulus(8, 4, 0.3, 0.5);
    for (const FeSpace& space :
         {FeSpace(SpaceKind::VectorQ2, fluid), FeSpace(SpaceKind::DiscP1, fluid),
          FeSpace(SpaceKind::VectorQ1, solid)}) {
        std::set<int> seen;
        for (int e = 0; e < space.mesh().n_elems(); ++e)
            for (int k = 0; k < space.n_local(); ++k) {
                const int node = space.elem_nodes(e)[k];
                REQUIRE(node >= 0);
                REQUIRE(node < space.n_scalar_nodes());
                seen.insert(node);
            }
        CHECK(static_cast<int>(seen.size()) == space.n_scalar_nodes());
        const int expected =
            space.kind() == SpaceKind::DiscP1 ? space.n_scalar_nodes() : 2 * space.n_scalar_nodes();
        CHECK(space.n_dofs() == expected);
    }
    CHECK(FeSpace(SpaceKind::VectorQ2, fluid).n_dofs() == 2 * 9 * 7);
    CHECK(FeSpace(SpaceKind::VectorQ1, solid).n_dofs() == 2 * 9 * 5);
}

TEST_CASE("boundary dof sets") {
    const QuadMesh fluid = QuadMesh::fluid_box(2, 2, {0.0, 1.0, 0.0, 1.0});
    const FeSpace V(SpaceKind::VectorQ2, fluid);
    const int g = 2 * 2 + 1;
    CHECK(V.boundary_dofs("top").size() == 2 * static_cast<std::size_t>(g));
    CHECK(V.boundary_dofs("left_normal").size() == static_cast<std::size_t>(g));
    for (const int dof : V.boundary_dofs("left_normal")) CHECK(dof % 2 == 0);
    for (const int dof : V.boundary_dofs("bottom_normal")) CHECK(dof % 2 == 1);
    CHECK(V.boundary_dofs("all").size() == 2 * static_cast<std::size_t>(4 * g - 4));
    CHECK_THROWS_AS((void)V.boundary_dofs("nope"), UnknownBoundarySet);
}
