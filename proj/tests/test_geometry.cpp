#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsidlm/geometry.hpp"
#include "fsidlm/mesh.hpp"

#include <numbers>
#include <random>

using namespace fsidlm;

namespace {

// Independent oracle: clip a convex polygon against one half-plane
// {x : dot(n, x) <= d}, written without the production clipper's structure.
std::vector<Vec2> oracle_halfplane(const std::vector<Vec2>& poly, Vec2 n, double d) {
    std::vector<Vec2> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % m];
        const double fa = dot(n, a) - d;
        const double fb = dot(n, b) - d;
        if (fa <= 0.0) out.push_back(a);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
            const double t = fa / (fa - fb);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

double oracle_clip_area(const std::vector<Vec2>& poly, const Rect& cell) {
    auto p = poly;
    p = oracle_halfplane(p, {-1.0, 0.0}, -cell.x0);
    p = oracle_halfplane(p, {1.0, 0.0}, cell.x1);
    p = oracle_halfplane(p, {0.0, -1.0}, -cell.y0);
    p = oracle_halfplane(p, {0.0, 1.0}, cell.y1);
    if (p.size() < 3) return 0.0;
    Polygon q{p};
    return q.signed_area();
}

std::array<Vec2, 4> random_convex_quad(std::mt19937& rng) {
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    for (;;) {
        std::array<Vec2, 4> q{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{1.0, 1.0}, Vec2{0.0, 1.0}};
        for (auto& v : q) {
            v.x += jitter(rng);
            v.y += jitter(rng);
        }
        if (reflex_corner(q) < 0) return q;
    }
}

} // namespace

TEST_CASE("locate_point on the uniform fluid grid") {
    const QuadMesh box = QuadMesh::fluid_box(2, 2, {-1.0, 1.0, -1.0, 1.0});
    CHECK(box.locate_point({-0.5, -0.5}) == 0);             // element (0,0)
    CHECK(box.locate_point({0.0, 0.0}) == 3);               // tie-break to element (1,1)
    const QuadMesh unit = QuadMesh::fluid_box(4, 4, {0.0, 1.0, 0.0, 1.0});
    const int e = unit.locate_point({1.0 + 1e-13, 0.1});    // clamped to column 3
    CHECK(e % 4 == 3);
    CHECK_THROWS_AS((void)unit.locate_point({1.1, 0.5}), PointOutsideDomain);
    CHECK_THROWS_AS((void)unit.locate_point({0.5, -1e-9}), PointOutsideDomain);
}

TEST_CASE("locate_point interior-edge tie break is deterministic") {
    const QuadMesh box = QuadMesh::fluid_box(4, 4, {0.0, 1.0, 0.0, 1.0});
    // x = 0.25 sits on the edge between columns 0 and 1: larger index wins.
    CHECK(box.locate_point({0.25, 0.1}) % 4 == 1);
    CHECK(box.locate_point({0.1, 0.5}) / 4 == 2);
}

TEST_CASE("inverse_bilinear examples") {
    const std::array<Vec2, 4> unit{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
    const Vec2 r1 = inverse_bilinear(unit, {0.25, 0.75});
    CHECK(r1.x == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r1.y == doctest::Approx(0.75).epsilon(1e-12));

    const std::array<Vec2, 4> scaled{Vec2{0, 0}, Vec2{2, 0}, Vec2{2, 2}, Vec2{0, 2}};
    const Vec2 r2 = inverse_bilinear(scaled, {1.0, 1.0});
    CHECK(r2.x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r2.y == doctest::Approx(0.5).epsilon(1e-12));

    // Round-trip oracle on a genuinely bilinear quad.
    const std::array<Vec2, 4> quad{Vec2{0, 0}, Vec2{1, 0}, Vec2{1.5, 1.2}, Vec2{-0.2, 1}};
    const Vec2 fwd = forward_bilinear(quad, {0.3, 0.6});
    const Vec2 back = inverse_bilinear(quad, fwd);
    CHECK(back.x == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(back.y == doctest::Approx(0.6).epsilon(1e-10));
}

TEST_CASE("inverse_bilinear round-trips 1000 points per random convex quad") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < 5; ++k) {
        const auto quad = random_convex_quad(rng);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Vec2 ref{unif(rng), unif(rng)};
            const Vec2 x = forward_bilinear(quad, ref);
            const Vec2 back = inverse_bilinear(quad, x);
            worst = std::max({worst, std::abs(back.x - ref.x), std::abs(back.y - ref.y)});
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("inverse_bilinear reports no convergence for impossible targets") {
    // All corners collinear: points off the line have no preimage.
    const std::array<Vec2, 4> degenerate{Vec2{0, 0}, Vec2{1, 1}, Vec2{2, 2}, Vec2{3, 3}};
    CHECK_THROWS_AS((void)inverse_bilinear(degenerate, {0.0, 1.0}), NoConvergence);
}

TEST_CASE("clip_polygon_to_cell basics") {
    const Polygon square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    const Polygon self = clip_polygon_to_cell(square, {0, 1, 0, 1});
    CHECK(self.signed_area() == doctest::Approx(1.0).epsilon(1e-14));

    const Polygon big{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}};
    const Polygon unit = clip_polygon_to_cell(big, {0, 1, 0, 1});
    CHECK(unit.signed_area() == doctest::Approx(1.0).epsilon(1e-14));

    const Polygon off{{{2, 2}, {3, 2}, {3, 3}, {2, 3}}};
    CHECK(clip_polygon_to_cell(off, {0, 1, 0, 1}).empty());
}

TEST_CASE("clip_polygon_to_cell matches the half-plane oracle") {
    const Polygon tri{{{-0.5, 0.5}, {1.5, 0.5}, {0.5, 1.5}}};
    const Rect cell{0, 1, 0, 1};
    const Polygon clipped = clip_polygon_to_cell(tri, cell);
    const double oracle = oracle_clip_area(tri.vertices, cell);
    CHECK(clipped.signed_area() == doctest::Approx(oracle).epsilon(1e-13));

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> unif(-0.5, 1.5);
    for (int k = 0; k < 200; ++k) {
        Polygon t{{{unif(rng), unif(rng)}, {unif(rng), unif(rng)}, {unif(rng), unif(rng)}}};
        if (t.signed_area() < 0.0) std::swap(t.vertices[1], t.vertices[2]);
        if (t.signed_area() < 1e-6) continue;
        const Polygon c = clip_polygon_to_cell(t, cell);
        const double area = c.empty() ? 0.0 : c.signed_area();
        CHECK(area == doctest::Approx(oracle_clip_area(t.vertices, cell)).epsilon(1e-10));
    }
}

TEST_CASE("triangulate_from_barycenter") {
    const Polygon tri{{{0, 0}, {1, 0}, {0, 1}}};
    const auto tt = triangulate_from_barycenter(tri);
    REQUIRE(tt.size() == 1);
    CHECK(tt[0].signed_area() == doctest::Approx(0.5));

    const Polygon square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    const auto ts = triangulate_from_barycenter(square);
    REQUIRE(ts.size() == 4);
    for (const auto& t : ts) CHECK(t.signed_area() == doctest::Approx(0.25).epsilon(1e-14));

    const Polygon pent{{{0, 0}, {2, 0}, {2.5, 1.5}, {1, 2.6}, {-0.4, 1.2}}};
    const auto tp = triangulate_from_barycenter(pent);
    REQUIRE(tp.size() == 5);
    double sum = 0.0;
    for (const auto& t : tp) sum += t.signed_area();
    CHECK(sum == doctest::Approx(pent.signed_area()).epsilon(1e-13));
}

TEST_CASE("clipped pieces over the grid partition any interior quad") {
    const QuadMesh box = QuadMesh::fluid_box(7, 5, {0.0, 1.0, 0.0, 1.0});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (int k = 0; k < 20; ++k) {
        std::array<Vec2, 4> quad;
        do {
            const Vec2 c{unif(rng), unif(rng)};
            const double r = 0.04 + 0.3 * unif(rng);
            for (int i = 0; i < 4; ++i) {
                const double a = 2.0 * std::numbers::pi * (i + 0.2 * unif(rng)) / 4.0;
                quad[static_cast<std::size_t>(i)] = {
                    std::clamp(c.x + r * std::cos(a), 0.01, 0.99),
                    std::clamp(c.y + r * std::sin(a), 0.01, 0.99)};
            }
        } while (shoelace_area(quad) < 1e-4 || reflex_corner(quad) >= 0);
        const Polygon poly{{quad[0], quad[1], quad[2], quad[3]}};
        double total = 0.0;
        for (int e = 0; e < box.n_elems(); ++e) {
            const Polygon c = clip_polygon_to_cell(poly, box.cell_rect(e));
            if (!c.empty()) total += c.signed_area();
        }
        CHECK(total == doctest::Approx(shoelace_area(quad)).epsilon(1e-12));
    }
}

TEST_CASE("quarter annulus mesh area converges at second order") {
    const double exact = (std::numbers::pi / 4.0) * (0.25 - 0.09);
    double prev_err = 0.0;
    std::vector<double> errors;
    for (const int n : {12, 24, 48}) {
        const QuadMesh m = QuadMesh::quarter_annulus(2 * n, n, 0.3, 0.5);
        errors.push_back(std::abs(m.total_area() - exact));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const double rate = std::log2(errors[i - 1] / errors[i]);
        CHECK(rate > 1.9);
        CHECK(rate < 2.1);
    }
    (void)prev_err;
}

TEST_CASE("meshes reject degenerate input") {
    CHECK_THROWS_AS((void)QuadMesh::fluid_box(2, 2, {1.0, 0.0, 0.0, 1.0}), NegativeElementArea);
}

TEST_CASE("quarter annulus elements are counterclockwise") {
    const QuadMesh m = QuadMesh::quarter_annulus(8, 4, 0.3, 0.5);
    for (int e = 0; e < m.n_elems(); ++e) CHECK(m.elem_area(e) > 0.0);
    CHECK(m.n_vertices() == 9 * 5);
}
