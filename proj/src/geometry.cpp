#include "fsidlm/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace fsidlm {

double Polygon::signed_area() const {
    double a = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = vertices[i];
        const Vec2& q = vertices[(i + 1) % n];
        a += cross(p, q);
    }
    return 0.5 * a;
}

Vec2 Polygon::barycenter() const {
    Vec2 c{0.0, 0.0};
    for (const Vec2& v : vertices) c += v;
    const double inv = 1.0 / static_cast<double>(vertices.size());
    return {c.x * inv, c.y * inv};
}

double shoelace_area(const std::array<Vec2, 4>& quad) {
    double a = 0.0;
    for (int i = 0; i < 4; ++i) a += cross(quad[i], quad[(i + 1) % 4]);
    return 0.5 * a;
}

namespace {

// One half-plane pass of Sutherland-Hodgman. side(v) >= 0 means "inside".
template <class SideFn, class CutFn>
void clip_half_plane(std::vector<Vec2>& poly, std::vector<Vec2>& out, SideFn side, CutFn cut) {
    out.clear();
    const std::size_t n = poly.size();
    if (n == 0) return;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& cur = poly[i];
        const Vec2& nxt = poly[(i + 1) % n];
        const double sc = side(cur);
        const double sn = side(nxt);
        if (sc >= 0.0) {
            out.push_back(cur);
            if (sn < 0.0) out.push_back(cut(cur, nxt, sc, sn));
        } else if (sn >= 0.0) {
            out.push_back(cut(cur, nxt, sc, sn));
        }
    }
    poly.swap(out);
}

Vec2 cut_point(const Vec2& a, const Vec2& b, double sa, double sb) {
    const double t = sa / (sa - sb);
    return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

} // namespace

Polygon clip_polygon_to_cell(const Polygon& poly, const Rect& cell) {
    std::vector<Vec2> work = poly.vertices;
    std::vector<Vec2> scratch;
    scratch.reserve(work.size() + 4);

    clip_half_plane(
        work, scratch, [&](const Vec2& v) { return v.x - cell.x0; },
        [&](const Vec2& a, const Vec2& b, double sa, double sb) {
            Vec2 p = cut_point(a, b, sa, sb);
            p.x = cell.x0;
            return p;
        });
    clip_half_plane(
        work, scratch, [&](const Vec2& v) { return cell.x1 - v.x; },
        [&](const Vec2& a, const Vec2& b, double sa, double sb) {
            Vec2 p = cut_point(a, b, sa, sb);
            p.x = cell.x1;
            return p;
        });
    clip_half_plane(
        work, scratch, [&](const Vec2& v) { return v.y - cell.y0; },
        [&](const Vec2& a, const Vec2& b, double sa, double sb) {
            Vec2 p = cut_point(a, b, sa, sb);
            p.y = cell.y0;
            return p;
        });
    clip_half_plane(
        work, scratch, [&](const Vec2& v) { return cell.y1 - v.y; },
        [&](const Vec2& a, const Vec2& b, double sa, double sb) {
            Vec2 p = cut_point(a, b, sa, sb);
            p.y = cell.y1;
            return p;
        });

    // Merge near-coincident vertices.
    constexpr double merge_tol = 1e-14;
    Polygon result;
    result.vertices.reserve(work.size());
    for (const Vec2& v : work) {
        if (!result.vertices.empty()) {
            const Vec2 d = v - result.vertices.back();
            if (std::abs(d.x) <= merge_tol && std::abs(d.y) <= merge_tol) continue;
        }
        result.vertices.push_back(v);
    }
    while (result.vertices.size() >= 2) {
        const Vec2 d = result.vertices.front() - result.vertices.back();
        if (std::abs(d.x) <= merge_tol && std::abs(d.y) <= merge_tol)
            result.vertices.pop_back();
        else
            break;
    }

    if (result.vertices.size() < 3) return Polygon{};
    if (result.signed_area() < 1e-14 * cell.area()) return Polygon{};
    return result;
}

std::vector<Triangle> triangulate_from_barycenter(const Polygon& poly) {
    std::vector<Triangle> tris;
    const std::size_t n = poly.vertices.size();
    if (n < 3) return tris;
    if (n == 3) {
        tris.push_back(Triangle{{poly.vertices[0], poly.vertices[1], poly.vertices[2]}});
        return tris;
    }
    const Vec2 c = poly.barycenter();
    tris.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        tris.push_back(Triangle{{poly.vertices[i], poly.vertices[(i + 1) % n], c}});
    return tris;
}

Vec2 forward_bilinear(const std::array<Vec2, 4>& q, const Vec2& r) {
    const double a = (1.0 - r.x) * (1.0 - r.y);
    const double b = r.x * (1.0 - r.y);
    const double c = r.x * r.y;
    const double d = (1.0 - r.x) * r.y;
    return {a * q[0].x + b * q[1].x + c * q[2].x + d * q[3].x,
            a * q[0].y + b * q[1].y + c * q[2].y + d * q[3].y};
}

namespace {

// Jacobian columns of the bilinear map at (xi, eta).
void bilinear_jacobian(const std::array<Vec2, 4>& q, const Vec2& r, Vec2& dxi, Vec2& deta) {
    dxi = (q[1] - q[0]) * (1.0 - r.y) + (q[2] - q[3]) * r.y;
    deta = (q[3] - q[0]) * (1.0 - r.x) + (q[2] - q[1]) * r.x;
}

bool newton_polish(const std::array<Vec2, 4>& q, const Vec2& x, Vec2& r, double scale) {
    for (int it = 0; it < 50; ++it) {
        const Vec2 res = forward_bilinear(q, r) - x;
        if (std::max(std::abs(res.x), std::abs(res.y)) <= 1e-10 * scale) return true;
        Vec2 dxi, deta;
        bilinear_jacobian(q, r, dxi, deta);
        const double det = cross(dxi, deta);
        if (std::abs(det) < 1e-300) return false;
        // Solve [dxi deta] * delta = res.
        const double dx = (res.x * deta.y - deta.x * res.y) / det;
        const double dy = (dxi.x * res.y - res.x * dxi.y) / det;
        r.x -= dx;
        r.y -= dy;
    }
    const Vec2 res = forward_bilinear(q, r) - x;
    return std::max(std::abs(res.x), std::abs(res.y)) <= 1e-10 * scale;
}

} // namespace

Vec2 inverse_bilinear(const std::array<Vec2, 4>& q, const Vec2& x) {
    const Vec2 a = q[1] - q[0];
    const Vec2 b = q[3] - q[0];
    const Vec2 c = (q[2] - q[1]) - b;
    const Vec2 d = x - q[0];

    double scale = 0.0;
    for (const Vec2& v : q) scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
    scale = std::max(scale, 1.0);

    // (d - eta*b) x (a + eta*c) = 0  =>  A eta^2 + B eta + C = 0
    const double A = -cross(b, c);
    const double B = cross(d, c) - cross(b, a);
    const double C = cross(d, a);

    auto xi_from_eta = [&](double eta) {
        const Vec2 col = a + c * eta;
        const double den = dot(col, col);
        if (den < 1e-300) return 0.5;
        const Vec2 rhs = d - b * eta;
        return dot(rhs, col) / den;
    };

    Vec2 best{0.5, 0.5};
    bool have_candidate = false;
    if (std::abs(A) < 1e-14 * scale * scale) {
        if (std::abs(B) > 1e-300) {
            const double eta = -C / B;
            best = {xi_from_eta(eta), eta};
            have_candidate = true;
        }
    } else {
        const double disc = B * B - 4.0 * A * C;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            // Numerically stable pair of roots.
            const double q1 = -0.5 * (B + (B >= 0.0 ? sq : -sq));
            const double r1 = q1 / A;
            const double r2 = std::abs(q1) > 1e-300 ? C / q1 : r1;
            // Prefer the root inside (or nearest to) the unit interval.
            auto dist = [](double t) {
                if (t < 0.0) return -t;
                if (t > 1.0) return t - 1.0;
                return 0.0;
            };
            const double eta = dist(r1) <= dist(r2) ? r1 : r2;
            best = {xi_from_eta(eta), eta};
            have_candidate = true;
        }
    }

    if (have_candidate && newton_polish(q, x, best, scale)) return best;

    Vec2 fallback{0.5, 0.5};
    if (newton_polish(q, x, fallback, scale)) return fallback;
    throw NoConvergence("inverse_bilinear: residual above 1e-10 after 50 Newton steps");
}

int reflex_corner(const std::array<Vec2, 4>& q) {
    for (int k = 0; k < 4; ++k) {
        const Vec2 e0 = q[(k + 1) % 4] - q[k];
        const Vec2 e1 = q[(k + 3) % 4] - q[k];
        if (cross(e0, e1) <= 0.0) return k;
    }
    return -1;
}

} // namespace fsidlm
