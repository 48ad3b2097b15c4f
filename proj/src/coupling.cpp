#include "fsidlm/coupling.hpp"

#include "fsidlm/geometry.hpp"

#include <chrono>
#include <cmath>

namespace fsidlm {

namespace {

struct ThreadStats {
    long polygons = 0;
    long triangles = 0;
    long qpoints = 0;
};

// Per-corner quadrature weights of the coarse rule: w_k = integral of N_k
// over the element. Equals area(E)/4 on rectangles and parallelograms and
// keeps the partition-of-unity identity with the Gauss-assembled multiplier
// mass exact on every mesh.
std::array<double, 4> corner_weights(const std::array<Vec2, 4>& corners) {
    const QuadratureRule& rule = volume_quadrature(RuleKind::GaussQuad3x3);
    std::array<double, 4> w{0.0, 0.0, 0.0, 0.0};
    double v[4];
    for (std::size_t q = 0; q < rule.size(); ++q) {
        eval_q1_basis(rule.points[q], v, nullptr);
        const Vec2 r = rule.points[q];
        const Vec2 dxi = (corners[1] - corners[0]) * (1.0 - r.y) + (corners[2] - corners[3]) * r.y;
        const Vec2 deta = (corners[3] - corners[0]) * (1.0 - r.x) + (corners[2] - corners[1]) * r.x;
        const double wq = rule.weights[q] * cross(dxi, deta);
        for (int k = 0; k < 4; ++k) w[static_cast<std::size_t>(k)] += wq * v[k];
    }
    return w;
}

// Reference corners of the unit square in counterclockwise order.
constexpr std::array<Vec2, 4> ref_corners{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{1.0, 1.0},
                                          Vec2{0.0, 1.0}};

// Affine pull-back onto a reference triangle: returns barycentric-combined
// reference coordinates of x with respect to the physical triangle (p0,p1,p2)
// carrying reference corners (r0,r1,r2).
Vec2 affine_pullback(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& r0,
                     const Vec2& r1, const Vec2& r2, const Vec2& x) {
    const double det = cross(p1 - p0, p2 - p0);
    const double l1 = cross(x - p0, p2 - p0) / det;
    const double l2 = cross(p1 - p0, x - p0) / det;
    const double l0 = 1.0 - l1 - l2;
    return {l0 * r0.x + l1 * r1.x + l2 * r2.x, l0 * r0.y + l1 * r1.y + l2 * r2.y};
}

} // namespace

CouplingAssembly assemble_coupling(const FeSpace& V, const FeSpace& S, std::span<const double> X,
                                   const CouplingOptions& options) {
    if (V.kind() != SpaceKind::VectorQ2 || S.kind() != SpaceKind::VectorQ1)
        throw MeshMismatch("coupling expects VectorQ2 fluid and VectorQ1 solid spaces");
    if (static_cast<int>(X.size()) != S.n_dofs())
        throw MeshMismatch("deformation vector size does not match the solid space");

    const auto t0 = std::chrono::steady_clock::now();
    const QuadMesh& fluid = V.mesh();
    const QuadMesh& solid = S.mesh();
    const int ne = solid.n_elems();
    const int n_threads = options.n_threads < 1 ? 1 : options.n_threads;

    RowGatherAssembler assembler(S.n_dofs(), V.n_dofs(), ne);
    std::vector<ThreadStats> tstats(static_cast<std::size_t>(n_threads));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));

    const Rect box = fluid.box();
    const double hx = box.width() / fluid.nx();
    const double hy = box.height() / fluid.ny();

    auto mapped_node = [&](int node) {
        return Vec2{X[static_cast<std::size_t>(2 * node)], X[static_cast<std::size_t>(2 * node + 1)]};
    };

    auto scatter_point = [&](std::vector<Triplet>& buf, const int* s_nodes, const double* zeta,
                             int fluid_elem, const Vec2& fluid_ref, double weight) {
        double phi[9];
        eval_q2_basis(fluid_ref, phi, nullptr);
        const int* f_nodes = V.elem_nodes(fluid_elem);
        for (int a = 0; a < 4; ++a) {
            const double za = weight * zeta[a];
            if (za == 0.0) continue;
            for (int b = 0; b < 9; ++b) {
                const double val = za * phi[b];
                buf.push_back({2 * s_nodes[a], 2 * f_nodes[b], val});
                buf.push_back({2 * s_nodes[a] + 1, 2 * f_nodes[b] + 1, val});
            }
        }
    };

    if (options.strategy == CouplingStrategy::VertexRule) {
        par_for(static_cast<std::size_t>(ne), n_threads, [&](std::size_t b, std::size_t e_end, int t) {
            try {
                for (std::size_t e = b; e < e_end; ++e) {
                    const auto corners = solid.elem_corners(static_cast<int>(e));
                    const auto w = corner_weights(corners);
                    const int* s_nodes = S.elem_nodes(static_cast<int>(e));
                    auto& buf = assembler.elem_buffer(static_cast<int>(e));
                    for (int k = 0; k < 4; ++k) {
                        const Vec2 m = mapped_node(s_nodes[k]);
                        const int f = fluid.locate_point(m);
                        const Rect cell = fluid.cell_rect(f);
                        const Vec2 fref{(m.x - cell.x0) / hx, (m.y - cell.y0) / hy};
                        // zeta at a corner is the unit vector of that corner node.
                        double zeta[4] = {0.0, 0.0, 0.0, 0.0};
                        zeta[k] = 1.0;
                        scatter_point(buf, s_nodes, zeta, f, fref, w[static_cast<std::size_t>(k)]);
                    }
                    tstats[static_cast<std::size_t>(t)].qpoints += 4;
                    RowGatherAssembler::finalize_element(buf);
                }
            } catch (...) {
                if (!errors[static_cast<std::size_t>(t)])
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    } else {
        const QuadratureRule& tri_rule = volume_quadrature(options.triangle_rule);
        par_for(static_cast<std::size_t>(ne), n_threads, [&](std::size_t b, std::size_t e_end, int t) {
            try {
                std::vector<Polygon> pieces;
                std::vector<int> piece_cells;
                for (std::size_t e = b; e < e_end; ++e) {
                    const auto geom = solid.elem_corners(static_cast<int>(e));
                    const int* s_nodes = S.elem_nodes(static_cast<int>(e));
                    const std::array<Vec2, 4> mapped{
                        mapped_node(s_nodes[0]), mapped_node(s_nodes[1]),
                        mapped_node(s_nodes[2]), mapped_node(s_nodes[3])};

                    // detJ of the geometry map is affine in (xi, eta).
                    const double j0 = cross(geom[1] - geom[0], geom[3] - geom[0]);
                    const double j1 = cross(geom[1] - geom[0], geom[2] - geom[1]) - j0;
                    const double j2 = cross(geom[2] - geom[3], geom[3] - geom[0]) - j0;
                    auto geom_detJ = [&](const Vec2& r) { return j0 + j1 * r.x + j2 * r.y; };

                    // A folded (non-convex) mapped quad is handled as its two
                    // diagonal triangles with affine pull-backs.
                    const int reflex = reflex_corner(mapped);
                    struct Subject {
                        Polygon poly;          // physical space
                        int tri[3] = {-1, -1, -1}; // corner indices, -1 for whole quad
                    };
                    std::vector<Subject> subjects;
                    if (reflex < 0) {
                        Subject s;
                        s.poly.vertices.assign(mapped.begin(), mapped.end());
                        subjects.push_back(std::move(s));
                    } else {
                        for (int half = 0; half < 2; ++half) {
                            Subject s;
                            s.tri[0] = reflex;
                            s.tri[1] = (reflex + 1 + half) % 4;
                            s.tri[2] = (reflex + 2 + half) % 4;
                            s.poly.vertices = {mapped[static_cast<std::size_t>(s.tri[0])],
                                               mapped[static_cast<std::size_t>(s.tri[1])],
                                               mapped[static_cast<std::size_t>(s.tri[2])]};
                            if (s.poly.signed_area() <= 0.0)
                                throw NegativeElementArea(
                                    "mapped solid element " + std::to_string(e) +
                                    " is inverted");
                            subjects.push_back(std::move(s));
                        }
                    }

                    pieces.clear();
                    piece_cells.clear();
                    for (const auto& subject : subjects) {
                        double bx0 = subject.poly.vertices[0].x, bx1 = bx0;
                        double by0 = subject.poly.vertices[0].y, by1 = by0;
                        for (const Vec2& v : subject.poly.vertices) {
                            bx0 = std::min(bx0, v.x);
                            bx1 = std::max(bx1, v.x);
                            by0 = std::min(by0, v.y);
                            by1 = std::max(by1, v.y);
                        }
                        auto clampi = [](int v, int hi) { return std::min(std::max(v, 0), hi); };
                        const int i0 = clampi(static_cast<int>(std::floor((bx0 - box.x0) / hx)), fluid.nx() - 1);
                        const int i1 = clampi(static_cast<int>(std::floor((bx1 - box.x0) / hx)), fluid.nx() - 1);
                        const int jj0 = clampi(static_cast<int>(std::floor((by0 - box.y0) / hy)), fluid.ny() - 1);
                        const int jj1 = clampi(static_cast<int>(std::floor((by1 - box.y0) / hy)), fluid.ny() - 1);

                        const std::size_t first_piece = pieces.size();
                        if (i0 == i1 && jj0 == jj1) {
                            pieces.push_back(subject.poly);
                            piece_cells.push_back(jj0 * fluid.nx() + i0);
                        } else {
                            for (int j = jj0; j <= jj1; ++j)
                                for (int i = i0; i <= i1; ++i) {
                                    const int f = j * fluid.nx() + i;
                                    Polygon clipped = clip_polygon_to_cell(subject.poly,
                                                                           fluid.cell_rect(f));
                                    if (!clipped.empty()) {
                                        pieces.push_back(std::move(clipped));
                                        piece_cells.push_back(f);
                                    }
                                }
                        }
                        // Pull every piece vertex back to the reference square.
                        for (std::size_t p = first_piece; p < pieces.size(); ++p) {
                            for (Vec2& v : pieces[p].vertices) {
                                if (subject.tri[0] < 0) {
                                    v = inverse_bilinear(mapped, v);
                                } else {
                                    v = affine_pullback(
                                        subject.poly.vertices[0], subject.poly.vertices[1],
                                        subject.poly.vertices[2],
                                        ref_corners[static_cast<std::size_t>(subject.tri[0])],
                                        ref_corners[static_cast<std::size_t>(subject.tri[1])],
                                        ref_corners[static_cast<std::size_t>(subject.tri[2])], v);
                                }
                            }
                        }
                    }

                    double ref_area = 0.0;
                    for (const Polygon& p : pieces) ref_area += p.signed_area();
                    if (std::abs(ref_area - 1.0) > 1e-8)
                        throw ClippingDegenerate(
                            "pulled-back pieces of solid element " + std::to_string(e) +
                            " cover reference area " + std::to_string(ref_area));

                    auto& buf = assembler.elem_buffer(static_cast<int>(e));
                    auto& st = tstats[static_cast<std::size_t>(t)];
                    st.polygons += static_cast<long>(pieces.size());
                    for (std::size_t p = 0; p < pieces.size(); ++p) {
                        const Rect cell = fluid.cell_rect(piece_cells[p]);
                        const auto tris = triangulate_from_barycenter(pieces[p]);
                        st.triangles += static_cast<long>(tris.size());
                        for (const Triangle& tri : tris) {
                            const double tri_area = tri.signed_area();
                            for (std::size_t q = 0; q < tri_rule.size(); ++q) {
                                const double l1 = tri_rule.points[q].x;
                                const double l2 = tri_rule.points[q].y;
                                const double l0 = 1.0 - l1 - l2;
                                const Vec2 rq = tri.p[0] * l1 + tri.p[1] * l2 + tri.p[2] * l0;
                                const double w =
                                    tri_area * tri_rule.weights[q] * geom_detJ(rq);
                                double zeta[4];
                                eval_q1_basis(rq, zeta, nullptr);
                                const Vec2 xq = forward_bilinear(mapped, rq);
                                const Vec2 fref{(xq.x - cell.x0) / hx, (xq.y - cell.y0) / hy};
                                scatter_point(buf, s_nodes, zeta, piece_cells[p], fref, w);
                                ++st.qpoints;
                            }
                        }
                    }
                    RowGatherAssembler::finalize_element(buf);
                }
            } catch (...) {
                if (!errors[static_cast<std::size_t>(t)])
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }

    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    CouplingAssembly result;
    result.strategy = options.strategy;
    result.L_f = assembler.assemble(
        [&] {
            const auto& node_adj = S.node_to_elems();
            std::vector<std::vector<int>> adj(static_cast<std::size_t>(S.n_dofs()));
            for (int n = 0; n < S.n_scalar_nodes(); ++n) {
                adj[static_cast<std::size_t>(2 * n)] = node_adj[static_cast<std::size_t>(n)];
                adj[static_cast<std::size_t>(2 * n + 1)] = node_adj[static_cast<std::size_t>(n)];
            }
            return adj;
        }(),
        n_threads);
    for (const auto& ts : tstats) {
        result.stats.polygons += ts.polygons;
        result.stats.triangles += ts.triangles;
        result.stats.quadrature_points += ts.qpoints;
    }
    result.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace fsidlm
