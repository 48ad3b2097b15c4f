#include "fsidlm/assembly.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace fsidlm {

namespace {

struct MappedBasis {
    double detJ = 0.0;
    std::vector<Vec2> phys_grads;
};

// Physical gradients and Jacobian determinant of the bilinear geometry map.
void map_gradients(const std::array<Vec2, 4>& corners, const Vec2& ref,
                   const std::vector<Vec2>& ref_grads, MappedBasis& out) {
    Vec2 dxi = (corners[1] - corners[0]) * (1.0 - ref.y) + (corners[2] - corners[3]) * ref.y;
    Vec2 deta = (corners[3] - corners[0]) * (1.0 - ref.x) + (corners[2] - corners[1]) * ref.x;
    const double det = cross(dxi, deta);
    out.detJ = det;
    out.phys_grads.resize(ref_grads.size());
    const double inv = 1.0 / det;
    for (std::size_t a = 0; a < ref_grads.size(); ++a) {
        const Vec2& g = ref_grads[a];
        out.phys_grads[a] = {(deta.y * g.x - dxi.y * g.y) * inv,
                             (-deta.x * g.x + dxi.x * g.y) * inv};
    }
}

std::vector<std::vector<int>> vector_dof_adjacency(const FeSpace& space) {
    const auto& node_adj = space.node_to_elems();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(space.n_dofs()));
    for (int n = 0; n < space.n_scalar_nodes(); ++n) {
        adj[static_cast<std::size_t>(2 * n)] = node_adj[static_cast<std::size_t>(n)];
        adj[static_cast<std::size_t>(2 * n + 1)] = node_adj[static_cast<std::size_t>(n)];
    }
    return adj;
}

} // namespace

FluidBlocks assemble_fluid_blocks(const FeSpace& V, const FeSpace& Q, double rho, double nu,
                                  double dt, int n_threads) {
    if (&V.mesh() != &Q.mesh()) throw MeshMismatch("velocity and pressure spaces use different meshes");
    if (V.kind() != SpaceKind::VectorQ2 || Q.kind() != SpaceKind::DiscP1)
        throw MeshMismatch("fluid blocks expect VectorQ2 x DiscP1");

    const QuadMesh& mesh = V.mesh();
    const QuadratureRule& rule = volume_quadrature(RuleKind::GaussQuad3x3);
    const int ne = mesh.n_elems();
    const int nv = V.n_local(); // 9
    const int np = Q.n_local(); // 3

    RowGatherAssembler asm_M(V.n_dofs(), V.n_dofs(), ne);
    RowGatherAssembler asm_K(V.n_dofs(), V.n_dofs(), ne);
    RowGatherAssembler asm_A(V.n_dofs(), V.n_dofs(), ne);
    RowGatherAssembler asm_B(Q.n_dofs(), V.n_dofs(), ne);

    par_for(static_cast<std::size_t>(ne), n_threads, [&](std::size_t b, std::size_t e_end, int) {
        BasisEval q2, p1;
        MappedBasis mapped;
        std::vector<double> mloc(static_cast<std::size_t>(nv * nv), 0.0);
        std::vector<double> kloc(static_cast<std::size_t>(4 * nv * nv), 0.0);
        std::vector<double> bloc(static_cast<std::size_t>(np * 2 * nv), 0.0);
        for (std::size_t e = b; e < e_end; ++e) {
            const auto corners = mesh.elem_corners(static_cast<int>(e));
            std::fill(mloc.begin(), mloc.end(), 0.0);
            std::fill(kloc.begin(), kloc.end(), 0.0);
            std::fill(bloc.begin(), bloc.end(), 0.0);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                V.eval_basis(static_cast<int>(e), rule.points[q], q2);
                Q.eval_basis(static_cast<int>(e), rule.points[q], p1);
                map_gradients(corners, rule.points[q], q2.ref_grads, mapped);
                const double w = rule.weights[q] * mapped.detJ;
                for (int a = 0; a < nv; ++a) {
                    const Vec2 ga = mapped.phys_grads[static_cast<std::size_t>(a)];
                    for (int bb = 0; bb < nv; ++bb) {
                        const Vec2 gb = mapped.phys_grads[static_cast<std::size_t>(bb)];
                        mloc[static_cast<std::size_t>(a * nv + bb)] +=
                            w * q2.values[static_cast<std::size_t>(a)] *
                            q2.values[static_cast<std::size_t>(bb)];
                        const double gagb = dot(ga, gb);
                        const double gav[2] = {ga.x, ga.y};
                        const double gbv[2] = {gb.x, gb.y};
                        for (int c = 0; c < 2; ++c)
                            for (int d = 0; d < 2; ++d) {
                                const double val =
                                    0.5 * nu * ((c == d ? gagb : 0.0) + gav[d] * gbv[c]);
                                kloc[static_cast<std::size_t>(((a * 2 + c) * nv + bb) * 2 + d)] +=
                                    w * val;
                            }
                    }
                }
                for (int k = 0; k < np; ++k)
                    for (int a = 0; a < nv; ++a) {
                        const Vec2 ga = mapped.phys_grads[static_cast<std::size_t>(a)];
                        bloc[static_cast<std::size_t>((k * nv + a) * 2 + 0)] +=
                            w * p1.values[static_cast<std::size_t>(k)] * ga.x;
                        bloc[static_cast<std::size_t>((k * nv + a) * 2 + 1)] +=
                            w * p1.values[static_cast<std::size_t>(k)] * ga.y;
                    }
            }
            const int* vn = V.elem_nodes(static_cast<int>(e));
            const int* pn = Q.elem_nodes(static_cast<int>(e));
            auto& bm = asm_M.elem_buffer(static_cast<int>(e));
            auto& bk = asm_K.elem_buffer(static_cast<int>(e));
            auto& ba = asm_A.elem_buffer(static_cast<int>(e));
            auto& bbuf = asm_B.elem_buffer(static_cast<int>(e));
            for (int a = 0; a < nv; ++a)
                for (int bb = 0; bb < nv; ++bb) {
                    const double mv = mloc[static_cast<std::size_t>(a * nv + bb)];
                    for (int c = 0; c < 2; ++c) {
                        bm.push_back({2 * vn[a] + c, 2 * vn[bb] + c, mv});
                        for (int d = 0; d < 2; ++d) {
                            const double kv =
                                kloc[static_cast<std::size_t>(((a * 2 + c) * nv + bb) * 2 + d)];
                            bk.push_back({2 * vn[a] + c, 2 * vn[bb] + d, kv});
                            const double av = (c == d ? rho / dt * mv : 0.0) + kv;
                            ba.push_back({2 * vn[a] + c, 2 * vn[bb] + d, av});
                        }
                    }
                }
            for (int k = 0; k < np; ++k)
                for (int a = 0; a < nv; ++a)
                    for (int c = 0; c < 2; ++c)
                        bbuf.push_back({pn[k], 2 * vn[a] + c,
                                        bloc[static_cast<std::size_t>((k * nv + a) * 2 + c)]});
            RowGatherAssembler::finalize_element(bm);
            RowGatherAssembler::finalize_element(bk);
            RowGatherAssembler::finalize_element(ba);
            RowGatherAssembler::finalize_element(bbuf);
        }
    });

    const auto v_adj = vector_dof_adjacency(V);
    const auto p_adj = [&] {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(Q.n_dofs()));
        for (int e = 0; e < ne; ++e)
            for (int k = 0; k < np; ++k) adj[static_cast<std::size_t>(Q.elem_nodes(e)[k])] = {e};
        return adj;
    }();

    FluidBlocks blocks;
    blocks.M = asm_M.assemble(v_adj, n_threads);
    blocks.K = asm_K.assemble(v_adj, n_threads);
    blocks.A = asm_A.assemble(v_adj, n_threads);
    blocks.B = asm_B.assemble(p_adj, n_threads);
    return blocks;
}

namespace {

CsrMatrix assemble_q1_bilinear(const FeSpace& S, int n_threads, bool gradient_form, double scale) {
    if (S.kind() != SpaceKind::VectorQ1) throw MeshMismatch("expected a VectorQ1 space");
    const QuadMesh& mesh = S.mesh();
    const QuadratureRule& rule = volume_quadrature(RuleKind::GaussQuad3x3);
    const int ne = mesh.n_elems();
    RowGatherAssembler assembler(S.n_dofs(), S.n_dofs(), ne);

    par_for(static_cast<std::size_t>(ne), n_threads, [&](std::size_t b, std::size_t e_end, int) {
        BasisEval q1;
        MappedBasis mapped;
        double loc[16];
        for (std::size_t e = b; e < e_end; ++e) {
            const auto corners = mesh.elem_corners(static_cast<int>(e));
            std::fill(std::begin(loc), std::end(loc), 0.0);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                S.eval_basis(static_cast<int>(e), rule.points[q], q1);
                map_gradients(corners, rule.points[q], q1.ref_grads, mapped);
                const double w = rule.weights[q] * mapped.detJ;
                for (int a = 0; a < 4; ++a)
                    for (int bb = 0; bb < 4; ++bb)
                        loc[a * 4 + bb] +=
                            w * (gradient_form
                                     ? dot(mapped.phys_grads[static_cast<std::size_t>(a)],
                                           mapped.phys_grads[static_cast<std::size_t>(bb)])
                                     : q1.values[static_cast<std::size_t>(a)] *
                                           q1.values[static_cast<std::size_t>(bb)]);
            }
            const int* nodes = S.elem_nodes(static_cast<int>(e));
            auto& buf = assembler.elem_buffer(static_cast<int>(e));
            for (int a = 0; a < 4; ++a)
                for (int bb = 0; bb < 4; ++bb)
                    for (int c = 0; c < 2; ++c)
                        buf.push_back({2 * nodes[a] + c, 2 * nodes[bb] + c, scale * loc[a * 4 + bb]});
            RowGatherAssembler::finalize_element(buf);
        }
    });
    return assembler.assemble(vector_dof_adjacency(S), n_threads);
}

} // namespace

CsrMatrix assemble_solid_linear(const FeSpace& S, double kappa, int n_threads) {
    return assemble_q1_bilinear(S, n_threads, true, kappa);
}

CsrMatrix assemble_multiplier_mass(const FeSpace& S, int n_threads) {
    return assemble_q1_bilinear(S, n_threads, false, 1.0);
}

SolidResidual solid_residual_and_tangent(const FeSpace& S, const MaterialLaw& law,
                                         std::span<const double> X, int n_threads) {
    if (S.kind() != SpaceKind::VectorQ1) throw MeshMismatch("expected a VectorQ1 space");
    if (static_cast<int>(X.size()) != S.n_dofs())
        throw MeshMismatch("state vector size does not match the solid space");

    if (law.kind == MaterialLaw::Kind::Linear) {
        CsrMatrix ks = assemble_solid_linear(S, law.kappa, n_threads);
        SolidResidual out;
        out.residual.assign(X.size(), 0.0);
        ks.matvec(X, out.residual, n_threads);
        out.tangent = std::move(ks);
        return out;
    }

    const QuadMesh& mesh = S.mesh();
    const QuadratureRule& rule = volume_quadrature(RuleKind::GaussQuad3x3);
    const int ne = mesh.n_elems();
    RowGatherAssembler assembler(S.n_dofs(), S.n_dofs(), ne);
    std::vector<std::vector<double>> rloc(static_cast<std::size_t>(ne),
                                          std::vector<double>(8, 0.0));
    std::vector<char> overflow(static_cast<std::size_t>(ne), 0);

    par_for(static_cast<std::size_t>(ne), n_threads, [&](std::size_t b, std::size_t e_end, int) {
        BasisEval q1;
        MappedBasis mapped;
        double kloc[64];
        for (std::size_t e = b; e < e_end; ++e) {
            const auto corners = mesh.elem_corners(static_cast<int>(e));
            const int* nodes = S.elem_nodes(static_cast<int>(e));
            std::fill(std::begin(kloc), std::end(kloc), 0.0);
            auto& rl = rloc[e];
            for (std::size_t q = 0; q < rule.size(); ++q) {
                S.eval_basis(static_cast<int>(e), rule.points[q], q1);
                map_gradients(corners, rule.points[q], q1.ref_grads, mapped);
                const double w = rule.weights[q] * mapped.detJ;
                // F = sum_a X_a (x) grad N_a
                double F[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
                for (int a = 0; a < 4; ++a) {
                    const Vec2 g = mapped.phys_grads[static_cast<std::size_t>(a)];
                    for (int c = 0; c < 2; ++c) {
                        const double xa = X[static_cast<std::size_t>(2 * nodes[a] + c)];
                        F[c][0] += xa * g.x;
                        F[c][1] += xa * g.y;
                    }
                }
                const double tr = F[0][0] * F[0][0] + F[0][1] * F[0][1] + F[1][0] * F[1][0] +
                                  F[1][1] * F[1][1];
                const double z = law.exp_arg == MaterialLaw::ExpArg::ShiftedTrace
                                     ? law.eta * (tr - 2.0)
                                     : law.eta * tr - 2.0;
                if (z > 700.0) {
                    overflow[e] = 1;
                    break;
                }
                const double s = law.gamma * std::exp(z);
                // P = s * F; tangent dP[dF] = s (dF + 2 eta (F:dF) F).
                for (int a = 0; a < 4; ++a) {
                    const Vec2 ga = mapped.phys_grads[static_cast<std::size_t>(a)];
                    const double Fga[2] = {F[0][0] * ga.x + F[0][1] * ga.y,
                                           F[1][0] * ga.x + F[1][1] * ga.y};
                    for (int c = 0; c < 2; ++c)
                        rl[static_cast<std::size_t>(2 * a + c)] += w * s * Fga[c];
                    for (int bb = 0; bb < 4; ++bb) {
                        const Vec2 gb = mapped.phys_grads[static_cast<std::size_t>(bb)];
                        const double Fgb[2] = {F[0][0] * gb.x + F[0][1] * gb.y,
                                               F[1][0] * gb.x + F[1][1] * gb.y};
                        const double gagb = dot(ga, gb);
                        for (int c = 0; c < 2; ++c)
                            for (int d = 0; d < 2; ++d)
                                kloc[(2 * a + c) * 8 + 2 * bb + d] +=
                                    w * s *
                                    ((c == d ? gagb : 0.0) + 2.0 * law.eta * Fgb[d] * Fga[c]);
                    }
                }
            }
            auto& buf = assembler.elem_buffer(static_cast<int>(e));
            for (int a = 0; a < 4; ++a)
                for (int c = 0; c < 2; ++c)
                    for (int bb = 0; bb < 4; ++bb)
                        for (int d = 0; d < 2; ++d)
                            buf.push_back({2 * nodes[a] + c, 2 * nodes[bb] + d,
                                           kloc[(2 * a + c) * 8 + 2 * bb + d]});
            RowGatherAssembler::finalize_element(buf);
        }
    });

    for (int e = 0; e < ne; ++e)
        if (overflow[static_cast<std::size_t>(e)])
            throw NonFiniteValue("exponential-law exponent exceeded 700 in element " +
                                 std::to_string(e));

    SolidResidual out;
    out.residual.assign(X.size(), 0.0);
    // Deterministic residual accumulation: fixed element order.
    for (int e = 0; e < ne; ++e) {
        const int* nodes = S.elem_nodes(e);
        for (int a = 0; a < 4; ++a)
            for (int c = 0; c < 2; ++c)
                out.residual[static_cast<std::size_t>(2 * nodes[a] + c)] +=
                    rloc[static_cast<std::size_t>(e)][static_cast<std::size_t>(2 * a + c)];
    }
    out.tangent = assembler.assemble(vector_dof_adjacency(S), n_threads);
    return out;
}

std::vector<double> assemble_velocity_load(const FeSpace& V,
                                           const std::function<Vec2(const Vec2&)>& f,
                                           int points_per_dir) {
    const QuadMesh& mesh = V.mesh();
    // Tensor Gauss-Legendre of the requested order on [0,1].
    std::vector<double> pts, wts;
    {
        const int n = points_per_dir;
        std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
        // Newton on Legendre polynomials over [-1,1].
        for (int i = 0; i < n; ++i) {
            double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = n * (t * p1 - p0) / (t * t - 1.0);
                const double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            x[static_cast<std::size_t>(i)] = 0.5 * (1.0 + t);
            w[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - t * t) * dp * dp);
        }
        pts = x;
        wts = w;
    }

    std::vector<double> load(static_cast<std::size_t>(V.n_dofs()), 0.0);
    BasisEval basis;
    for (int e = 0; e < mesh.n_elems(); ++e) {
        const auto corners = mesh.elem_corners(e);
        const int* nodes = V.elem_nodes(e);
        for (std::size_t qj = 0; qj < pts.size(); ++qj)
            for (std::size_t qi = 0; qi < pts.size(); ++qi) {
                const Vec2 ref{pts[qi], pts[qj]};
                V.eval_basis(e, ref, basis);
                Vec2 dxi = (corners[1] - corners[0]) * (1.0 - ref.y) +
                           (corners[2] - corners[3]) * ref.y;
                Vec2 deta = (corners[3] - corners[0]) * (1.0 - ref.x) +
                            (corners[2] - corners[1]) * ref.x;
                const double w = wts[qi] * wts[qj] * cross(dxi, deta);
                const Vec2 fx = f(forward_bilinear(corners, ref));
                for (int a = 0; a < V.n_local(); ++a) {
                    load[static_cast<std::size_t>(2 * nodes[a])] +=
                        w * basis.values[static_cast<std::size_t>(a)] * fx.x;
                    load[static_cast<std::size_t>(2 * nodes[a] + 1)] +=
                        w * basis.values[static_cast<std::size_t>(a)] * fx.y;
                }
            }
    }
    return load;
}

} // namespace fsidlm
