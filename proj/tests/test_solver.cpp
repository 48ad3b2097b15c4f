#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fsidlm/matrix_market.hpp"
#include "fsidlm/saddle_solver.hpp"

#include <filesystem>
#include <random>

using namespace fsidlm;

namespace {

struct Fixture {
    QuadMesh fluid = QuadMesh::fluid_box(4, 4, {0.0, 1.0, 0.0, 1.0});
    QuadMesh solid = QuadMesh::quarter_annulus(8, 4, 0.3, 0.5);
    FeSpace V{SpaceKind::VectorQ2, fluid};
    FeSpace Q{SpaceKind::DiscP1, fluid};
    FeSpace S{SpaceKind::VectorQ1, solid};
    double dt = 0.01;
    BlockSystem system{{}, 0.01};
    std::vector<double> X;

    explicit Fixture(bool enclosed = true, bool zero_coupling = false) {
        BlockSizes sizes;
        sizes.n_u = V.n_dofs();
        sizes.n_p = Q.n_dofs();
        sizes.n_X = S.n_dofs();
        sizes.n_lambda = S.n_dofs();
        system = BlockSystem(sizes, dt);

        std::vector<int> dofs;
        auto add = [&](const char* name) {
            const auto& set = V.boundary_dofs(name);
            dofs.insert(dofs.end(), set.begin(), set.end());
        };
        add("top");
        add("left");
        add("bottom");
        if (enclosed) add("right");
        system.set_velocity_dirichlet(std::move(dofs));

        const auto blocks = assemble_fluid_blocks(V, Q, 1.0, 0.1, dt);
        system.set_fluid_blocks(blocks.A, blocks.B);
        system.set_multiplier_mass(assemble_multiplier_mass(S));
        system.set_solid_block(assemble_solid_linear(S, 10.0));
        system.set_pressure_cell_areas(
            std::vector<double>(static_cast<std::size_t>(fluid.n_elems()),
                                fluid.elem_area(0)));

        X.assign(static_cast<std::size_t>(S.n_dofs()), 0.0);
        for (int n = 0; n < S.n_scalar_nodes(); ++n) {
            const Vec2 s = solid.vertices()[static_cast<std::size_t>(n)];
            X[static_cast<std::size_t>(2 * n)] = s.x / 1.4;
            X[static_cast<std::size_t>(2 * n + 1)] = 1.4 * s.y;
        }
        if (zero_coupling) {
            system.set_coupling(CsrMatrix(S.n_dofs(), V.n_dofs()));
        } else {
            CouplingOptions opts;
            opts.strategy = CouplingStrategy::VertexRule;
            system.set_coupling(assemble_coupling(V, S, X, opts).L_f);
        }
    }

    [[nodiscard]] std::vector<double> random_rhs(unsigned seed) const {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::vector<double> b(static_cast<std::size_t>(system.sizes().total()));
        for (auto& v : b) v = unif(rng);
        // Consistency: zero on constrained velocity rows and pressure rows.
        for (const int d : system.dirichlet_dofs()) b[static_cast<std::size_t>(d)] = 0.0;
        for (int i = 0; i < system.sizes().n_p; ++i)
            b[static_cast<std::size_t>(system.sizes().offset_p() + i)] = 0.0;
        return b;
    }
};

} // namespace

TEST_CASE("gmres solves the identity in one iteration") {
    const LinearOp identity = [](std::span<const double> x, std::span<double> y) {
        std::copy(x.begin(), x.end(), y.begin());
    };
    std::vector<double> rhs = {3.0, -1.0, 2.0, 0.5};
    GmresOptions opts;
    const GmresResult r = gmres(identity, rhs, identity, opts);
    CHECK(r.iterations == 1);
    for (std::size_t i = 0; i < rhs.size(); ++i)
        CHECK(r.x[i] == doctest::Approx(rhs[i]).epsilon(1e-12));
}

TEST_CASE("gmres agrees with the direct solve on an SPD system") {
    // 2x2 diagonal blocks system.
    std::vector<Triplet> t = {{0, 0, 4.0}, {1, 1, 2.0}};
    const CsrMatrix A = CsrMatrix::from_triplets(2, 2, t);
    DirectFactorization lu;
    lu.factorize(A);
    const std::vector<double> b = {1.0, -3.0};
    const auto direct = lu.solve(b);

    const LinearOp op = [&](std::span<const double> x, std::span<double> y) { A.matvec(x, y); };
    const LinearOp noop = [](std::span<const double> x, std::span<double> y) {
        std::copy(x.begin(), x.end(), y.begin());
    };
    GmresOptions opts;
    opts.tol_rel = 1e-14;
    const GmresResult r = gmres(op, b, noop, opts);
    for (int i = 0; i < 2; ++i) CHECK(r.x[static_cast<std::size_t>(i)] ==
                                      doctest::Approx(direct[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("direct factorization: residual contract and singularity detection") {
    Fixture fx;
    const CsrMatrix A11 = fx.system.build_A11();
    DirectFactorization lu;
    lu.factorize(A11, fx.system.sizes().n_u); // pinned pressure dof
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> b(static_cast<std::size_t>(A11.n_rows()));
    for (auto& v : b) v = unif(rng);
    b[static_cast<std::size_t>(fx.system.sizes().n_u)] = 0.0;
    const auto x = lu.solve(b);
    std::vector<double> ax(b.size(), 0.0);
    // Residual in the pinned matrix sense: recompute with pin applied.
    CsrMatrix pinned = A11;
    std::vector<int> pin = {fx.system.sizes().n_u};
    pinned.zero_rows_set_identity(pin);
    pinned.zero_cols(pin);
    for (const int d : pin)
        for (int k = pinned.row_ptr()[static_cast<std::size_t>(d)];
             k < pinned.row_ptr()[static_cast<std::size_t>(d) + 1]; ++k)
            if (pinned.col_idx()[static_cast<std::size_t>(k)] == d)
                pinned.values()[static_cast<std::size_t>(k)] = 1.0;
    pinned.matvec(x, ax);
    double xn = 0.0, bn = 0.0, rn = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        xn = std::max(xn, std::abs(x[i]));
        bn = std::max(bn, std::abs(b[i]));
        rn = std::max(rn, std::abs(ax[i] - b[i]));
    }
    CHECK(rn <= 1e-10 * (pinned.inf_norm() * xn + bn));

    // Exactly singular matrix must be rejected.
    std::vector<Triplet> st = {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
    DirectFactorization bad;
    CHECK_THROWS_AS(bad.factorize(CsrMatrix::from_triplets(2, 2, st)), SingularBlock);
}

TEST_CASE("A22 with the linear annulus stiffness factors cleanly") {
    Fixture fx;
    DirectFactorization lu;
    lu.factorize(fx.system.build_A22());
    CHECK(lu.factorization_count() == 1);
}

TEST_CASE("operator off-diagonal blocks are skew transposes") {
    Fixture fx;
    const auto& sz = fx.system.sizes();
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        // x carries only (u,p), y carries only (X,lambda):
        // <A x, y> restricted to block (2,1) must equal -<x, A y>|_(1,2).
        std::vector<double> x(static_cast<std::size_t>(sz.total()), 0.0);
        std::vector<double> y(static_cast<std::size_t>(sz.total()), 0.0);
        for (int i = 0; i < sz.n_u + sz.n_p; ++i) x[static_cast<std::size_t>(i)] = unif(rng);
        for (int i = sz.offset_X(); i < sz.total(); ++i) y[static_cast<std::size_t>(i)] = unif(rng);
        std::vector<double> ax(x.size(), 0.0), ay(y.size(), 0.0);
        fx.system.apply(x, ax);
        fx.system.apply(y, ay);
        double lhs = 0.0, rhs = 0.0;
        // lhs = y_lambda . (A21 x)_lambda ; rhs = x_u . (A12 y)_u
        for (int i = sz.offset_lambda(); i < sz.total(); ++i)
            lhs += y[static_cast<std::size_t>(i)] * ax[static_cast<std::size_t>(i)];
        for (int i = 0; i < sz.n_u; ++i)
            rhs += x[static_cast<std::size_t>(i)] * ay[static_cast<std::size_t>(i)];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("block preconditioners solve the coupled system") {
    Fixture fx;
    const auto rhs = fx.random_rhs(77);
    GmresOptions opts;

    BlockPreconditioner diag;
    diag.build(fx.system, PreconKind::BlockDiag, true);
    const GmresResult rd = solve_block_system(fx.system, diag, rhs, opts, true);
    CHECK(rd.rel_residual <= 1.1 * opts.tol_rel);

    BlockPreconditioner tri;
    tri.build(fx.system, PreconKind::BlockTri, true);
    const GmresResult rt = solve_block_system(fx.system, tri, rhs, opts, true);
    CHECK(rt.rel_residual <= 1.1 * opts.tol_rel);
    CHECK(rt.iterations <= rd.iterations);

    // Solutions agree up to the solver tolerance.
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        diff = std::max(diff, std::abs(rd.x[i] - rt.x[i]));
        scale = std::max(scale, std::abs(rt.x[i]));
    }
    CHECK(diff <= 1e-5 * scale);
}

TEST_CASE("block-tri equals block-diag when the coupling block vanishes") {
    Fixture fx(true, /*zero_coupling=*/true);
    BlockPreconditioner diag, tri;
    diag.build(fx.system, PreconKind::BlockDiag, true);
    tri.build(fx.system, PreconKind::BlockTri, true);
    const auto r = fx.random_rhs(5);
    std::vector<double> zd(r.size()), zt(r.size());
    diag.apply(r, zd);
    tri.apply(r, zt);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(zd[i] == doctest::Approx(zt[i]).epsilon(1e-14));
}

TEST_CASE("exact preconditioner converges in one iteration") {
    // Open boundary keeps A11 nonsingular; zero coupling makes the block
    // preconditioner equal to the full operator.
    Fixture fx(/*enclosed=*/false, /*zero_coupling=*/true);
    BlockPreconditioner tri;
    tri.build(fx.system, PreconKind::BlockTri, false);
    GmresOptions opts;
    const auto rhs = fx.random_rhs(3);
    const GmresResult r = solve_block_system(fx.system, tri, rhs, opts, false);
    CHECK(r.iterations == 1);
}

TEST_CASE("pressure projection is idempotent across re-solves") {
    Fixture fx;
    BlockPreconditioner tri;
    tri.build(fx.system, PreconKind::BlockTri, true);
    GmresOptions opts;
    const auto rhs = fx.random_rhs(21);
    const GmresResult r1 = solve_block_system(fx.system, tri, rhs, opts, true);
    const GmresResult r2 = solve_block_system(fx.system, tri, rhs, opts, true);
    double diff = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i)
        diff = std::max(diff, std::abs(r1.x[i] - r2.x[i]));
    CHECK(diff <= 1e-10);

    // Pressure mean is zero after the solve.
    const auto& sz = fx.system.sizes();
    double mean = 0.0;
    for (int e = 0; e < sz.n_p / 3; ++e)
        mean += r1.x[static_cast<std::size_t>(sz.offset_p() + 3 * e)];
    CHECK(std::abs(mean) / (sz.n_p / 3) <= 1e-12);
}

TEST_CASE("stale factorization is detected") {
    Fixture fx;
    BlockPreconditioner tri;
    tri.build(fx.system, PreconKind::BlockTri, true);
    fx.system.set_solid_block(assemble_solid_linear(fx.S, 20.0));
    const auto r = fx.random_rhs(1);
    std::vector<double> z(r.size());
    CHECK_THROWS_AS(tri.apply(r, z), FactorizationStale);
    tri.refactor_solid(fx.system);
    tri.apply(r, z); // fine again
    CHECK(tri.a22_factorizations() == 2);
    CHECK(tri.a11_factorizations() == 1);
}

TEST_CASE("max iteration cap raises") {
    Fixture fx;
    BlockPreconditioner tri;
    tri.build(fx.system, PreconKind::BlockTri, true);
    GmresOptions opts;
    opts.tol_rel = 1e-15;
    opts.max_it = 1;
    opts.restart = 1;
    CHECK_THROWS_AS((void)solve_block_system(fx.system, tri, fx.random_rhs(2), opts, true),
                    MaxIterations);
}

TEST_CASE("matrix market dump replays to the same iteration count") {
    Fixture fx;
    const auto dir = std::filesystem::temp_directory_path() / "fsidlm_replay";
    std::filesystem::create_directories(dir);
    write_matrix_market(fx.system.build_A11(), (dir / "a11.mtx").string());
    const CsrMatrix back = read_matrix_market((dir / "a11.mtx").string());
    CHECK(back.same_pattern(fx.system.build_A11()));

    BlockPreconditioner tri;
    tri.build(fx.system, PreconKind::BlockTri, true);
    GmresOptions opts;
    const auto rhs = fx.random_rhs(13);
    const GmresResult live = solve_block_system(fx.system, tri, rhs, opts, true);

    // Replay: rebuild the operator action from dumped blocks.
    write_matrix_market(fx.system.A_f(), (dir / "af.mtx").string());
    write_matrix_market(fx.system.B(), (dir / "b.mtx").string());
    write_matrix_market(fx.system.K(), (dir / "k.mtx").string());
    write_matrix_market(fx.system.L_f(), (dir / "lf.mtx").string());
    write_matrix_market(fx.system.L_s(), (dir / "ls.mtx").string());
    BlockSystem replay(fx.system.sizes(), fx.dt);
    replay.set_fluid_blocks(read_matrix_market((dir / "af.mtx").string()),
                            read_matrix_market((dir / "b.mtx").string()));
    replay.set_solid_block(read_matrix_market((dir / "k.mtx").string()));
    replay.set_multiplier_mass(read_matrix_market((dir / "ls.mtx").string()));
    replay.set_coupling(read_matrix_market((dir / "lf.mtx").string()));
    replay.set_pressure_cell_areas(std::vector<double>(
        static_cast<std::size_t>(fx.fluid.n_elems()), fx.fluid.elem_area(0)));
    BlockPreconditioner tri2;
    tri2.build(replay, PreconKind::BlockTri, true);
    const GmresResult replayed = solve_block_system(replay, tri2, rhs, opts, true);
    CHECK(replayed.iterations == live.iterations);
}
