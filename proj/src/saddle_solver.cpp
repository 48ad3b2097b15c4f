#include "fsidlm/saddle_solver.hpp"

#include <cmath>

namespace fsidlm {

void BlockPreconditioner::build(const BlockSystem& system, PreconKind kind, bool pin_pressure) {
    system_ = &system;
    kind_ = kind;
    const int pin = pin_pressure ? system.sizes().n_u : -1;
    fact11_.factorize(system.build_A11(), pin);
    fact22_.factorize(system.build_A22());
    built_solid_version_ = system.solid_version();
}

void BlockPreconditioner::refactor_solid(const BlockSystem& system) {
    fact22_.factorize(system.build_A22());
    built_solid_version_ = system.solid_version();
}

void BlockPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    if (system_ == nullptr) throw FactorizationStale("preconditioner not built");
    if (built_solid_version_ != system_->solid_version())
        throw FactorizationStale("solid block changed without refactor");

    const auto& sz = system_->sizes();
    const std::size_t n1 = static_cast<std::size_t>(sz.n_u + sz.n_p);
    const std::size_t n2 = static_cast<std::size_t>(sz.n_X + sz.n_lambda);

    fact11_.solve(r.subspan(0, n1), z.subspan(0, n1));
    if (kind_ == PreconKind::BlockDiag) {
        fact22_.solve(r.subspan(n1, n2), z.subspan(n1, n2));
        return;
    }
    scratch_.assign(r.begin(), r.end());
    system_->apply_A21_correction(z, scratch_);
    fact22_.solve(std::span<const double>(scratch_).subspan(n1, n2), z.subspan(n1, n2));
}

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

GmresResult gmres(const LinearOp& op, std::span<const double> rhs, const LinearOp& precon,
                  const GmresOptions& options,
                  const std::function<void(std::span<double>)>& postprocess) {
    const std::size_t n = rhs.size();
    GmresResult result;
    result.x.assign(n, 0.0);

    const double beta0 = norm2(rhs);
    if (beta0 == 0.0) return result;

    const int m = options.restart;
    std::vector<std::vector<double>> V;
    std::vector<double> H(static_cast<std::size_t>((m + 1) * m), 0.0);
    std::vector<double> cs(static_cast<std::size_t>(m), 0.0);
    std::vector<double> sn(static_cast<std::size_t>(m), 0.0);
    std::vector<double> g(static_cast<std::size_t>(m + 1), 0.0);
    std::vector<double> r(n), w(n), z(n);

    auto h = [&](int i, int j) -> double& { return H[static_cast<std::size_t>(i * m + j)]; };

    int total_its = 0;
    while (true) {
        // r = b - A x (x = 0 on the first sweep)
        if (total_its == 0) {
            std::copy(rhs.begin(), rhs.end(), r.begin());
        } else {
            op(result.x, r);
            for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
        }
        const double beta = norm2(r);
        result.rel_residual = beta / beta0;
        if (result.rel_residual <= options.tol_rel) return result;

        V.clear();
        V.emplace_back(n);
        for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int k = 0;
        bool lucky_breakdown = false;
        for (; k < m && total_its < options.max_it; ++k) {
            precon(V[static_cast<std::size_t>(k)], z);
            op(z, w);
            if (postprocess) postprocess(std::span<double>(w));

            // Modified Gram-Schmidt.
            for (int i = 0; i <= k; ++i) {
                double dot_iv = 0.0;
                const auto& vi = V[static_cast<std::size_t>(i)];
                for (std::size_t jj = 0; jj < n; ++jj) dot_iv += w[jj] * vi[jj];
                h(i, k) = dot_iv;
                for (std::size_t jj = 0; jj < n; ++jj) w[jj] -= dot_iv * vi[jj];
            }
            const double hk1 = norm2(w);
            ++total_its;

            if (hk1 < 1e-30) {
                // Exact invariant subspace: either we are converged or the
                // Arnoldi process genuinely broke down.
                lucky_breakdown = true;
            } else {
                V.emplace_back(n);
                auto& vk1 = V.back();
                for (std::size_t jj = 0; jj < n; ++jj) vk1[jj] = w[jj] / hk1;
            }

            // Apply previous Givens rotations to the new column.
            double hk_next = hk1;
            for (int i = 0; i < k; ++i) {
                const double t = cs[static_cast<std::size_t>(i)] * h(i, k) +
                                 sn[static_cast<std::size_t>(i)] * h(i + 1, k);
                h(i + 1, k) = -sn[static_cast<std::size_t>(i)] * h(i, k) +
                              cs[static_cast<std::size_t>(i)] * h(i + 1, k);
                h(i, k) = t;
            }
            {
                const double a = h(k, k);
                const double b = hk_next;
                const double rho = std::hypot(a, b);
                cs[static_cast<std::size_t>(k)] = rho == 0.0 ? 1.0 : a / rho;
                sn[static_cast<std::size_t>(k)] = rho == 0.0 ? 0.0 : b / rho;
                h(k, k) = rho;
            }
            g[static_cast<std::size_t>(k + 1)] = -sn[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
            g[static_cast<std::size_t>(k)] = cs[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];

            const double est = std::abs(g[static_cast<std::size_t>(k + 1)]);
            if (est / beta0 <= options.tol_rel || lucky_breakdown) {
                ++k;
                break;
            }
        }

        if (k > 0) {
            // Back substitution for y, then x += M^{-1} (V y).
            std::vector<double> y(static_cast<std::size_t>(k), 0.0);
            for (int i = k - 1; i >= 0; --i) {
                double s = g[static_cast<std::size_t>(i)];
                for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[static_cast<std::size_t>(j)];
                y[static_cast<std::size_t>(i)] = s / h(i, i);
            }
            std::fill(w.begin(), w.end(), 0.0);
            for (int j = 0; j < k; ++j) {
                const auto& vj = V[static_cast<std::size_t>(j)];
                const double yj = y[static_cast<std::size_t>(j)];
                for (std::size_t jj = 0; jj < n; ++jj) w[jj] += yj * vj[jj];
            }
            precon(w, z);
            for (std::size_t jj = 0; jj < n; ++jj) result.x[jj] += z[jj];
        }

        // True residual decides convergence (right preconditioning keeps the
        // unpreconditioned residual observable).
        op(result.x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
        result.iterations = total_its;
        result.rel_residual = norm2(r) / beta0;
        if (result.rel_residual <= 1.05 * options.tol_rel) return result;

        if (lucky_breakdown)
            throw Breakdown("Arnoldi breakdown with unconverged residual " +
                            std::to_string(result.rel_residual));
        if (total_its >= options.max_it)
            throw MaxIterations("GMRES reached " + std::to_string(total_its) +
                                " iterations, residual " + std::to_string(result.rel_residual));
    }
}

GmresResult solve_block_system(const BlockSystem& system, const BlockPreconditioner& precon,
                               std::span<const double> rhs, const GmresOptions& options,
                               bool project_pressure) {
    const LinearOp op = [&](std::span<const double> x, std::span<double> y) {
        system.apply(x, y, options.n_threads);
    };
    const LinearOp pre = [&](std::span<const double> x, std::span<double> y) {
        precon.apply(x, y);
    };
    std::function<void(std::span<double>)> post;
    if (project_pressure)
        post = [&](std::span<double> v) { system.project_pressure_mean(v); };
    GmresResult result = gmres(op, rhs, pre, options, post);
    if (project_pressure) system.project_pressure_mean(result.x);
    return result;
}

} // namespace fsidlm
