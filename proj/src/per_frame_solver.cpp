#include "daf/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace daf {

namespace {

// B maps the flattened plan x (row-major, window t0 then unit offset) to the
// centred stable-range ASP, so the objective is ||B x||^2.
Eigen::MatrixXd centred_stable_map(const WindowGeometry& geo) {
    const std::size_t W = geo.window;
    const std::size_t first = geo.stable_first();
    const std::size_t m = geo.stable_count();
    const auto vars = static_cast<Eigen::Index>(geo.window_count() * W);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), vars);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t u = first + r;
        const double inv_s = 1.0 / geo.units.packets_in(u);
        // every window t0 in [u-W+1, u] covers unit u at offset u-t0
        for (std::size_t t0 = u - W + 1; t0 <= u; ++t0)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>((t0 - 1) * W + (u - t0))) = inv_s;
    }
    const Eigen::RowVectorXd mean = M.colwise().mean();
    M.rowwise() -= mean;
    return M;
}

}  // namespace

PerFrameResult optimize_per_frame(const WindowGeometry& geo, const PerFrameOptions& opts) {
    const std::size_t T = geo.unit_count();
    const std::size_t W = geo.window;
    if (T < 2 * W)
        throw SamplingError("per-frame optimization needs at least 2W frames (" + std::to_string(T) +
                            " units for W=" + std::to_string(W) + ")");
    const std::size_t n = geo.window_count();
    const auto V = static_cast<Eigen::Index>(n * W);
    const Eigen::MatrixXd B = centred_stable_map(geo);

    Eigen::VectorXd x = Eigen::VectorXd::Constant(V, 1.0 / static_cast<double>(W));
    std::vector<bool> free(static_cast<std::size_t>(V), true);

    auto objective = [&](const Eigen::VectorXd& v) { return (B * v).squaredNorm(); };

    std::size_t it = 0;
    for (;; ++it) {
        if (it >= opts.max_iterations)
            throw SolverError("per-frame active-set solver did not converge", it, objective(x));

        const Eigen::VectorXd r = B * x;

        // Null-space basis of the row-sum constraints restricted to the free
        // set: e_f - e_pivot for every free f after the row's first free pivot.
        std::vector<std::pair<Eigen::Index, Eigen::Index>> basis;
        for (std::size_t row = 0; row < n; ++row) {
            Eigen::Index pivot = -1;
            for (std::size_t j = 0; j < W; ++j) {
                const auto v = static_cast<Eigen::Index>(row * W + j);
                if (!free[static_cast<std::size_t>(v)]) continue;
                if (pivot < 0) pivot = v;
                else basis.emplace_back(v, pivot);
            }
        }

        Eigen::VectorXd p = Eigen::VectorXd::Zero(V);
        if (!basis.empty()) {
            Eigen::MatrixXd BZ(B.rows(), static_cast<Eigen::Index>(basis.size()));
            for (std::size_t c = 0; c < basis.size(); ++c)
                BZ.col(static_cast<Eigen::Index>(c)) = B.col(basis[c].first) - B.col(basis[c].second);
            const Eigen::VectorXd z = BZ.completeOrthogonalDecomposition().solve(-r);
            for (std::size_t c = 0; c < basis.size(); ++c) {
                p(basis[c].first) += z(static_cast<Eigen::Index>(c));
                p(basis[c].second) -= z(static_cast<Eigen::Index>(c));
            }
        }

        const double step_norm = p.lpNorm<Eigen::Infinity>();
        if (step_norm <= 1e-12) {
            // Stationary on the current face: check the bound multipliers.
            const Eigen::VectorXd g = 2.0 * (B.transpose() * r);
            const double gscale = g.lpNorm<Eigen::Infinity>();
            const double mu_tol = opts.tolerance + 1e-9 * gscale;
            Eigen::Index release = -1;
            double most_negative = -mu_tol;
            for (std::size_t row = 0; row < n; ++row) {
                double free_sum = 0;
                int free_cnt = 0;
                for (std::size_t j = 0; j < W; ++j) {
                    const auto v = static_cast<std::size_t>(row * W + j);
                    if (free[v]) {
                        free_sum += g(static_cast<Eigen::Index>(v));
                        ++free_cnt;
                    }
                }
                const double lambda = -free_sum / free_cnt;
                for (std::size_t j = 0; j < W; ++j) {
                    const auto v = static_cast<std::size_t>(row * W + j);
                    if (free[v]) continue;
                    const double mu = g(static_cast<Eigen::Index>(v)) + lambda;
                    if (mu < most_negative) {
                        most_negative = mu;
                        release = static_cast<Eigen::Index>(v);
                    }
                }
            }
            if (release < 0) break;
            free[static_cast<std::size_t>(release)] = true;
            continue;
        }

        double alpha = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index v = 0; v < V; ++v) {
            if (!free[static_cast<std::size_t>(v)] || p(v) >= 0) continue;
            const double ratio = x(v) / -p(v);
            if (ratio < alpha) {
                alpha = ratio;
                blocking = v;
            }
        }
        x += alpha * p;
        if (blocking >= 0) {
            x(blocking) = 0.0;
            free[static_cast<std::size_t>(blocking)] = false;
        }
        for (Eigen::Index v = 0; v < V; ++v) {
            if (free[static_cast<std::size_t>(v)] && x(v) < 0.0) {
                x(v) = 0.0;
                free[static_cast<std::size_t>(v)] = false;
            }
        }
    }

    PerFrameResult out;
    out.plan.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(W));
    for (std::size_t row = 0; row < n; ++row) {
        double sum = 0;
        for (std::size_t j = 0; j < W; ++j) sum += x(static_cast<Eigen::Index>(row * W + j));
        for (std::size_t j = 0; j < W; ++j)
            out.plan(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
                x(static_cast<Eigen::Index>(row * W + j)) / sum;
    }
    out.asp = asp_from_matrix(out.plan, geo);
    out.objective = out.asp.objective();
    out.iterations = it;
    return out;
}

}  // namespace daf
