#include "daf/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace daf {

SlopeResult optimize_slopes(const WindowGeometry& geo, const SlopeOptions& opts) {
    const std::size_t T = geo.unit_count();
    const std::size_t W = geo.window;
    if (T < 2 * W)
        throw SamplingError("slope optimization needs at least 2W frames (" + std::to_string(T) +
                            " units for W=" + std::to_string(W) + ")");
    const SlopeCoefficients coeffs = slope_coeffs(geo);
    const auto n = static_cast<Eigen::Index>(geo.window_count());
    const auto first = static_cast<Eigen::Index>(geo.stable_first() - 1);
    const auto m = static_cast<Eigen::Index>(geo.stable_count());

    // Centred stable rows: objective(a) = ||D a + c||^2.
    Eigen::MatrixXd D = coeffs.d1.middleRows(first, m);
    Eigen::VectorXd c = coeffs.d2.segment(first, m);
    const double level = c.mean();
    D.rowwise() -= D.colwise().mean();
    c.array() -= c.mean();

    const Eigen::MatrixXd Q = D.transpose() * D;
    const Eigen::VectorXd b = D.transpose() * c;
    auto objective = [&](const Eigen::VectorXd& a) { return (D * a + c).squaredNorm(); };

    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = b;  // half-gradient Q a + b
    const double f0 = objective(a);
    double f = f0;
    std::size_t sweeps = 0;
    // Already flat up to rounding: keep a = 0 rather than chase noise.
    const double noise = 1e-14 * level;
    if (f0 <= static_cast<double>(m) * noise * noise) f = 0.0;

    auto descend = [&]() {
        while (true) {
            if (f <= 0.0) return;
            if (sweeps >= opts.max_sweeps)
                throw SolverError("slope coordinate descent did not converge", sweeps, f);
            ++sweeps;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double q = Q(j, j);
                if (q <= 0.0) continue;
                const double target = std::clamp(a(j) - grad(j) / q, -1.0, 1.0);
                const double delta = target - a(j);
                if (delta == 0.0) continue;
                a(j) = target;
                grad.noalias() += delta * Q.col(j);
            }
            const double next = objective(a);
            const double drop = f - next;
            f = next;
            if (drop <= opts.tolerance * f0) return;
        }
    };

    descend();
    // Newton polish on the coordinates strictly inside the box; kept only if
    // it stays feasible and does not raise the objective.
    for (int round = 0; round < 4 && f > 0.0; ++round) {
        std::vector<Eigen::Index> inner;
        for (Eigen::Index j = 0; j < n; ++j)
            if (std::abs(a(j)) < 1.0) inner.push_back(j);
        if (inner.empty()) break;
        const auto k = static_cast<Eigen::Index>(inner.size());
        Eigen::MatrixXd Qff(k, k);
        Eigen::VectorXd gf(k);
        for (Eigen::Index r = 0; r < k; ++r) {
            gf(r) = grad(inner[static_cast<std::size_t>(r)]);
            for (Eigen::Index s = 0; s < k; ++s)
                Qff(r, s) = Q(inner[static_cast<std::size_t>(r)], inner[static_cast<std::size_t>(s)]);
        }
        const Eigen::VectorXd step = Qff.completeOrthogonalDecomposition().solve(-gf);
        Eigen::VectorXd cand = a;
        bool feasible = true;
        for (Eigen::Index r = 0; r < k; ++r) {
            double& v = cand(inner[static_cast<std::size_t>(r)]);
            v += step(r);
            if (std::abs(v) > 1.0) feasible = false;
        }
        if (!feasible) break;
        const double fc = objective(cand);
        if (!(fc <= f)) break;
        const bool moved = (cand - a).lpNorm<Eigen::Infinity>() > 0.0;
        a = cand;
        grad = Q * a + b;
        f = fc;
        if (!moved) break;
        descend();
    }

    SlopeResult out;
    out.slopes.assign(a.data(), a.data() + a.size());
    out.asp = asp_from_slopes(coeffs, out.slopes);
    out.objective = out.asp.objective();
    out.sweeps = sweeps;
    return out;
}

}  // namespace daf
