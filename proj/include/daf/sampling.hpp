#pragma once

#include "daf/trace.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace daf {

class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::size_t iterations, double objective)
        : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                             ", objective=" + std::to_string(objective) + ")"),
          iterations_(iterations),
          objective_(objective) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double objective() const noexcept { return objective_; }

private:
    std::size_t iterations_;
    double objective_;
};

/// Window geometry shared by the analytics and optimizers. When the step is
/// larger than one frame everything runs on the downsampled trace, whose
/// "units" are groups of `step` frames; window and stable-range indices below
/// are all in units and 1-based.
struct WindowGeometry {
    VideoTrace units;        // downsampled trace
    std::size_t step = 1;    // frames per unit
    std::size_t window = 1;  // W' (units per window)

    std::size_t unit_count() const noexcept { return units.frame_count(); }
    std::size_t window_count() const noexcept { return unit_count() - window + 1; }
    std::size_t stable_first() const noexcept { return window; }
    std::size_t stable_last() const noexcept { return unit_count() - window + 1; }
    std::size_t stable_count() const noexcept { return stable_last() - stable_first() + 1; }
    /// w_W(t0): packets in the window starting at unit t0.
    std::uint64_t window_packets(std::size_t t0) const { return units.packets_in_range(t0, window); }
};

/// Builds the geometry for a window of `window_frames` frames sliding by
/// `step_frames`; both must divide into the trace as the optimizer requires.
WindowGeometry make_geometry(const VideoTrace& trace, std::size_t window_frames,
                             std::size_t step_frames);

/// Accumulated sampling probability per unit.
struct AspProfile {
    std::vector<double> value;  // P(u) for u = 1..T' (index u-1)
    std::size_t step = 1;
    std::size_t stable_first = 1;  // units
    std::size_t stable_last = 1;
    std::size_t windows = 0;

    /// P for original frame t.
    double at_frame(std::size_t frame) const { return value.at((frame - 1) / step); }
    double stable_mean() const;
    /// Sum over stable units of (P - mean)^2: the quantity both optimizers minimize.
    double objective() const;
    /// Population variance over the stable range after scaling the mean to 1.
    double normalized_variance() const;
    /// Profile scaled so the stable-range mean is 1.
    std::vector<double> normalized() const;
    /// sum_u s(u) P(u); equals the number of windows for any valid plan.
    double mass(const VideoTrace& units) const;
};

// ---- slope-only distributions ------------------------------------------------

/// Probability of sampling each unit of a window whose units hold
/// `unit_sizes` packets, under a linear density with slope factor a.
std::vector<double> slope_unit_probs(std::span<const std::uint32_t> unit_sizes, double slope);

/// Per-packet sampling probabilities (constant within each unit), in packet
/// order across the window. Sums to 1.
std::vector<double> slope_pdf(std::span<const std::uint32_t> unit_sizes, double slope);

/// Coefficients of the affine map a -> P_a = d1 a + d2.
struct SlopeCoefficients {
    Eigen::MatrixXd d1;  // units x windows
    Eigen::VectorXd d2;  // units
    std::size_t step = 1;
    std::size_t window = 1;
};

SlopeCoefficients slope_coeffs(const WindowGeometry& geo);
AspProfile asp_from_slopes(const SlopeCoefficients& coeffs, std::span<const double> slopes);

/// ASP by accumulating the per-packet probabilities of every window directly.
AspProfile asp_from_window_slopes(const WindowGeometry& geo, std::span<const double> slopes);

AspProfile uniform_asp(const WindowGeometry& geo);

// ---- per-frame plans --------------------------------------------------------

/// Row t0 holds the unit probabilities of the window starting at unit t0.
using SamplingMatrix = Eigen::MatrixXd;

SamplingMatrix uniform_matrix(const WindowGeometry& geo);
/// The per-frame matrix induced by a slope vector.
SamplingMatrix matrix_from_slopes(const WindowGeometry& geo, std::span<const double> slopes);
void check_sampling_matrix(const SamplingMatrix& A, double tol = 1e-9);
AspProfile asp_from_matrix(const SamplingMatrix& A, const WindowGeometry& geo);

// ---- optimizers -------------------------------------------------------------

struct PerFrameOptions {
    std::size_t max_iterations = 200000;
    double tolerance = 1e-13;
};

struct PerFrameResult {
    SamplingMatrix plan;
    AspProfile asp;
    double objective = 0;
    std::size_t iterations = 0;
};

/// Minimizes the stable-range ASP spread over row-stochastic matrices with a
/// primal active-set method on the nonnegativity bounds.
PerFrameResult optimize_per_frame(const WindowGeometry& geo, const PerFrameOptions& opts = {});

struct SlopeOptions {
    std::size_t max_sweeps = 100000;
    double tolerance = 1e-10;  // on the per-sweep objective decrease, relative to the start
};

struct SlopeResult {
    std::vector<double> slopes;
    AspProfile asp;
    double objective = 0;
    std::size_t sweeps = 0;
};

/// Box-constrained least squares over slope factors in [-1, 1] by projected
/// coordinate descent.
SlopeResult optimize_slopes(const WindowGeometry& geo, const SlopeOptions& opts = {});

}  // namespace daf
