#include "daf/sampling.hpp"

#include <cmath>
#include <numeric>

namespace daf {

WindowGeometry make_geometry(const VideoTrace& trace, std::size_t window_frames,
                             std::size_t step_frames) {
    if (step_frames < 1) throw SamplingError("step must be >= 1 frame");
    if (window_frames < step_frames || window_frames % step_frames != 0)
        throw SamplingError("window must be a positive multiple of the step");
    if (window_frames > trace.frame_count()) throw SamplingError("window longer than the trace");
    WindowGeometry geo{downsample(trace, static_cast<std::uint32_t>(step_frames)), step_frames,
                       window_frames / step_frames};
    return geo;
}

double AspProfile::stable_mean() const {
    double sum = 0;
    for (std::size_t u = stable_first; u <= stable_last; ++u) sum += value[u - 1];
    return sum / static_cast<double>(stable_last - stable_first + 1);
}

double AspProfile::objective() const {
    const double mean = stable_mean();
    double acc = 0;
    for (std::size_t u = stable_first; u <= stable_last; ++u) {
        const double d = value[u - 1] - mean;
        acc += d * d;
    }
    return acc;
}

double AspProfile::normalized_variance() const {
    const double mean = stable_mean();
    return objective() / (mean * mean) / static_cast<double>(stable_last - stable_first + 1);
}

std::vector<double> AspProfile::normalized() const {
    const double mean = stable_mean();
    std::vector<double> out(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) out[i] = value[i] / mean;
    return out;
}

double AspProfile::mass(const VideoTrace& units) const {
    if (units.frame_count() != value.size()) throw SamplingError("profile/trace size mismatch");
    double m = 0;
    for (std::size_t u = 1; u <= value.size(); ++u) m += units.packets_in(u) * value[u - 1];
    return m;
}

namespace {

void check_slope(double a) {
    if (!(a >= -1.0 && a <= 1.0)) throw SamplingError("slope factor must lie in [-1, 1]");
}

AspProfile empty_profile(const WindowGeometry& geo) {
    AspProfile asp;
    asp.value.assign(geo.unit_count(), 0.0);
    asp.step = geo.step;
    asp.stable_first = geo.stable_first();
    asp.stable_last = geo.stable_last();
    asp.windows = geo.window_count();
    return asp;
}

std::span<const std::uint32_t> window_units(const WindowGeometry& geo, std::size_t t0) {
    return std::span<const std::uint32_t>(geo.units.packets_per_frame()).subspan(t0 - 1, geo.window);
}

}  // namespace

std::vector<double> slope_unit_probs(std::span<const std::uint32_t> unit_sizes, double slope) {
    check_slope(slope);
    if (unit_sizes.empty()) throw SamplingError("window has no units");
    const double w = std::accumulate(unit_sizes.begin(), unit_sizes.end(), 0.0);
    std::vector<double> out(unit_sizes.size());
    double pkt = 0;
    for (std::size_t i = 0; i < unit_sizes.size(); ++i) {
        const double s = unit_sizes[i];
        pkt += s;
        out[i] = (2.0 * slope / (w * w) * (pkt - s / 2.0) + (1.0 - slope) / w) * s;
    }
    return out;
}

std::vector<double> slope_pdf(std::span<const std::uint32_t> unit_sizes, double slope) {
    check_slope(slope);
    if (unit_sizes.empty()) throw SamplingError("window has no units");
    const double w = std::accumulate(unit_sizes.begin(), unit_sizes.end(), 0.0);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(w));
    double pkt = 0;
    for (auto s_int : unit_sizes) {
        const double s = s_int;
        pkt += s;
        const double p = 2.0 * slope / (w * w) * (pkt - s / 2.0) + (1.0 - slope) / w;
        out.insert(out.end(), s_int, p);
    }
    return out;
}

SlopeCoefficients slope_coeffs(const WindowGeometry& geo) {
    const std::size_t T = geo.unit_count();
    const std::size_t n = geo.window_count();
    const std::size_t W = geo.window;
    SlopeCoefficients c;
    c.d1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n));
    c.d2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(T));
    c.step = geo.step;
    c.window = W;
    for (std::size_t t = 1; t <= T; ++t) {
        const double s = geo.units.packets_in(t);
        const std::size_t lo = t >= W ? t - W + 1 : 1;
        const std::size_t hi = std::min(t, n);
        for (std::size_t i = lo; i <= hi; ++i) {
            const double w = static_cast<double>(geo.window_packets(i));
            const double pkt = static_cast<double>(geo.units.packets_in_range(i, t - i + 1));
            c.d1(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(i - 1)) =
                (2.0 * pkt - s) / (w * w) - 1.0 / w;
            c.d2(static_cast<Eigen::Index>(t - 1)) += 1.0 / w;
        }
    }
    return c;
}

AspProfile asp_from_slopes(const SlopeCoefficients& coeffs, std::span<const double> slopes) {
    if (static_cast<Eigen::Index>(slopes.size()) != coeffs.d1.cols())
        throw SamplingError("slope vector length does not match the window count");
    for (double a : slopes) check_slope(a);
    const Eigen::Map<const Eigen::VectorXd> a(slopes.data(), static_cast<Eigen::Index>(slopes.size()));
    const Eigen::VectorXd p = coeffs.d1 * a + coeffs.d2;
    AspProfile asp;
    asp.value.assign(p.data(), p.data() + p.size());
    asp.step = coeffs.step;
    asp.stable_first = coeffs.window;
    asp.stable_last = static_cast<std::size_t>(p.size()) - coeffs.window + 1;
    asp.windows = slopes.size();
    return asp;
}

AspProfile asp_from_window_slopes(const WindowGeometry& geo, std::span<const double> slopes) {
    if (slopes.size() != geo.window_count())
        throw SamplingError("slope vector length does not match the window count");
    AspProfile asp = empty_profile(geo);
    for (std::size_t t0 = 1; t0 <= geo.window_count(); ++t0) {
        const auto units = window_units(geo, t0);
        const auto pdf = slope_pdf(units, slopes[t0 - 1]);
        std::size_t pos = 0;
        for (std::size_t j = 0; j < units.size(); ++j) {
            double sum = 0;
            for (std::uint32_t q = 0; q < units[j]; ++q) sum += pdf[pos++];
            asp.value[t0 - 1 + j] += sum / units[j];
        }
    }
    return asp;
}

AspProfile uniform_asp(const WindowGeometry& geo) {
    const std::vector<double> zeros(geo.window_count(), 0.0);
    return asp_from_window_slopes(geo, zeros);
}

SamplingMatrix uniform_matrix(const WindowGeometry& geo) {
    return SamplingMatrix::Constant(static_cast<Eigen::Index>(geo.window_count()),
                                    static_cast<Eigen::Index>(geo.window),
                                    1.0 / static_cast<double>(geo.window));
}

SamplingMatrix matrix_from_slopes(const WindowGeometry& geo, std::span<const double> slopes) {
    if (slopes.size() != geo.window_count())
        throw SamplingError("slope vector length does not match the window count");
    SamplingMatrix A(static_cast<Eigen::Index>(geo.window_count()), static_cast<Eigen::Index>(geo.window));
    for (std::size_t t0 = 1; t0 <= geo.window_count(); ++t0) {
        const auto row = slope_unit_probs(window_units(geo, t0), slopes[t0 - 1]);
        for (std::size_t j = 0; j < row.size(); ++j)
            A(static_cast<Eigen::Index>(t0 - 1), static_cast<Eigen::Index>(j)) = row[j];
    }
    return A;
}

void check_sampling_matrix(const SamplingMatrix& A, double tol) {
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        if (std::abs(A.row(r).sum() - 1.0) > tol)
            throw SamplingError("row " + std::to_string(r + 1) + " does not sum to 1");
        if (A.row(r).minCoeff() < 0.0)
            throw SamplingError("row " + std::to_string(r + 1) + " has a negative entry");
    }
}

AspProfile asp_from_matrix(const SamplingMatrix& A, const WindowGeometry& geo) {
    if (static_cast<std::size_t>(A.rows()) != geo.window_count() ||
        static_cast<std::size_t>(A.cols()) != geo.window)
        throw SamplingError("sampling matrix is " + std::to_string(A.rows()) + "x" +
                            std::to_string(A.cols()) + ", expected " +
                            std::to_string(geo.window_count()) + "x" + std::to_string(geo.window));
    AspProfile asp = empty_profile(geo);
    for (std::size_t t0 = 1; t0 <= geo.window_count(); ++t0)
        for (std::size_t j = 0; j < geo.window; ++j)
            asp.value[t0 - 1 + j] += A(static_cast<Eigen::Index>(t0 - 1), static_cast<Eigen::Index>(j));
    for (std::size_t u = 1; u <= geo.unit_count(); ++u) asp.value[u - 1] /= geo.units.packets_in(u);
    return asp;
}

}  // namespace daf
