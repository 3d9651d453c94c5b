#include "daf/sampling.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using daf::VideoTrace;

namespace {

VideoTrace from_counts(std::vector<std::uint32_t> s) {
    return VideoTrace::from_packet_counts(std::move(s), 30.0, 1, 1024);
}

std::vector<std::uint32_t> random_sizes(std::mt19937_64& rng, std::size_t n, std::uint32_t max) {
    std::vector<std::uint32_t> s(n);
    for (auto& v : s) v = 1 + static_cast<std::uint32_t>(rng() % max);
    return s;
}

std::vector<double> random_slopes(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(n);
    for (auto& v : a) v = u(rng);
    return a;
}

}  // namespace

TEST_CASE("slope pdf special cases") {
    const std::vector<std::uint32_t> ones{1, 1, 1, 1};
    const auto up = daf::slope_pdf(ones, 1.0);
    const double expected[] = {1.0 / 16, 3.0 / 16, 5.0 / 16, 7.0 / 16};
    for (int i = 0; i < 4; ++i) CHECK(up[i] == doctest::Approx(expected[i]).epsilon(1e-14));
    const auto down = daf::slope_pdf(ones, -1.0);
    for (int i = 0; i < 4; ++i) CHECK(down[i] == doctest::Approx(up[3 - i]).epsilon(1e-14));

    const std::vector<std::uint32_t> mixed{3, 1, 5};
    for (double p : daf::slope_pdf(mixed, 0.0)) CHECK(p == doctest::Approx(1.0 / 9));

    CHECK_THROWS_AS(daf::slope_pdf(ones, 1.01), daf::SamplingError);
    CHECK_THROWS_AS(daf::slope_pdf(ones, -1.5), daf::SamplingError);
}

TEST_CASE("slope pdf is a distribution for any window and slope") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const auto s = random_sizes(rng, 1 + rng() % 12, 9);
        const double a = random_slopes(rng, 1)[0];
        const auto pdf = daf::slope_pdf(s, trial % 50 == 0 ? 1.0 : a);
        CHECK(pdf.size() == std::accumulate(s.begin(), s.end(), std::size_t{0}));
        CHECK(std::accumulate(pdf.begin(), pdf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        for (double p : pdf) CHECK(p >= 0.0);
        // constant within each frame and equal to the oracle's per-packet value
        std::size_t pos = 0;
        for (std::size_t i = 1; i <= s.size(); ++i)
            for (std::uint32_t j = 0; j < s[i - 1]; ++j, ++pos)
                CHECK(pdf[pos] == doctest::Approx(oracle::slope_packet_prob(s, 1, s.size(), i, trial % 50 == 0 ? 1.0 : a))
                                      .epsilon(1e-12));
    }
}

TEST_CASE("uniform plans give 1/s") {
    const auto c = daf::synthetic::constant(40, 3 * 1024, 30.0, 1024);
    const auto geo = daf::make_geometry(c, 5, 1);
    const auto asp = daf::asp_from_matrix(daf::uniform_matrix(geo), geo);
    for (std::size_t t = geo.stable_first(); t <= geo.stable_last(); ++t)
        CHECK(asp.value[t - 1] == doctest::Approx(1.0 / 3));

    const auto t = from_counts({2, 5, 1, 3});
    const auto g1 = daf::make_geometry(t, 1, 1);
    const auto a1 = daf::asp_from_matrix(daf::uniform_matrix(g1), g1);
    CHECK(a1.value == std::vector<double>{0.5, 0.2, 1.0, 1.0 / 3});

    CHECK_THROWS_AS(daf::asp_from_matrix(Eigen::MatrixXd::Constant(2, 2, 0.5), g1), daf::SamplingError);
}

TEST_CASE("slope coefficients for unit frames and W = 2") {
    const auto t = from_counts(std::vector<std::uint32_t>(6, 1));
    const auto geo = daf::make_geometry(t, 2, 1);
    const auto co = daf::slope_coeffs(geo);
    REQUIRE(co.d1.rows() == 6);
    REQUIRE(co.d1.cols() == 5);
    for (Eigen::Index w = 0; w < 5; ++w) {
        for (Eigen::Index u = 0; u < 6; ++u) {
            double want = 0;
            if (u == w) want = -0.25;
            if (u == w + 1) want = 0.25;
            CHECK(co.d1(u, w) == doctest::Approx(want).epsilon(1e-15));
        }
    }
    const auto d2 = daf::asp_from_slopes(co, std::vector<double>(5, 0.0));
    const auto uni = daf::uniform_asp(geo);
    for (std::size_t u = 0; u < 6; ++u) CHECK(d2.value[u] == doctest::Approx(uni.value[u]).epsilon(1e-14));
}

TEST_CASE("a single slope only moves its own window") {
    std::mt19937_64 rng(5);
    const auto t = from_counts(random_sizes(rng, 30, 6));
    const auto geo = daf::make_geometry(t, 4, 1);
    const auto co = daf::slope_coeffs(geo);
    const auto base = daf::asp_from_slopes(co, std::vector<double>(geo.window_count(), 0.0));
    std::vector<double> a(geo.window_count(), 0.0);
    a[9] = 0.7;  // window starting at frame 10
    const auto moved = daf::asp_from_slopes(co, a);
    for (std::size_t u = 1; u <= 30; ++u) {
        if (u >= 10 && u <= 13) continue;
        CHECK(moved.value[u - 1] == base.value[u - 1]);
    }
}

TEST_CASE("affine form matches direct accumulation and the oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t W = 1 + rng() % 6;
        const auto s = random_sizes(rng, 2 * W + rng() % 20, 8);
        const auto t = from_counts(s);
        const auto geo = daf::make_geometry(t, W, 1);
        const auto a = random_slopes(rng, geo.window_count());
        const auto affine = daf::asp_from_slopes(daf::slope_coeffs(geo), a);
        const auto direct = daf::asp_from_window_slopes(geo, a);
        const auto ref = oracle::slope_asp(s, W, a);
        for (std::size_t u = 0; u < s.size(); ++u) {
            CHECK(std::abs(affine.value[u] - direct.value[u]) <= 1e-12);
            CHECK(std::abs(affine.value[u] - ref[u]) <= 1e-12);
        }
    }
}

TEST_CASE("slope matrix reproduces the slope ASP") {
    std::mt19937_64 rng(19);
    const auto t = from_counts(random_sizes(rng, 40, 7));
    const auto geo = daf::make_geometry(t, 5, 1);
    const auto a = random_slopes(rng, geo.window_count());
    const auto A = daf::matrix_from_slopes(geo, a);
    daf::check_sampling_matrix(A);
    const auto via_matrix = daf::asp_from_matrix(A, geo);
    const auto via_slopes = daf::asp_from_window_slopes(geo, a);
    for (std::size_t u = 0; u < 40; ++u) CHECK(via_matrix.value[u] == doctest::Approx(via_slopes.value[u]).epsilon(1e-12));
}

TEST_CASE("sampling matrix validation") {
    Eigen::MatrixXd A(2, 2);
    A << 0.5, 0.5, 0.7, 0.4;
    CHECK_THROWS_AS(daf::check_sampling_matrix(A), daf::SamplingError);
    A << 0.5, 0.5, 1.1, -0.1;
    CHECK_THROWS_AS(daf::check_sampling_matrix(A), daf::SamplingError);
    A << 0.5, 0.5, 1.0, 0.0;
    CHECK_NOTHROW(daf::check_sampling_matrix(A));
}

TEST_CASE("mass conservation for every plan") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t step = 1 + rng() % 3;
        const std::size_t W = step * (1 + rng() % 4);
        const std::size_t T = step * (2 * W / step + rng() % 15);
        const auto t = from_counts(random_sizes(rng, T, 9));
        const auto geo = daf::make_geometry(t, W, step);
        const double windows = static_cast<double>(geo.window_count());
        CHECK(daf::uniform_asp(geo).mass(geo.units) == doctest::Approx(windows).epsilon(1e-12));
        const auto a = random_slopes(rng, geo.window_count());
        CHECK(daf::asp_from_window_slopes(geo, a).mass(geo.units) == doctest::Approx(windows).epsilon(1e-12));
        CHECK(daf::optimize_slopes(geo).asp.mass(geo.units) == doctest::Approx(windows).epsilon(1e-12));
        CHECK(daf::optimize_per_frame(geo).asp.mass(geo.units) == doctest::Approx(windows).epsilon(1e-12));
    }
}

TEST_CASE("flat traces need no reshaping") {
    const auto t = daf::synthetic::constant(60, 4096, 30.0, 1024);
    const auto geo = daf::make_geometry(t, 10, 1);
    const auto pf = daf::optimize_per_frame(geo);
    CHECK(pf.objective <= 1e-20);
    const auto sl = daf::optimize_slopes(geo);
    CHECK(sl.objective <= 1e-20);
    for (double a : sl.slopes) CHECK(a == 0.0);
}

TEST_CASE("per-frame optimum on a small alternating trace") {
    const oracle::Sizes s{1, 2, 1, 2, 1, 2};
    const auto geo = daf::make_geometry(from_counts(s), 2, 1);
    const auto r = daf::optimize_per_frame(geo);
    daf::check_sampling_matrix(r.plan);
    CHECK(std::abs(r.objective - oracle::per_frame_optimum(s, 2)) <= 1e-6);
    CHECK(r.objective <= daf::asp_from_matrix(daf::uniform_matrix(geo), geo).objective());
    // the reported objective is the objective of the returned plan
    CHECK(r.objective == doctest::Approx(daf::asp_from_matrix(r.plan, geo).objective()).epsilon(1e-9));
}

TEST_CASE("slope optimum on a small burst trace") {
    const oracle::Sizes s{1, 1, 4, 4, 1, 1, 4, 4};
    const auto geo = daf::make_geometry(from_counts(s), 2, 1);
    const auto r = daf::optimize_slopes(geo);
    CHECK(std::abs(r.objective - oracle::slope_optimum(s, 2)) <= 1e-6);
    for (double a : r.slopes) {
        CHECK(a >= -1.0);
        CHECK(a <= 1.0);
    }
}

TEST_CASE("objective ordering per-frame <= slope <= uniform") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t W = 2 + rng() % 5;
        const auto t = from_counts(random_sizes(rng, 2 * W + rng() % 25, 10));
        const auto geo = daf::make_geometry(t, W, 1);
        const double pf = daf::optimize_per_frame(geo).objective;
        const double sl = daf::optimize_slopes(geo).objective;
        const double un = daf::uniform_asp(geo).objective();
        CHECK(pf <= sl + 1e-12);
        CHECK(sl <= un + 1e-15);
    }
}

TEST_CASE("slopes lean toward upcoming bit-rate rises") {
    const auto t = daf::synthetic::burst(300, 4096, 16384, 60, 20, 30.0, 1024);
    const auto geo = daf::make_geometry(t, 20, 5);
    const auto r = daf::optimize_slopes(geo);
    // windows whose later half carries more packets than the earlier half
    double rising = 0, falling = 0;
    int n_rising = 0, n_falling = 0;
    for (std::size_t w = 1; w <= geo.window_count(); ++w) {
        const auto half = geo.window / 2;
        const auto early = geo.units.packets_in_range(w, half);
        const auto late = geo.units.packets_in_range(w + half, geo.window - half);
        if (late > early) rising += r.slopes[w - 1], ++n_rising;
        if (early > late) falling += r.slopes[w - 1], ++n_falling;
    }
    REQUIRE(n_rising > 0);
    REQUIRE(n_falling > 0);
    CHECK(rising / n_rising > 0.0);
    CHECK(falling / n_falling < 0.0);
}

TEST_CASE("fluctuating trace variance ordering") {
    const auto t = daf::synthetic::foreman_like(300, 30.0, 1024);
    const auto geo = daf::make_geometry(t, 20, 5);
    const double uni = daf::uniform_asp(geo).normalized_variance();
    const double sl = daf::optimize_slopes(geo).asp.normalized_variance();
    const double pf = daf::optimize_per_frame(geo).asp.normalized_variance();
    CHECK(pf < uni);
    CHECK(pf <= sl);
    CHECK(sl <= uni);
}

TEST_CASE("optimizers are deterministic") {
    const auto t = daf::synthetic::foreman_like(300, 30.0, 1024);
    const auto geo = daf::make_geometry(t, 20, 5);
    const auto a = daf::optimize_slopes(geo);
    const auto b = daf::optimize_slopes(geo);
    CHECK(a.slopes == b.slopes);
    const auto p = daf::optimize_per_frame(geo);
    const auto q = daf::optimize_per_frame(geo);
    CHECK(p.plan == q.plan);
    CHECK(p.objective == q.objective);
}

TEST_CASE("optimizers need a stable range") {
    const auto t = from_counts({1, 2, 3, 4, 5});
    const auto geo = daf::make_geometry(t, 3, 1);
    CHECK_THROWS_AS(daf::optimize_per_frame(geo), daf::SamplingError);
    CHECK_THROWS_AS(daf::optimize_slopes(geo), daf::SamplingError);
    CHECK_THROWS_AS(daf::make_geometry(t, 3, 2), daf::SamplingError);
}

TEST_CASE("per-frame solver reports non-convergence") {
    std::mt19937_64 rng(31);
    const auto t = from_counts(random_sizes(rng, 40, 9));
    const auto geo = daf::make_geometry(t, 6, 1);
    daf::PerFrameOptions opts;
    opts.max_iterations = 1;
    CHECK_THROWS_AS(daf::optimize_per_frame(geo, opts), daf::SolverError);
}
