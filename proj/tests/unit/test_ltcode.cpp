#include "daf/ltcode.hpp"
#include "daf/protocol.hpp"
#include "daf/sampling.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

using daf::CodedPacketMeta;
using daf::DecoderState;
using daf::WindowRef;

namespace {

std::vector<double> uniform_cdf(std::uint32_t w) {
    return daf::cumulative(std::vector<double>(w, 1.0 / w));
}

CodedPacketMeta meta_of(std::vector<std::uint64_t> neighbors) {
    static std::uint32_t next_id = 1;
    CodedPacketMeta m;
    m.packet_id = next_id++;
    m.degree = static_cast<std::uint32_t>(neighbors.size());
    m.neighbors = std::move(neighbors);
    return m;
}

std::vector<std::uint8_t> random_bytes(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng());
    return out;
}

/// Plain LT experiment with its own generator: N coded packets over k natives,
/// degrees from the oracle pmf, uniform distinct neighbors, then repeated
/// peeling passes. True if every native is recovered.
bool oracle_lt_trial(std::uint32_t k, std::uint32_t n, const std::vector<double>& pmf, std::mt19937_64& rng) {
    std::discrete_distribution<std::uint32_t> degree(pmf.begin(), pmf.end());
    std::vector<std::vector<std::uint32_t>> coded(n);
    std::vector<std::uint32_t> all(k);
    std::iota(all.begin(), all.end(), 0u);
    for (auto& c : coded) {
        const std::uint32_t d = degree(rng) + 1;
        std::shuffle(all.begin(), all.end(), rng);
        c.assign(all.begin(), all.begin() + d);
    }
    std::vector<bool> known(k, false);
    bool progress = true;
    while (progress) {
        progress = false;
        for (const auto& c : coded) {
            std::uint32_t unknown = 0, which = 0;
            for (auto v : c)
                if (!known[v]) ++unknown, which = v;
            if (unknown == 1) {
                known[which] = true;
                progress = true;
            }
        }
    }
    return std::all_of(known.begin(), known.end(), [](bool b) { return b; });
}

}  // namespace

TEST_CASE("robust soliton: single packet") {
    const auto d = daf::robust_soliton(1);
    CHECK(d.probability(1) == doctest::Approx(1.0));
    CHECK(d.sample(0.0) == 1);
    CHECK(d.sample(0.999999) == 1);
    CHECK(d.mean() == doctest::Approx(1.0));
}

TEST_CASE("robust soliton matches an independent construction") {
    for (std::uint32_t k : {2u, 10u, 57u, 232u, 1000u}) {
        for (double c : {0.03, 0.1, 0.4}) {
            const auto d = daf::robust_soliton(k, c, 0.02);
            const auto want = oracle::robust_soliton(k, c, 0.02);
            double sum = 0;
            for (std::uint32_t i = 1; i <= k; ++i) {
                CHECK(d.probability(i) == doctest::Approx(want[i - 1]).epsilon(1e-12));
                sum += d.probability(i);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("robust soliton k=10: normalization constant and spike") {
    const double k = 10, c = 0.4, delta = 0.02;
    const double S = c * std::log(k / delta) * std::sqrt(k);
    const int spike = static_cast<int>(std::ceil(k / S));
    // beta by direct summation of rho + tau
    double beta = 1.0 / k;
    for (int d = 2; d <= 10; ++d) beta += 1.0 / (d * (d - 1.0));
    for (int d = 1; d < spike; ++d) beta += S / (d * k);
    beta += S * std::log(S / delta) / k;

    const auto dist = daf::robust_soliton(10, c, delta);
    CHECK(dist.spike() == spike);
    CHECK(dist.beta() == doctest::Approx(beta).epsilon(1e-12));
    const double rho_spike = spike == 1 ? 1.0 / k : 1.0 / (spike * (spike - 1.0));
    CHECK(dist.probability(spike) ==
          doctest::Approx((rho_spike + S * std::log(S / delta) / k) / beta).epsilon(1e-12));
    // the spike dominates its neighbours
    if (spike < 10) CHECK(dist.probability(spike) > dist.probability(spike + 1));
}

TEST_CASE("robust soliton mean degree grows like log(k/delta)") {
    std::vector<double> ratio;
    double prev = 0;
    for (std::uint32_t k : {10u, 100u, 1000u}) {
        const auto d = daf::robust_soliton(k);
        double mean = 0;
        const auto want = oracle::robust_soliton(k, 0.03, 0.02);
        for (std::uint32_t i = 1; i <= k; ++i) mean += i * want[i - 1];
        CHECK(d.mean() == doctest::Approx(mean).epsilon(1e-12));
        CHECK(d.mean() > prev);
        prev = d.mean();
        ratio.push_back(d.mean() / std::log(k / 0.02));
    }
    // mean / ln(k/delta) stays within a constant band over two decades of k
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    CHECK(*hi / *lo < 2.0);
}

TEST_CASE("robust soliton rejects invalid parameters") {
    CHECK_THROWS_AS(daf::robust_soliton(0), daf::CodingError);
    CHECK_THROWS_AS(daf::robust_soliton(10, 0.0, 0.02), daf::CodingError);
    CHECK_THROWS_AS(daf::robust_soliton(10, 0.1, 0.0), daf::CodingError);
    CHECK_THROWS_AS(daf::robust_soliton(10, 0.1, 1.0), daf::CodingError);
}

TEST_CASE("inverse CDF sampling follows the pmf") {
    const auto d = daf::robust_soliton(40);
    double acc = 0;
    for (std::uint32_t i = 1; i <= 40; ++i) {
        const double before = acc;
        acc += d.probability(i);
        if (d.probability(i) > 1e-9) {
            CHECK(d.sample(before + 0.5 * d.probability(i)) == i);
        }
    }
}

TEST_CASE("degree cache builds one table per size") {
    daf::DegreeCache cache;
    const auto& a = cache.get(12);
    const auto& b = cache.get(12);
    CHECK(&a == &b);
    CHECK(cache.get(13).k() == 13);
}

TEST_CASE("draw is a function of packet id and window only") {
    const WindowRef win{101, 30, 0.0f};
    const auto cdf = uniform_cdf(30);
    daf::DegreeCache c1, c2;
    for (std::uint32_t id = 1; id <= 500; ++id) {
        const auto a = daf::draw(id, win, cdf, c1.get(30));
        const auto b = daf::draw(id, win, cdf, c2.get(30));
        CHECK(a == b);
        CHECK(a.degree == a.neighbors.size());
        std::set<std::uint64_t> distinct(a.neighbors.begin(), a.neighbors.end());
        CHECK(distinct.size() == a.neighbors.size());
        for (auto p : a.neighbors) CHECK((p >= 101 && p <= 130));
    }
}

TEST_CASE("single-packet window clamps the degree") {
    const WindowRef win{7, 1, 0.0f};
    const auto cdf = uniform_cdf(1);
    const auto dist = daf::robust_soliton(1);
    for (std::uint32_t id = 1; id <= 50; ++id) {
        const auto m = daf::draw(id, win, cdf, dist);
        CHECK(m.degree == 1);
        CHECK(m.neighbors == std::vector<std::uint64_t>{7});
    }
}

TEST_CASE("draw rejects mismatched tables") {
    const WindowRef win{1, 8, 0.0f};
    CHECK_THROWS_AS(daf::draw(1, win, uniform_cdf(7), daf::robust_soliton(8)), daf::CodingError);
    CHECK_THROWS_AS(daf::draw(1, win, uniform_cdf(8), daf::robust_soliton(9)), daf::CodingError);
}

TEST_CASE("degree-one neighbors are uniform under a uniform pdf") {
    const std::uint32_t w = 16;
    const std::size_t n = 100000;
    const WindowRef win{1, w, 0.0f};
    const auto cdf = uniform_cdf(w);
    const auto dist = daf::robust_soliton(w);
    std::vector<double> count(w, 0);
    std::size_t got = 0;
    for (std::uint32_t id = 1; got < n; ++id) {
        REQUIRE(id <= daf::kMaxPacketId);
        const auto m = daf::draw(id, win, cdf, dist);
        if (m.degree != 1) continue;
        count[m.neighbors[0] - 1] += 1;
        ++got;
    }
    const double p = 1.0 / w, expect = n * p;
    const double sigma = std::sqrt(n * p * (1 - p));
    double chi2 = 0;
    for (double c : count) {
        CHECK(std::abs(c - expect) <= 3 * sigma);
        chi2 += (c - expect) * (c - expect) / expect;
    }
    // chi-square with w-1 degrees of freedom: mean 15, sd sqrt(30)
    CHECK(chi2 <= (w - 1) + 3 * std::sqrt(2.0 * (w - 1)));
}

TEST_CASE("sloped window pdf splits at unit boundaries") {
    const auto units = daf::VideoTrace::from_packet_counts({3, 4, 2, 2}, 30.0, 1, 1024);
    SUBCASE("uniform when slope is zero") {
        const auto pdf = daf::window_pdf(units, {2, 6, 0.0f});
        CHECK(pdf == std::vector<double>(6, 1.0 / 6));
    }
    SUBCASE("aligned window equals the slope pdf") {
        const auto pdf = daf::window_pdf(units, {1, 11, 0.5f});
        const std::vector<std::uint32_t> sizes{3, 4, 2, 2};
        const auto want = daf::slope_pdf(sizes, 0.5);
        REQUIRE(pdf.size() == want.size());
        for (std::size_t i = 0; i < pdf.size(); ++i) CHECK(pdf[i] == doctest::Approx(want[i]));
    }
    SUBCASE("misaligned window sums to one") {
        const auto pdf = daf::window_pdf(units, {2, 8, -0.75f});
        CHECK(pdf.size() == 8);
        CHECK(std::accumulate(pdf.begin(), pdf.end(), 0.0) == doctest::Approx(1.0));
        // pieces 2 | 4 | 2 with a negative slope: earlier pieces get more weight
        CHECK(pdf[0] > pdf[2]);
        CHECK(pdf[2] > pdf[6]);
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(daf::window_pdf(units, {5, 8, 0.0f}), daf::CodingError);
        CHECK_THROWS_AS(daf::window_pdf(units, {0, 3, 0.0f}), daf::CodingError);
        CHECK_THROWS_AS(daf::window_pdf(units, {1, 0, 0.0f}), daf::CodingError);
    }
}

TEST_CASE("encode is the XOR of the neighbors") {
    std::mt19937_64 rng(3);
    const std::size_t P = 32;
    const auto natives = random_bytes(5 * P, rng);
    SUBCASE("degree one copies the packet") {
        const auto out = daf::encode(meta_of({4}), natives, P);
        CHECK(std::equal(out.begin(), out.end(), natives.begin() + 3 * P));
    }
    SUBCASE("a packet XORed in twice cancels") {
        const auto once = daf::encode(meta_of({2}), natives, P);
        auto twice = daf::encode(meta_of({2, 5}), natives, P);
        const auto fifth = daf::encode(meta_of({5}), natives, P);
        for (std::size_t i = 0; i < P; ++i) twice[i] ^= fifth[i];
        CHECK(twice == once);
    }
    SUBCASE("missing native") {
        CHECK_THROWS_AS(daf::encode(meta_of({6}), natives, P), daf::CodingError);
    }
}

TEST_CASE("peeling: degree one releases its packet") {
    DecoderState dec(4, 2);
    const std::vector<std::uint8_t> bytes{0xAB, 0xCD};
    const auto out = dec.ingest(meta_of({3}), bytes);
    CHECK(out == std::vector<std::uint64_t>{3});
    CHECK(dec.is_decoded(3));
    CHECK(std::equal(bytes.begin(), bytes.end(), dec.packet(3).begin()));
    CHECK_THROWS_AS(dec.packet(1), daf::CodingError);
}

TEST_CASE("peeling: ripple works in either arrival order") {
    const std::vector<std::uint8_t> p1{0x11, 0x22}, p2{0x0F, 0xF0};
    const std::vector<std::uint8_t> x{static_cast<std::uint8_t>(p1[0] ^ p2[0]), static_cast<std::uint8_t>(p1[1] ^ p2[1])};
    for (int order = 0; order < 2; ++order) {
        DecoderState dec(2, 2);
        if (order == 0) {
            CHECK(dec.ingest(meta_of({1, 2}), x).empty());
            CHECK(dec.ingest(meta_of({1}), p1).size() == 2);
        } else {
            CHECK(dec.ingest(meta_of({1}), p1).size() == 1);
            CHECK(dec.ingest(meta_of({1, 2}), x) == std::vector<std::uint64_t>{2});
        }
        CHECK(std::equal(p1.begin(), p1.end(), dec.packet(1).begin()));
        CHECK(std::equal(p2.begin(), p2.end(), dec.packet(2).begin()));
        CHECK(dec.pending_count() == 0);
    }
}

TEST_CASE("known packets propagate like decoded ones") {
    DecoderState dec(3, 0);
    auto a = meta_of({1, 2});
    a.packet_id = 1;
    auto b = meta_of({2, 3});
    b.packet_id = 2;
    CHECK(dec.ingest(a, {}).empty());
    CHECK(dec.ingest(b, {}).empty());
    const auto out = dec.mark_known(1);
    CHECK(out == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(dec.decoded_count() == 3);
}

TEST_CASE("duplicate packet ids are ignored") {
    DecoderState dec(3, 0);
    auto m = meta_of({1, 2});
    m.packet_id = 9;
    CHECK(dec.ingest(m, {}).empty());
    CHECK(dec.pending_count() == 1);
    CHECK(dec.ingest(m, {}).empty());
    CHECK(dec.pending_count() == 1);
}

TEST_CASE("decoder rejects malformed input") {
    DecoderState dec(3, 4);
    CHECK_THROWS_AS(dec.ingest(meta_of({4}), std::vector<std::uint8_t>(4)), daf::CodingError);
    CHECK_THROWS_AS(dec.ingest(meta_of({1}), std::vector<std::uint8_t>(3)), daf::CodingError);
    CHECK_THROWS_AS(dec.mark_known(0), daf::CodingError);
}

TEST_CASE("decode then re-encode reproduces every coded payload") {
    std::mt19937_64 rng(11);
    const std::size_t P = 48;
    const std::uint32_t k = 5;
    const auto natives = random_bytes(k * P, rng);
    const WindowRef win{1, k, 0.0f};
    const auto cdf = uniform_cdf(k);
    const auto dist = daf::robust_soliton(k);

    std::vector<CodedPacketMeta> metas;
    std::vector<std::vector<std::uint8_t>> payloads;
    DecoderState dec(k, P);
    for (std::uint32_t id = 1; id <= 40; ++id) {
        metas.push_back(daf::draw(id, win, cdf, dist));
        payloads.push_back(daf::encode(metas.back(), natives, P));
        dec.ingest(metas.back(), payloads.back());
    }
    REQUIRE(dec.decoded_count() == k);
    std::vector<std::uint8_t> recovered;
    for (std::uint64_t p = 1; p <= k; ++p) {
        const auto s = dec.packet(p);
        recovered.insert(recovered.end(), s.begin(), s.end());
    }
    CHECK(recovered == natives);
    for (std::size_t i = 0; i < metas.size(); ++i) CHECK(daf::encode(metas[i], recovered, P) == payloads[i]);
}

TEST_CASE("property: peeling invariants under random arrivals") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint32_t k = 4 + static_cast<std::uint32_t>(rng() % 40);
        const WindowRef win{1, k, 0.0f};
        const auto cdf = uniform_cdf(k);
        const auto dist = daf::robust_soliton(k);
        const std::size_t n = k + rng() % (k + 1);
        const std::uint32_t base = static_cast<std::uint32_t>(trial) * 1000;

        std::vector<CodedPacketMeta> metas;
        for (std::size_t i = 1; i <= n; ++i) metas.push_back(daf::draw(base + static_cast<std::uint32_t>(i), win, cdf, dist));

        DecoderState dec(k, 0);
        std::vector<bool> seen(k, false);
        for (const auto& m : metas) {
            for (auto p : dec.ingest(m, {})) {
                CHECK_FALSE(seen[p - 1]);
                seen[p - 1] = true;
            }
            CHECK_FALSE(dec.pending_references_decoded());
            for (std::uint32_t p = 1; p <= k; ++p)
                if (seen[p - 1]) CHECK(dec.is_decoded(p));
        }
        CHECK(dec.decoded_count() == static_cast<std::uint64_t>(std::count(seen.begin(), seen.end(), true)));

        // any permutation of the same received set decodes the same packets
        auto shuffled = metas;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        DecoderState again(k, 0);
        for (const auto& m : shuffled) again.ingest(m, {});
        for (std::uint32_t p = 1; p <= k; ++p) CHECK(again.is_decoded(p) == dec.is_decoded(p));
    }
}

TEST_CASE("k=16 with 24 coded packets decodes at least as often as a plain LT experiment") {
    const std::uint32_t k = 16, n = 24, trials = 1000;
    const auto pmf = oracle::robust_soliton(k, 0.03, 0.02);
    std::mt19937_64 rng(2024);
    std::uint32_t oracle_ok = 0;
    for (std::uint32_t t = 0; t < trials; ++t) oracle_ok += oracle_lt_trial(k, n, pmf, rng);

    const WindowRef win{1, k, 0.0f};
    const auto cdf = uniform_cdf(k);
    const auto dist = daf::robust_soliton(k);
    std::uint32_t ok = 0;
    for (std::uint32_t t = 0; t < trials; ++t) {
        DecoderState dec(k, 0);
        for (std::uint32_t i = 1; i <= n; ++i) dec.ingest(daf::draw(t * n + i, win, cdf, dist), {});
        ok += dec.decoded_count() == k;
    }
    const double p0 = static_cast<double>(oracle_ok) / trials;
    const double p = static_cast<double>(ok) / trials;
    MESSAGE("oracle success " << p0 << ", library success " << p);
    // both are binomial estimates of the same rate; allow three standard errors of the difference
    const double se = std::sqrt(2.0 * p0 * (1 - p0) / trials);
    CHECK(p >= p0 - 3 * se);
}
