#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mdma/waveform.hpp"

using namespace mdma;
using namespace mdma::waveform;

namespace {

// brute-force periodic correlation at lag l: sum_n a[n] conj(b[(n + l) mod N])
cplx periodic_corr(const ZcSequence& a, const ZcSequence& b, std::size_t lag) {
  const std::size_t n = a.length();
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * std::conj(b[(i + lag) % n]);
  return acc;
}

int aperiodic_autocorr(const std::vector<int>& c, std::size_t lag) {
  int s = 0;
  for (std::size_t i = 0; i + lag < c.size(); ++i) s += c[i] * c[i + lag];
  return s;
}

}  // namespace

TEST_SUITE("waveform") {
  TEST_CASE("zadoff-chu construction") {
    const auto z = zc_generate(1, 3);
    CHECK(z[0] == cplx{1.0, 0.0});
    for (auto [q, n] : {std::pair{1u, 63u}, {2u, 63u}, {5u, 139u}, {25u, 139u}, {3u, 7u}}) {
      const auto s = zc_generate(q, n);
      REQUIRE(s.length() == n);
      CHECK(s.root() == q);
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(std::abs(s[k]) - 1.0) < 1e-12);
        const double phase = -kPi * q * static_cast<double>(k) * static_cast<double>(k + 1) / n;
        CHECK(std::abs(s[k] - std::polar(1.0, phase)) < 1e-9);
      }
    }
    CHECK_THROWS_AS(zc_generate(1, 64), ConfigError);
    CHECK_THROWS_AS(zc_generate(3, 63), ConfigError);
    CHECK_THROWS_AS(zc_generate(0, 63), ConfigError);
    CHECK_THROWS_AS(zc_generate(63, 63), ConfigError);
  }

  TEST_CASE("property: ideal periodic autocorrelation") {
    for (auto [q, n] : {std::pair{1u, 63u}, {2u, 63u}, {5u, 139u}}) {
      const auto s = zc_generate(q, n);
      CHECK(std::abs(periodic_corr(s, s, 0)) == doctest::Approx(static_cast<double>(n)));
      double worst = 0.0;
      for (std::size_t l = 1; l < n; ++l) worst = std::max(worst, std::abs(periodic_corr(s, s, l)));
      CHECK(worst < 1e-9 * n);
    }
  }

  TEST_CASE("cross-correlation of distinct roots is flat at sqrt(N)") {
    const auto a = zc_generate(1, 63);
    const auto b = zc_generate(2, 63);
    double worst = 0.0;
    for (std::size_t l = 0; l < 63; ++l) worst = std::max(worst, std::abs(periodic_corr(a, b, l)));
    CHECK(worst == doctest::Approx(7.937).epsilon(1e-4));
    CHECK(std::abs(worst - std::sqrt(63.0)) < 1e-6);

    for (unsigned q : {2u, 25u, 138u}) {
      const auto c = zc_generate(1, 139);
      const auto d = zc_generate(q, 139);
      for (std::size_t l = 0; l < 139; ++l) CHECK(std::abs(std::abs(periodic_corr(c, d, l)) - std::sqrt(139.0)) < 1e-6);
    }
  }

  TEST_CASE("library correlation matches brute force") {
    const auto a = zc_generate(5, 139);
    const auto b = zc_generate(7, 139);
    const auto c = periodic_cross_correlation(a.samples(), b.samples());
    REQUIRE(c.size() == 139);
    for (std::size_t l = 0; l < 139; l += 7) CHECK(std::abs(c[l] - periodic_corr(a, b, l)) < 1e-9);
  }

  TEST_CASE("barker codes") {
    const std::vector<int> b13{1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1};
    CHECK(barker_header(13) == b13);
    CHECK(aperiodic_autocorr(b13, 0) == 13);
    for (std::size_t len : {7u, 11u, 13u}) {
      const auto c = barker_header(len);
      REQUIRE(c.size() == len);
      int worst = 0;
      for (std::size_t l = 1; l < len; ++l) worst = std::max(worst, std::abs(aperiodic_autocorr(c, l)));
      CHECK(worst <= 1);
    }
    int worst13 = 0;
    for (std::size_t l = 1; l < 13; ++l) worst13 = std::max(worst13, std::abs(aperiodic_autocorr(b13, l)));
    CHECK(worst13 == 1);
    CHECK_THROWS_AS(barker_header(5), ConfigError);
    CHECK_THROWS_AS(barker_header(4), ConfigError);
  }

  TEST_CASE("bpsk mapping") {
    const Bits b{0, 1, 1};
    const auto s = bpsk_map(b);
    CHECK(s == CVec{1.0, -1.0, -1.0});
    CHECK(bpsk_hard_decide(s) == b);
    CHECK(bpsk_decide({0.0, 5.0}) == 0);
    CHECK(bpsk_decide({-0.3, 0.9}) == 1);
    CHECK(bpsk_decide({-0.0, 0.0}) == 0);
  }

  TEST_CASE("dpsk mapping") {
    CHECK(dpsk_encode(Bits{0, 0, 0}) == CVec{1.0, 1.0, 1.0, 1.0});
    const auto s = dpsk_encode(Bits{1});
    CHECK(s == CVec{1.0, -1.0});
    CHECK(dpsk_decode(s) == Bits{1});
    CHECK(dpsk_encode(Bits{}).empty());
    CHECK(dpsk_decode(CVec{}).empty());
    const cplx ref = std::polar(1.0, 0.7);
    CHECK(dpsk_encode(Bits{0, 1}, ref)[0] == ref);
  }

  TEST_CASE("property: mappers round-trip and DPSK ignores a common phase") {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
      const auto bits = random_bits(rng, static_cast<std::size_t>(rng.uniform_int(1, 300)));
      CHECK(bpsk_hard_decide(bpsk_map(bits)) == bits);
      auto sym = dpsk_encode(bits, std::polar(1.0, rng.uniform() * 2.0 * kPi));
      CHECK(dpsk_decode(sym) == bits);
      const cplx rot = std::polar(rng.uniform() * 3.0 + 0.1, kPi / 5.0 + rng.uniform());
      for (auto& v : sym) v *= rot;
      CHECK(dpsk_decode(sym) == bits);
    }
  }

  TEST_CASE("uplink burst layout") {
    Rng rng(4);
    const auto pilot = zc_generate(1, 63);
    const auto bits = random_bits(rng, 100);
    const auto burst = assemble_uplink_burst(pilot, bits);
    const auto& x = burst.signal().samples;
    REQUIRE(x.size() == 163);
    for (std::size_t i = 0; i < 63; ++i) CHECK(x[i] == pilot[i]);
    for (std::size_t i = 0; i < 100; ++i) CHECK(x[63 + i] == (bits[i] ? cplx{-1.0, 0.0} : cplx{1.0, 0.0}));
    CHECK(energy(x) / 163.0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(burst.pilot_root() == 1);

    // cyclic prefix copies the pilot tail; spacing places symbols apart
    const auto b2 = assemble_uplink_burst(pilot, bits, {4, 3});
    const auto& y = b2.signal().samples;
    REQUIRE(b2.layout().length() == 4 + 63 + 300);
    REQUIRE(y.size() == b2.layout().length());
    for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == pilot[59 + i]);
    CHECK(y[b2.layout().data_offset()] == b2.data_symbols()[0]);
    CHECK(y[b2.layout().data_offset() + 1] == cplx{0.0, 0.0});
    CHECK(y[b2.layout().data_offset() + 3] == b2.data_symbols()[1]);
  }
}
