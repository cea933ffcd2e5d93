#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "mdma/acquisition.hpp"
#include "mdma/beacon.hpp"
#include "mdma/control_frame.hpp"
#include "mdma/fft.hpp"
#include "mdma/waveform.hpp"
#include "stats.hpp"

using namespace mdma;
using namespace mdma::control;

namespace {

const BroadcastInfo kBch{10, {1, 2, 5}, -90};
const PagingInfo kPch{{7, 12}};

struct Link {
  std::size_t cell = 3;
  std::size_t offset = 0;
  double cfo_bins = 0.0;
  std::optional<double> snr_db;
  cplx rotation{1.0, 0.0};
};

// one control frame of `cell`, delayed, frequency shifted and noisy
CVec received(const BeaconConfig& cfg, const Link& l, Rng& rng, const ControlFrameLayout& layout = {}) {
  const auto symbols = control_symbols(encode_frame(kBch, kPch, layout), 1);
  CVec rx = build_beacon_stream(l.cell, symbols, cfg);
  for (auto& v : rx) v *= l.rotation;
  rx = apply_frequency_offset(rx, l.cfo_bins / static_cast<double>(cfg.fft_size));
  rx.insert(rx.begin(), l.offset, cplx{0.0, 0.0});
  if (l.snr_db) {
    const double signal = (cfg.pct_amplitude * cfg.pct_amplitude + static_cast<double>(cfg.scts_per_cell)) /
                          static_cast<double>(cfg.fft_size);
    add_awgn(std::span<cplx>(rx), signal / db_to_linear(*l.snr_db), rng);
  }
  return rx;
}

int bpsk(std::uint8_t b) { return b ? -1 : 1; }

}  // namespace

TEST_SUITE("control_plane") {
  TEST_CASE("SCT mapping examples") {
    BeaconConfig cfg;
    cfg.num_cells = 3;
    cfg.scts_per_cell = 2;
    CHECK(sct_subcarriers(1, cfg) == std::vector<std::size_t>{1, 4});
    CHECK(sct_subcarriers(3, cfg) == std::vector<std::size_t>{3, 6});
    CHECK_THROWS_AS(sct_subcarriers(0, cfg), ConfigError);
    CHECK_THROWS_AS(sct_subcarriers(4, cfg), ConfigError);

    const BeaconConfig d;
    for (std::size_t a = 1; a <= d.num_cells; ++a) {
      const auto s = sct_subcarriers(a, d);
      for (std::size_t j = 1; j < s.size(); ++j) CHECK(s[j] - s[j - 1] == d.num_cells);
    }
  }

  TEST_CASE("property: SCT sets and the PCT partition the control tones") {
    for (auto [x, k] : {std::pair{3u, 2u}, {7u, 8u}, {4u, 5u}, {1u, 10u}}) {
      BeaconConfig cfg;
      cfg.num_cells = x;
      cfg.scts_per_cell = k;
      std::multiset<std::size_t> all{0};
      std::set<int> bins{cfg.pct_physical_bin()};
      for (std::size_t a = 1; a <= x; ++a) {
        for (auto i : sct_subcarriers(a, cfg)) {
          all.insert(i);
          bins.insert(cfg.physical_bin(i));
        }
      }
      CHECK(all.size() == k * x + 1);
      CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == k * x + 1);
      CHECK(*all.rbegin() == k * x);
      CHECK(bins.size() == k * x + 1);
      CHECK(bins.count(0) == 0);
      const auto guards = cfg.guard_band_bins();
      for (int g : guards) CHECK(bins.count(g) == 0);
    }
  }

  TEST_CASE("default numerology") {
    const BeaconConfig cfg;
    CHECK(cfg.symbol_length() == 144);
    CHECK(cfg.pct_physical_bin() == -56);
    CHECK(cfg.physical_bin(56) == 1);  // DC skipped
    BeaconConfig bad;
    bad.fft_size = 100;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.scts_per_cell = 20;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("beacon symbol synthesis") {
    const BeaconConfig cfg;
    const auto pct = build_beacon_symbol(2, 0.0, cfg).samples;
    REQUIRE(pct.size() == cfg.fft_size + cfg.cp_len);
    const double mag = cfg.pct_amplitude / std::sqrt(static_cast<double>(cfg.fft_size));
    for (const auto& v : pct) CHECK(std::abs(std::abs(v) - mag) < 1e-12);

    // remove the prefix, transform, and recover the injected bins
    const cplx d = std::polar(1.0, 0.4);
    const auto sym = build_beacon_symbol(5, d, cfg).samples;
    for (std::size_t k = 0; k < cfg.cp_len; ++k) CHECK(std::abs(sym[k] - sym[k + cfg.fft_size]) < 1e-15);
    const auto spec = dsp::fft(std::span<const cplx>(sym).subspan(cfg.cp_len));
    const auto ref = beacon_spectrum(5, d, cfg);
    for (std::size_t k = 0; k < cfg.fft_size; ++k) CHECK(std::abs(spec[k] - ref[k]) < 1e-9);
    CHECK(std::abs(spec[dsp::bin_index(cfg.pct_physical_bin(), cfg.fft_size)] - cfg.pct_amplitude) < 1e-9);
    for (auto i : sct_subcarriers(5, cfg)) CHECK(std::abs(spec[dsp::bin_index(cfg.physical_bin(i), cfg.fft_size)] - d) < 1e-9);
    CHECK_THROWS_AS(build_beacon_symbol(8, d, cfg), ConfigError);
  }

  TEST_CASE("CP synchronization examples") {
    const BeaconConfig cfg;
    Rng rng(1);
    const auto s0 = cp_synchronize(received(cfg, {}, rng), cfg);
    CHECK(s0.symbol_timing == 0);
    CHECK(std::abs(s0.fractional_cfo) < 1e-9);

    const auto s1 = cp_synchronize(received(cfg, {.cell = 3, .cfo_bins = 0.3}, rng), cfg);
    CHECK(s1.symbol_timing == 0);
    CHECK(s1.fractional_cfo * cfg.fft_size == doctest::Approx(0.3).epsilon(0.02));

    const auto s2 = cp_synchronize(received(cfg, {.cell = 3, .offset = 37}, rng), cfg);
    CHECK(s2.symbol_timing == 37);

    CHECK_THROWS_AS(cp_synchronize(CVec(200), cfg), FramingError);
    CHECK_THROWS_AS(cp_synchronize(CVec(400), cfg, 1.5), ConfigError);
  }

  TEST_CASE("timing at 10 dB") {
    const BeaconConfig cfg;
    int hits = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      Rng rng(derive_seed(2, "timing", t));
      hits += cp_synchronize(received(cfg, {.cell = 3, .offset = 37, .snr_db = 10.0}, rng), cfg).symbol_timing == 37;
    }
    CHECK(hits >= 990);
  }

  TEST_CASE("integer CFO") {
    const BeaconConfig cfg;
    Rng rng(3);
    CHECK(integer_cfo(received(cfg, {}, rng), 0, cfg, 4) == 0);
    CHECK(integer_cfo(received(cfg, {.cell = 2, .cfo_bins = 2.0}, rng), 0, cfg, 4) == 2);
    CHECK(integer_cfo(received(cfg, {.cell = 2, .cfo_bins = -3.0}, rng), 0, cfg, 4) == -3);
    CHECK_THROWS_AS(integer_cfo(received(cfg, {}, rng), 0, cfg, -1), ConfigError);

    int hits = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      Rng r(derive_seed(4, "icfo", t));
      hits += integer_cfo(received(cfg, {.cell = 1, .cfo_bins = -1.0, .snr_db = 5.0}, r), 0, cfg, 4) == -1;
    }
    CHECK(hits >= 990);
  }

  TEST_CASE("cell search examples") {
    BeaconConfig cfg;
    cfg.num_cells = 3;
    cfg.scts_per_cell = 2;
    const auto one = cell_search({beacon_spectrum(2, 1.0, cfg)}, cfg);
    REQUIRE(one.size() == 3);
    CHECK(one[0].cell_id == 2);
    // ties between the empty cells go to the lower id
    CHECK(one[1].cell_id == 1);
    CHECK(one[2].cell_id == 3);

    CVec mix = beacon_spectrum(1, 1.0, cfg);
    const CVec weak = beacon_spectrum(3, 0.5, cfg, false);
    for (std::size_t k = 0; k < mix.size(); ++k) mix[k] += weak[k];
    const auto r = cell_search({mix}, cfg);
    CHECK(r[0].cell_id == 1);
    CHECK(r[1].cell_id == 3);
    CHECK(std::abs(r[0].power / r[1].power - 4.0) < 1e-9);
  }

  TEST_CASE("cell search at 10 dB geometry") {
    const BeaconConfig cfg;
    int hits = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      Rng rng(derive_seed(5, "cells", t));
      const std::size_t home = 1 + t % 7;
      const std::size_t other = 1 + (t + 3) % 7;
      CVec rx = received(cfg, {.cell = home, .snr_db = 10.0}, rng);
      const auto symbols = control_symbols(encode_frame(kBch, kPch, {}), 1);
      const CVec y = build_beacon_stream(other, symbols, cfg);
      for (std::size_t i = 0; i < y.size(); ++i) rx[i] += std::sqrt(0.1) * y[i];
      hits += cell_search(demodulate_symbols(rx, 0, cfg), cfg).front().cell_id == home;
    }
    CHECK(hits >= 990);
  }

  TEST_CASE("property: cell ranking is invariant under common scaling") {
    const BeaconConfig cfg;
    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
      const auto spectra = demodulate_symbols(received(cfg, {.cell = static_cast<std::size_t>(1 + t % 7), .snr_db = 0.0}, rng), 0, cfg);
      const auto base = cell_search(spectra, cfg);
      auto scaled = spectra;
      const double c = 0.01 + 100.0 * rng.uniform();
      for (auto& s : scaled) {
        for (auto& v : s) v *= c;
      }
      const auto r = cell_search(scaled, cfg);
      for (std::size_t i = 0; i < base.size(); ++i) CHECK(r[i].cell_id == base[i].cell_id);
    }
  }

  TEST_CASE("frame sync examples") {
    const auto header = waveform::barker_header(13);
    Rng rng(7);
    Bits stream = random_bits(rng, 40);
    const auto h = header_bits(13);
    stream.insert(stream.end(), h.begin(), h.end());
    const auto bch = encode_bch(kBch, {});
    stream.insert(stream.end(), bch.begin(), bch.end());

    const auto clean = frame_sync(stream, header);
    REQUIRE(clean);
    CHECK(clean->start == 40);
    CHECK(clean->peak == 13);

    // every single-bit flip of the header is still found
    for (std::size_t i = 0; i < 13; ++i) {
      Bits s = stream;
      s[40 + i] ^= 1;
      const auto r = frame_sync(s, header);
      REQUIRE(r);
      CHECK(r->start == 40);
      CHECK(r->peak == 11);
    }
    CHECK_FALSE(frame_sync(Bits(5, 0), header));
    CHECK_FALSE(frame_sync(Bits(40, 0), header, 1.0));
    for (std::size_t i = 0; i < 13; ++i) CHECK(bpsk(h[i]) == header[i]);
  }

  TEST_CASE("BCH and PCH layout") {
    const ControlFrameLayout layout;
    CHECK(layout.bch_bits() == 72);
    CHECK(layout.pch_bits() == 40);
    CHECK(layout.frame_bits() == 125);
    CHECK(decode_bch(encode_bch(kBch, layout), layout) == kBch);
    CHECK(decode_pch(encode_pch(kPch, layout), layout) == kPch);
    CHECK(decode_pch(encode_pch(kPch, layout), layout, 7));
    CHECK_FALSE(decode_pch(encode_pch(kPch, layout), layout, 9));

    // beacon power 10 dB, MSB first
    const auto bits = encode_bch(kBch, layout);
    CHECK(Bits(bits.begin(), bits.begin() + 8) == Bits{0, 0, 0, 0, 1, 0, 1, 0});
    CHECK(Bits(bits.begin() + 8, bits.begin() + 16) == Bits{0, 0, 0, 0, 0, 0, 1, 1});

    auto bad = bits;
    bad[3] ^= 1;
    CHECK_THROWS_AS(decode_bch(bad, layout), FramingError);
    CHECK_FALSE(try_decode_bch(bad, layout));
    CHECK_THROWS_AS(decode_bch(Bits(71, 0), layout), FramingError);
    CHECK_THROWS_AS(decode_pch(Bits(39, 0), layout), FramingError);
    CHECK_THROWS_AS(encode_bch({0, {1, 2, 3, 4, 5}, 0}, layout), ConfigError);
    CHECK_THROWS_AS(encode_pch({{1, 2, 3}}, layout), ConfigError);
  }

  TEST_CASE("property: BCH and PCH round trip") {
    Rng rng(8);
    const ControlFrameLayout layout;
    for (int t = 0; t < 300; ++t) {
      BroadcastInfo b;
      b.beacon_power_db = static_cast<std::int8_t>(rng.uniform_int(-128, 127));
      b.target_rach_power_db = static_cast<std::int8_t>(rng.uniform_int(-128, 127));
      const auto n = rng.uniform_int(0, 4);
      for (int i = 0; i < n; ++i) b.pilot_roots.push_back(static_cast<std::uint8_t>(rng.uniform_int(1, 255)));
      PagingInfo p;
      const auto m = rng.uniform_int(0, 2);
      for (int i = 0; i < m; ++i) p.ids.push_back(static_cast<std::uint16_t>(rng.uniform_int(0, 65535)));
      CHECK(decode_bch(encode_bch(b, layout), layout) == b);
      CHECK(decode_pch(encode_pch(p, layout), layout) == p);
      const auto frame = encode_frame(b, p, layout);
      CHECK(frame.size() == layout.frame_bits());
    }
  }

  TEST_CASE("noiseless acquisition round trip") {
    const BeaconConfig cfg;
    const ControlFrameLayout layout;
    Rng rng(9);
    for (std::size_t cell = 1; cell <= cfg.num_cells; ++cell) {
      const auto rx = received(cfg, {.cell = cell, .offset = 37, .cfo_bins = 2.3}, rng);
      const auto a = acquire(rx, cfg, layout);
      REQUIRE(a.success);
      CHECK(a.cell_id == cell);
      CHECK(a.sync.symbol_timing == 37);
      CHECK(a.sync.integer_cfo == 2);
      CHECK(a.sync.fractional_cfo * cfg.fft_size == doctest::Approx(0.3).epsilon(1e-6));
      CHECK(a.bch == kBch);
      CHECK(a.pch == kPch);
    }
    // too short to hold a frame: reported, not thrown
    const auto a = acquire(CVec(50), cfg, layout);
    CHECK_FALSE(a.success);
    CHECK_FALSE(a.failure.empty());
  }

  TEST_CASE("property: sync estimators are unbiased at 20 dB") {
    const BeaconConfig cfg;
    std::vector<double> te, fe;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      Rng rng(derive_seed(10, "bias", t));
      const auto offset = static_cast<std::size_t>(rng.uniform_int(0, 143));
      const double frac = rng.uniform() - 0.5;
      const auto s = cp_synchronize(received(cfg, {.cell = 2, .offset = offset, .cfo_bins = frac, .snr_db = 20.0}, rng), cfg);
      te.push_back(static_cast<double>(s.symbol_timing) - static_cast<double>(offset));
      fe.push_back(s.fractional_cfo * cfg.fft_size - frac);
    }
    CHECK(std::abs(test::mean(te)) < 0.1);
    CHECK(std::abs(test::mean(fe)) < 0.01);
  }

  TEST_CASE("property: DPSK control decoding ignores a common phase") {
    const BeaconConfig cfg;
    Rng rng(11);
    const auto ref = decode_cell_bits(demodulate_symbols(received(cfg, {.cell = 4}, rng), 0, cfg), 4, cfg);
    const auto frame = encode_frame(kBch, kPch, {});
    // the first bit pair compares the reference with the first header bit
    REQUIRE(ref.size() == frame.size());
    CHECK(ref == frame);
    for (int t = 0; t < 20; ++t) {
      const cplx rot = std::polar(1.0, 2.0 * kPi * rng.uniform());
      CHECK(decode_cell_bits(demodulate_symbols(received(cfg, {.cell = 4, .rotation = rot}, rng), 0, cfg), 4, cfg) == frame);
    }
  }

  TEST_CASE("I/Q files") {
    const auto dir = std::filesystem::temp_directory_path() / "mdma_iq_test";
    std::filesystem::create_directories(dir);
    Rng rng(12);
    CVec x(100);
    for (auto& v : x) v = rng.complex_normal(1.0);
    write_iq(dir / "a.iq", x);
    CHECK(std::filesystem::file_size(dir / "a.iq") == 800);
    const auto y = read_iq(dir / "a.iq");
    REQUIRE(y.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(std::abs(y[i] - x[i]) < 1e-6 * (1.0 + std::abs(x[i])));

    // first pair is (1.0f, -2.0f) little endian
    write_iq(dir / "b.iq", CVec{cplx{1.0, -2.0}});
    std::ifstream is(dir / "b.iq", std::ios::binary);
    unsigned char raw[8];
    is.read(reinterpret_cast<char*>(raw), 8);
    CHECK(raw[3] == 0x3f);
    CHECK(raw[2] == 0x80);
    CHECK(raw[7] == 0xc0);

    {
      std::ofstream os(dir / "c.iq", std::ios::binary);
      os.write("0123456789ab", 12);
    }
    CHECK_THROWS_AS(read_iq(dir / "c.iq"), FramingError);
    std::filesystem::remove_all(dir);
  }
}
