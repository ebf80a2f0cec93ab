// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "ad/tape.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "doctest.h"
#include "dsp/audio.hpp"
#include "dsp/fft.hpp"
#include "dsp/mel.hpp"
#include "dsp/stft.hpp"
#include "dsp/stft_tape.hpp"
#include "dsp/synth.hpp"
#include "verify/oracles.hpp"

using namespace clar;
using namespace clar::dsp;

namespace {

std::vector<double> rand_signal(int64_t n, uint64_t seed, double amp = 0.8) {
  Rng r(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = r.uniform(-amp, amp);
  return x;
}

// Frame extraction reimplemented from the documented convention: extend the
// clip with zeros to at least one window, reflect-pad window_len/2 on both
// sides, then window frame f starting at padded position f*hop.
std::vector<double> naive_frame(const std::vector<double>& x, const StftConfig& cfg, int f) {
  const int64_t n = std::max<int64_t>(int64_t(x.size()), cfg.window_len);
  const int64_t pad = cfg.window_len / 2;
  std::vector<double> w(cfg.fft_size, 0.0);
  const double pi = 3.14159265358979323846;
  for (int j = 0; j < cfg.window_len; ++j) {
    int64_t i = int64_t(f) * cfg.hop + j - pad;
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    const double s = i < int64_t(x.size()) ? x[i] : 0.0;
    w[j] = s * 0.5 * (1.0 - std::cos(2.0 * pi * j / (cfg.window_len - 1)));
  }
  return w;
}

std::string tmp_path(const char* name) { return std::string("/tmp/clarinet_dsp_") + name; }

}  // namespace

TEST_CASE("audio: quantize16 floors onto the 16-bit grid") {
  CHECK(quantize16(0.0) == 0.0);
  CHECK(quantize16(0.25) == 0.25);  // 8192/32768 is exactly representable
  CHECK(quantize16(-1.0) == -1.0);
  CHECK(quantize16(1.0) == 32767.0 / 32768.0);   // top of the grid
  CHECK(quantize16(-7.0) == -1.0);               // clamps
  CHECK(quantize16(7.0) == 32767.0 / 32768.0);

  Rng r(12);
  for (int i = 0; i < 2000; ++i) {
    const double x = r.uniform(-1.0, 1.0);
    const double q = quantize16(x);
    CHECK(q * 32768.0 == std::floor(q * 32768.0));  // on the grid
    CHECK(q <= x);
    CHECK(x - q < kQuantStep);
    CHECK(quantize16(q) == q);  // idempotent
  }
}

TEST_CASE("audio: wav round trip is exact for grid samples and clamps the rest") {
  AudioClip clip;
  clip.sample_rate = 8000;
  Rng r(13);
  for (int i = 0; i < 777; ++i) clip.samples.push_back(quantize16(r.uniform(-1.0, 1.0)));
  const std::string path = tmp_path("roundtrip.wav");
  write_wav(path, clip);
  const AudioClip back = read_wav(path);
  CHECK(back.sample_rate == 8000);
  REQUIRE(back.length() == clip.length());
  for (int64_t i = 0; i < clip.length(); ++i) CHECK(back.samples[i] == clip.samples[i]);

  AudioClip loud;
  loud.sample_rate = 4000;
  loud.samples = {2.5, -3.0, 0.5};
  const std::string path2 = tmp_path("clamp.wav");
  write_wav(path2, loud);
  const AudioClip b2 = read_wav(path2);
  CHECK(b2.samples[0] == 32767.0 / 32768.0);
  CHECK(b2.samples[1] == -1.0);
  CHECK(b2.samples[2] == 0.5);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("fft: matches the direct DFT sum and Parseval") {
  const int n = 64;
  const auto x = rand_signal(n, 21);
  std::vector<std::complex<double>> buf(n);
  for (int i = 0; i < n; ++i) buf[i] = x[i];
  fft_radix2(buf);

  const double pi = 3.14159265358979323846;
  double time_energy = 0.0, freq_energy = 0.0;
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < n; ++j)
      acc += x[j] * std::exp(std::complex<double>(0.0, -2.0 * pi * k * j / n));
    CHECK(std::abs(buf[k] - acc) < 1e-10);
    freq_energy += std::norm(buf[k]);
  }
  for (double v : x) time_energy += v * v;
  CHECK(freq_energy / n == doctest::Approx(time_energy).epsilon(1e-12));

  // magnitudes against the dedicated oracle as well (first n/2+1 bins)
  const auto mag = verify::naive_dft_magnitude(x);
  REQUIRE(mag.size() == size_t(n / 2 + 1));
  for (size_t k = 0; k < mag.size(); ++k)
    CHECK(std::abs(buf[k]) == doctest::Approx(mag[k]).epsilon(1e-10));

  CHECK(is_pow2(64));
  CHECK(!is_pow2(48));
  std::vector<std::complex<double>> bad(48);
  CHECK_THROWS_AS(fft_radix2(bad), clar::Error);
}

TEST_CASE("stft: hann window is symmetric with zero endpoints") {
  for (int len : {8, 9, 200}) {
    const auto w = hann_window(len);
    REQUIRE(int(w.size()) == len);
    CHECK(w[0] == 0.0);
    CHECK(w[len - 1] == doctest::Approx(0.0).epsilon(1e-15));
    for (int i = 0; i < len; ++i) {
      CHECK(w[i] == doctest::Approx(w[len - 1 - i]).epsilon(1e-12));
      CHECK(w[i] >= 0.0);
      CHECK(w[i] <= 1.0);
    }
  }
  const auto w9 = hann_window(9);
  CHECK(w9[4] == doctest::Approx(1.0).epsilon(1e-15));  // odd length peaks at the center
}

TEST_CASE("stft: frame plan counts, padding and reflection indices") {
  StftConfig cfg;
  cfg.fft_size = 64;
  cfg.hop = 25;
  cfg.window_len = 50;

  CHECK(stft_bins(cfg) == 33);
  CHECK(stft_frames(230, cfg) == 230 / 25 + 1);
  CHECK(stft_frames(10, cfg) == 1);

  const FramePlan p = plan_frames(230, cfg);
  CHECK(p.source_len == 230);
  CHECK(p.extended_len == 230);
  CHECK(p.padded_len == 230 + 2 * 25);
  const int64_t pad = 25;
  CHECK(p.src_index[0] == pad);       // left edge reflects
  CHECK(p.src_index[pad] == 0);
  CHECK(p.src_index[pad + 7] == 7);   // interior is identity
  CHECK(p.src_index[p.padded_len - 1] == 230 - 1 - pad);  // right edge reflects
  for (int64_t pos = 0; pos < p.padded_len; ++pos) {
    CHECK(p.src_index[pos] >= 0);
    CHECK(p.src_index[pos] < p.extended_len);
  }

  // clips shorter than a window zero-extend before padding
  const FramePlan q = plan_frames(10, cfg);
  CHECK(q.extended_len == 50);
  std::vector<double> x(10, 1.0);
  CHECK(q.sample(x.data(), pad + 9) == 1.0);
  CHECK(q.sample(x.data(), pad + 10) == 0.0);  // beyond the source: zero
}

TEST_CASE("stft: magnitudes match a from-scratch reimplementation") {
  StftConfig cfg;
  cfg.fft_size = 64;
  cfg.hop = 25;
  cfg.window_len = 50;

  for (int64_t T : {int64_t(230), int64_t(10), int64_t(50)}) {
    const auto x = rand_signal(T, 100 + T);
    const ad::Array mag = stft_magnitude(x, cfg);
    const int F = stft_frames(T, cfg);
    const int B = stft_bins(cfg);
    REQUIRE(mag.shape == ad::Shape{F, B});
    for (int f = 0; f < F; ++f) {
      const auto ref = verify::naive_dft_magnitude(naive_frame(x, cfg, f));
      for (int b = 0; b < B; ++b)
        CHECK(mag.v[int64_t(f) * B + b] == doctest::Approx(ref[b]).epsilon(1e-9));
    }
  }
}

TEST_CASE("stft: loss is zero on identical input and equals the mean squared gap") {
  StftConfig cfg;
  cfg.fft_size = 64;
  cfg.hop = 25;
  cfg.window_len = 50;
  const auto x = rand_signal(180, 31);
  const auto y = rand_signal(180, 32);
  CHECK(stft_loss(x, x, cfg) == 0.0);

  const ad::Array mx = stft_magnitude(x, cfg);
  const ad::Array my = stft_magnitude(y, cfg);
  double acc = 0.0;
  for (int64_t i = 0; i < mx.size(); ++i) {
    const double d = mx.v[i] - my.v[i];
    acc += d * d;
  }
  CHECK(stft_loss(x, y, cfg) == doctest::Approx(acc / double(mx.size())).epsilon(1e-13));
  CHECK(stft_loss(x, y, cfg) > 0.0);

  std::vector<double> shorter(179, 0.0);
  CHECK_THROWS_AS((void)stft_loss(x, shorter, cfg), clar::Error);
}

TEST_CASE("mel: filterbank triangles cover the band and stay nonnegative") {
  StftConfig cfg;
  cfg.fft_size = 128;
  cfg.hop = 25;
  cfg.window_len = 50;
  const int bands = 8;
  const ad::Array fb = mel_filterbank(bands, cfg, 4000);
  const int B = stft_bins(cfg);
  REQUIRE(fb.shape == ad::Shape{bands, B});
  for (double v : fb.v) CHECK(v >= 0.0);
  for (int m = 0; m < bands; ++m) {
    double row = 0.0;
    for (int b = 0; b < B; ++b) row += fb.v[int64_t(m) * B + b];
    CHECK(row > 0.0);  // every band sees some bin
  }
  // interior bins sit under at least one triangle
  for (int b = 1; b + 1 < B; ++b) {
    double col = 0.0;
    for (int m = 0; m < bands; ++m) col += fb.v[int64_t(m) * B + b];
    CHECK(col > 0.0);
  }
}

TEST_CASE("mel: log frames floor at 1e-10 and normalization clamps into [0,1]") {
  StftConfig cfg;
  cfg.fft_size = 64;
  cfg.hop = 25;
  cfg.window_len = 50;
  AudioClip silent;
  silent.sample_rate = 4000;
  silent.samples.assign(100, 0.0);
  const ad::Array lm = log_mel_frames(silent, 6, cfg);
  REQUIRE(lm.shape == ad::Shape{stft_frames(100, cfg), 6});
  for (double v : lm.v) CHECK(v == doctest::Approx(std::log(1e-10)).epsilon(1e-12));

  ad::Array a({2, 2});
  a.v = {-3.0, 1.0, 0.0, 5.0};
  ad::Array b({1, 2});
  b.v = {-1.0, 7.0};
  const MelStats st = compute_mel_stats({a, b});
  CHECK(st.lmin == -3.0);
  CHECK(st.lmax == 7.0);

  const ad::Array na = normalize_mel(a, st);
  for (int64_t i = 0; i < na.size(); ++i)
    CHECK(na.v[i] == doctest::Approx((a.v[i] + 3.0) / 10.0).epsilon(1e-14));

  ad::Array wild({1, 3});
  wild.v = {-100.0, 100.0, 2.0};
  const ad::Array nw = normalize_mel(wild, st);
  CHECK(nw.v[0] == 0.0);  // clamps below
  CHECK(nw.v[1] == 1.0);  // clamps above
  CHECK(nw.v[2] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("mel: upsampling repeats each frame hop times") {
  ad::Array frames({3, 2});  // [frames, bands]
  frames.v = {1.0, 10.0, 2.0, 20.0, 3.0, 30.0};
  const ad::Array up = upsample_frames(frames, 4, 10);
  REQUIRE(up.shape == ad::Shape{2, 10});
  for (int64_t t = 0; t < 10; ++t) {
    CHECK(up.v[t] == frames.v[(t / 4) * 2]);
    CHECK(up.v[10 + t] == frames.v[(t / 4) * 2 + 1]);
  }
  CHECK_THROWS_AS((void)upsample_frames(frames, 4, 13), clar::Error);  // beyond coverage
}

TEST_CASE("synth: corpus is deterministic and every sample sits on the grid") {
  SynthSpec spec;
  spec.sample_rate = 4000;
  spec.clip_len = 256;
  spec.num_clips = 3;
  spec.components = {{110.0, 0.4, 0.0}, {220.0, 0.2, 1.0}};
  spec.noise_amp = 0.05;
  spec.phase_jitter = true;

  const auto d1 = synth_dataset(spec, 77);
  const auto d2 = synth_dataset(spec, 77);
  const auto d3 = synth_dataset(spec, 78);
  REQUIRE(d1.size() == 3);
  bool any_diff = false;
  for (int c = 0; c < 3; ++c) {
    CHECK(d1[c].sample_rate == 4000);
    REQUIRE(d1[c].length() == 256);
    REQUIRE(d2[c].length() == 256);
    for (int64_t i = 0; i < 256; ++i) {
      CHECK(d1[c].samples[i] == d2[c].samples[i]);
      const double g = d1[c].samples[i] * 32768.0;
      CHECK(g == std::floor(g));  // on the 16-bit grid
      if (d1[c].samples[i] != d3[c].samples[i]) any_diff = true;
    }
  }
  CHECK(any_diff);  // a different seed actually changes the corpus

  // jittered clips differ from each other; unjittered pure tones repeat
  SynthSpec flat = spec;
  flat.phase_jitter = false;
  flat.noise_amp = 0.0;
  const auto df = synth_dataset(flat, 5);
  CHECK(df[0].samples == df[1].samples);

  SynthSpec deq = flat;
  deq.dequantize = true;
  const auto dd = synth_dataset(deq, 5);
  bool off_grid = false;
  for (double s : dd[0].samples)
    if (s * 32768.0 != std::floor(s * 32768.0)) off_grid = true;
  CHECK(off_grid);  // dequantization noise lifts samples off the grid
  for (int64_t i = 0; i < 256; ++i) {
    CHECK(dd[0].samples[i] >= df[0].samples[i]);
    CHECK(dd[0].samples[i] < df[0].samples[i] + kQuantStep);
  }
}

TEST_CASE("stft tape: forward matches the plain transform exactly") {
  StftConfig cfg;
  cfg.fft_size = 64;
  cfg.hop = 25;
  cfg.window_len = 50;
  const auto x = rand_signal(140, 55);
  const ad::Array plain = stft_magnitude(x, cfg);

  ad::Tape t;
  ad::Array xa({int(x.size())});
  xa.v = x;
  ad::Var mag = stft_magnitude_var(t.leaf(xa), cfg);
  REQUIRE(mag.shape() == plain.shape);
  for (int64_t i = 0; i < plain.size(); ++i) CHECK(mag.value().v[i] == plain.v[i]);
}

TEST_CASE("stft tape: loss gradient matches central differences") {
  StftConfig cfg;
  cfg.fft_size = 32;
  cfg.hop = 9;
  cfg.window_len = 18;
  const auto ref = rand_signal(40, 60);
  ad::Array xa({40});
  xa.v = rand_signal(40, 61);

  const auto loss_value = [&]() {
    ad::Tape t;
    return stft_loss_var(t.leaf(xa), ref, cfg).value().v[0];
  };

  ad::Tape t;
  ad::Var loss = stft_loss_var(t.leaf(xa), ref, cfg);
  CHECK(loss.value().v[0] == doctest::Approx(stft_loss(xa.v, ref, cfg)).epsilon(1e-13));
  t.backward(loss);
  const ad::Array g = t.grad_array(xa);
  const auto fd = verify::fd_gradient(loss_value, xa, 1e-6);
  CHECK(verify::max_rel_err(g.v, fd, 1e-5) < 1e-5);
}
