// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "dsp/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/error.hpp"

namespace clar::dsp {

double quantize16(double x) {
  double k = std::floor(x * 32768.0);
  if (k < -32768.0) k = -32768.0;
  if (k > 32767.0) k = 32767.0;
  return k / 32768.0;
}

namespace {

void put_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<char*>(b), 4);
}

void put_u16(std::ofstream& f, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  f.write(reinterpret_cast<char*>(b), 2);
}

uint32_t get_u32(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

uint16_t get_u16(const unsigned char* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

}  // namespace

void write_wav(const std::string& path, const AudioClip& clip) {
  require(clip.sample_rate > 0, "write_wav: sample rate must be positive");
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "write_wav: cannot open " + path);
  const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  f.write("RIFF", 4);
  put_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(f, 16);
  put_u16(f, 1);  // PCM
  put_u16(f, 1);  // mono
  put_u32(f, static_cast<uint32_t>(clip.sample_rate));
  put_u32(f, static_cast<uint32_t>(clip.sample_rate * 2));
  put_u16(f, 2);   // block align
  put_u16(f, 16);  // bits per sample
  f.write("data", 4);
  put_u32(f, data_bytes);
  for (double x : clip.samples) {
    if (x < -1.0) x = -1.0;
    if (x > 1.0) x = 1.0;
    double k = std::floor(x * 32768.0);
    if (k < -32768.0) k = -32768.0;
    if (k > 32767.0) k = 32767.0;
    const int16_t s = static_cast<int16_t>(k);
    put_u16(f, static_cast<uint16_t>(s));
  }
  require(f.good(), "write_wav: write failed for " + path);
}

AudioClip read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  require(bytes.size() >= 44, "read_wav: " + path + " too short for a RIFF header");
  require(std::memcmp(bytes.data(), "RIFF", 4) == 0 && std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          "read_wav: " + path + " is not a RIFF/WAVE file");

  AudioClip clip;
  size_t pos = 12;
  bool got_fmt = false, got_data = false;
  while (pos + 8 <= bytes.size()) {
    const uint32_t chunk_len = get_u32(bytes.data() + pos + 4);
    const unsigned char* body = bytes.data() + pos + 8;
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      require(chunk_len >= 16 && pos + 8 + chunk_len <= bytes.size(), "read_wav: bad fmt chunk");
      require(get_u16(body) == 1, "read_wav: only PCM supported");
      require(get_u16(body + 2) == 1, "read_wav: only mono supported");
      clip.sample_rate = static_cast<int>(get_u32(body + 4));
      require(get_u16(body + 14) == 16, "read_wav: only 16-bit supported");
      got_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      require(pos + 8 + chunk_len <= bytes.size(), "read_wav: truncated data chunk");
      const size_t n = chunk_len / 2;
      clip.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const int16_t s = static_cast<int16_t>(get_u16(body + 2 * i));
        clip.samples[i] = double(s) / 32768.0;
      }
      got_data = true;
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  require(got_fmt && got_data, "read_wav: missing fmt or data chunk in " + path);
  return clip;
}

}  // namespace clar::dsp
