// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "harness/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace clar::harness {

namespace fs = std::filesystem;

Dataset build_dataset(const ExperimentConfig& cfg) {
  Dataset ds;
  ds.clips = dsp::synth_dataset(cfg.data, cfg.seed);
  std::vector<ad::Array> raw;
  raw.reserve(ds.clips.size());
  for (const auto& clip : ds.clips)
    raw.push_back(dsp::log_mel_frames(clip, cfg.mel_bands, cfg.stft));
  ds.stats = dsp::compute_mel_stats(raw);
  for (size_t i = 0; i < ds.clips.size(); ++i) {
    const ad::Array norm = dsp::normalize_mel(raw[i], ds.stats);
    ds.cond_up.push_back(dsp::upsample_frames(norm, cfg.stft.hop, ds.clips[i].length()));
  }
  return ds;
}

ad::Array conditioner_for(const dsp::AudioClip& clip, int bands, const dsp::StftConfig& stft,
                          const dsp::MelStats& stats, int64_t target_len) {
  const ad::Array raw = dsp::log_mel_frames(clip, bands, stft);
  const ad::Array norm = dsp::normalize_mel(raw, stats);
  return dsp::upsample_frames(norm, stft.hop, target_len);
}

void write_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream manifest(dir + "/manifest.tsv");
  require(manifest.good(), "dataset: cannot write manifest in " + dir);
  for (size_t i = 0; i < ds.clips.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "clip_%04zu.wav", i);
    dsp::write_wav(dir + "/" + name, ds.clips[i]);
    manifest << name << "\t0\t" << ds.clips[i].length() << "\n";
  }
  require(manifest.good(), "dataset: manifest write failed");
  write_mel_stats(dir + "/mel_stats.txt", ds.stats);
}

std::vector<dsp::AudioClip> load_manifest(const std::string& manifest_path) {
  std::ifstream f(manifest_path);
  require(f.good(), "dataset: cannot open manifest " + manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<dsp::AudioClip> clips;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    require(t2 != std::string::npos, manifest_path + ":" + std::to_string(lineno) +
                                         ": expected path<TAB>start<TAB>length");
    const std::string rel = line.substr(0, t1);
    int64_t start = 0, len = 0;
    try {
      start = std::stoll(line.substr(t1 + 1, t2 - t1 - 1));
      len = std::stoll(line.substr(t2 + 1));
    } catch (...) {
      throw ConfigError(manifest_path + ":" + std::to_string(lineno) +
                        ": start and length must be integers");
    }
    dsp::AudioClip full = dsp::read_wav((base / rel).string());
    require(start >= 0 && len >= 1 && start + len <= full.length(),
            manifest_path + ":" + std::to_string(lineno) + ": slice [" + std::to_string(start) +
                ", +" + std::to_string(len) + ") is outside clip of length " +
                std::to_string(full.length()));
    dsp::AudioClip slice;
    slice.sample_rate = full.sample_rate;
    slice.samples.assign(full.samples.begin() + start, full.samples.begin() + start + len);
    clips.push_back(std::move(slice));
  }
  require(!clips.empty(), "dataset: manifest " + manifest_path + " lists no clips");
  return clips;
}

void write_mel_stats(const std::string& path, const dsp::MelStats& stats) {
  std::ofstream f(path);
  require(f.good(), "cannot write mel stats to " + path);
  char buf[96];
  std::snprintf(buf, sizeof buf, "lmin = %.17g\nlmax = %.17g\n", stats.lmin, stats.lmax);
  f << buf;
}

dsp::MelStats load_mel_stats(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot open mel stats file " + path);
  dsp::MelStats s;
  bool got_min = false, got_max = false;
  std::string line;
  while (std::getline(f, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, line.find_first_of(" =\t"));
    const double v = std::stod(line.substr(eq + 1));
    if (key == "lmin") {
      s.lmin = v;
      got_min = true;
    } else if (key == "lmax") {
      s.lmax = v;
      got_max = true;
    }
  }
  require(got_min && got_max, "mel stats file " + path + " must define lmin and lmax");
  return s;
}

}  // namespace clar::harness
