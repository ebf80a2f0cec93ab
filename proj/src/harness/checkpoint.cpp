// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "harness/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace clar::harness {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'A', 'R', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<char*>(b), 4);
}

void put_u64(std::ostream& f, uint64_t v) {
  put_u32(f, static_cast<uint32_t>(v));
  put_u32(f, static_cast<uint32_t>(v >> 32));
}

void put_f64(std::ostream& f, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(f, bits);
}

uint32_t get_u32(std::istream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

uint64_t get_u64(std::istream& f) {
  const uint64_t lo = get_u32(f);
  const uint64_t hi = get_u32(f);
  return lo | hi << 32;
}

double get_f64(std::istream& f) {
  const uint64_t bits = get_u64(f);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_hyper(const model::WaveNetHyper& h) {
  std::ostringstream os;
  os << h.layers << "," << h.residual_channels << "," << h.skip_channels << ","
     << h.head_channels << "," << h.cond_channels << "," << h.filter_size << ","
     << h.dilation_cycle;
  return os.str();
}

model::WaveNetHyper parse_hyper(const std::string& s) {
  model::WaveNetHyper h;
  int vals[7];
  std::istringstream is(s);
  std::string item;
  for (int i = 0; i < 7; ++i) {
    require(static_cast<bool>(std::getline(is, item, ',')), "checkpoint: malformed hyper line");
    vals[i] = std::stoi(item);
  }
  h.layers = vals[0];
  h.residual_channels = vals[1];
  h.skip_channels = vals[2];
  h.head_channels = vals[3];
  h.cond_channels = vals[4];
  h.filter_size = vals[5];
  h.dilation_cycle = vals[6];
  return h;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void header_common(std::ostringstream& os, const CheckpointMeta& meta) {
  os << "sample_rate = " << meta.sample_rate << "\n";
  os << "mel_bands = " << meta.mel_bands << "\n";
  os << "stft_fft = " << meta.stft.fft_size << "\n";
  os << "stft_hop = " << meta.stft.hop << "\n";
  os << "stft_window = " << meta.stft.window_len << "\n";
  os << "mel_lmin = " << fmt_double(meta.mel_stats.lmin) << "\n";
  os << "mel_lmax = " << fmt_double(meta.mel_stats.lmax) << "\n";
  os << "config_hash = " << meta.config_hash << "\n";
  os << "trained_steps = " << meta.trained_steps << "\n";
}

void write_blobs(std::ostream& f,
                 const std::vector<std::pair<std::string, ad::Array*>>& params) {
  put_u32(f, static_cast<uint32_t>(params.size()));
  for (const auto& [name, arr] : params) {
    require(name.size() < 65536, "checkpoint: blob name too long");
    put_u32(f, static_cast<uint32_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(f, static_cast<uint32_t>(arr->shape.size()));
    for (int d : arr->shape) put_u32(f, static_cast<uint32_t>(d));
    for (double v : arr->v) put_f64(f, v);
  }
}

void write_container(const std::string& path, const std::string& header,
                     const std::vector<std::pair<std::string, ad::Array*>>& params) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "checkpoint: cannot open " + path + " for writing");
  f.write(kMagic, 8);
  put_u32(f, kVersion);
  put_u64(f, header.size());
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  write_blobs(f, params);
  require(f.good(), "checkpoint: write failed for " + path);
}

std::map<std::string, std::string> parse_header(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string need(const std::map<std::string, std::string>& kv, const std::string& key,
                 const std::string& path) {
  auto it = kv.find(key);
  require(it != kv.end(), "checkpoint " + path + ": missing header field '" + key + "'");
  return it->second;
}

void read_blobs_into(std::istream& f, const std::string& path,
                     std::vector<std::pair<std::string, ad::Array*>> params) {
  std::map<std::string, ad::Array*> by_name;
  for (auto& [name, arr] : params) by_name[name] = arr;
  const uint32_t n = get_u32(f);
  require(n == params.size(), "checkpoint " + path + ": blob count " + std::to_string(n) +
                                  " does not match model (" + std::to_string(params.size()) + ")");
  for (uint32_t i = 0; i < n; ++i) {
    const uint32_t name_len = get_u32(f);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    const uint32_t rank = get_u32(f);
    ad::Shape shape(rank);
    for (uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<int>(get_u32(f));
    auto it = by_name.find(name);
    require(it != by_name.end(), "checkpoint " + path + ": unexpected blob '" + name + "'");
    ad::Array* dst = it->second;
    require(dst->shape == shape, "checkpoint " + path + ": blob '" + name + "' has shape " +
                                     ad::shape_str(shape) + " but the model expects " +
                                     ad::shape_str(dst->shape));
    for (auto& v : dst->v) v = get_f64(f);
    require(f.good(), "checkpoint " + path + ": truncated while reading '" + name + "'");
    by_name.erase(it);
  }
}

CheckpointMeta meta_from_header(const std::map<std::string, std::string>& kv,
                                const std::string& path) {
  CheckpointMeta meta;
  meta.sample_rate = std::stoi(need(kv, "sample_rate", path));
  meta.mel_bands = std::stoi(need(kv, "mel_bands", path));
  meta.stft.fft_size = std::stoi(need(kv, "stft_fft", path));
  meta.stft.hop = std::stoi(need(kv, "stft_hop", path));
  meta.stft.window_len = std::stoi(need(kv, "stft_window", path));
  meta.mel_stats.lmin = std::stod(need(kv, "mel_lmin", path));
  meta.mel_stats.lmax = std::stod(need(kv, "mel_lmax", path));
  meta.config_hash = std::stoull(need(kv, "config_hash", path));
  meta.trained_steps = std::stoll(need(kv, "trained_steps", path));
  return meta;
}

}  // namespace

void save_teacher_checkpoint(const std::string& path, const model::TeacherModel& m,
                             const CheckpointMeta& meta) {
  std::ostringstream os;
  os << "kind = teacher\n";
  header_common(os, meta);
  os << "net = " << fmt_hyper(m.hy.net) << "\n";
  os << "log_sigma_floor = " << fmt_double(m.hy.log_sigma_floor) << "\n";
  auto params = const_cast<model::TeacherModel&>(m).named_params();
  write_container(path, os.str(), params);
}

void save_student_checkpoint(const std::string& path, const model::StudentModel& m,
                             const model::CondProjection& cond, const CheckpointMeta& meta) {
  std::ostringstream os;
  os << "kind = student\n";
  header_common(os, meta);
  os << "flows = " << join_ints(m.hy.flow_layers) << "\n";
  os << "reverse_time = " << join_ints(m.hy.reverse_time) << "\n";
  os << "net = " << fmt_hyper(m.hy.base) << "\n";
  auto params = const_cast<model::StudentModel&>(m).named_params();
  auto& c = const_cast<model::CondProjection&>(cond);
  c.append_params("cond.", params);
  write_container(path, os.str(), params);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  require(f.good() && std::memcmp(magic, kMagic, 8) == 0,
          "checkpoint " + path + ": bad magic (not a checkpoint file)");
  const uint32_t version = get_u32(f);
  require(version == kVersion, "checkpoint " + path + ": unsupported version " +
                                   std::to_string(version));
  const uint64_t hlen = get_u64(f);
  require(hlen < (1u << 20), "checkpoint " + path + ": unreasonable header length");
  std::string header(hlen, '\0');
  f.read(header.data(), static_cast<std::streamsize>(hlen));
  require(f.good(), "checkpoint " + path + ": truncated header");
  const auto kv = parse_header(header);
  const std::string kind = need(kv, "kind", path);

  LoadedCheckpoint out;
  out.meta = meta_from_header(kv, path);
  if (kind == "teacher") {
    out.kind = CheckpointKind::Teacher;
    out.teacher.hy.net = parse_hyper(need(kv, "net", path));
    out.teacher.hy.mel_bands = out.meta.mel_bands;
    out.teacher.hy.log_sigma_floor = std::stod(need(kv, "log_sigma_floor", path));
    out.teacher.init(0);  // allocate shapes, then overwrite
    read_blobs_into(f, path, out.teacher.named_params());
  } else if (kind == "student") {
    out.kind = CheckpointKind::Student;
    out.student.hy.flow_layers = parse_int_list(need(kv, "flows", path));
    out.student.hy.reverse_time = parse_int_list(need(kv, "reverse_time", path));
    out.student.hy.base = parse_hyper(need(kv, "net", path));
    out.student.hy.mel_bands = out.meta.mel_bands;
    out.student.init(0);
    auto params = out.student.named_params();
    out.student.cond.append_params("cond.", params);
    read_blobs_into(f, path, params);
  } else {
    throw ConfigError("checkpoint " + path + ": unknown kind '" + kind + "'");
  }
  return out;
}

CheckpointKind peek_checkpoint_kind(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  require(f.good() && std::memcmp(magic, kMagic, 8) == 0,
          "checkpoint " + path + ": bad magic (not a checkpoint file)");
  get_u32(f);
  const uint64_t hlen = get_u64(f);
  std::string header(hlen, '\0');
  f.read(header.data(), static_cast<std::streamsize>(hlen));
  const auto kv = parse_header(header);
  const std::string kind = need(kv, "kind", path);
  return kind == "teacher" ? CheckpointKind::Teacher : CheckpointKind::Student;
}

}  // namespace clar::harness
