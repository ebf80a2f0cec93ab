// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace clar::harness {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::pair<std::string, std::string> split_dotted(const std::string& dotted) {
  const size_t dot = dotted.find('.');
  require(dot != std::string::npos && dot > 0 && dot + 1 < dotted.size(),
          "config key must look like section.key, got '" + dotted + "'");
  return {dotted.substr(0, dot), dotted.substr(dot + 1)};
}

}  // namespace

void KvConfig::set(const std::string& dotted_key, const std::string& value) {
  auto [sec, key] = split_dotted(dotted_key);
  sections_[sec][key] = trim(value);
}

bool KvConfig::has(const std::string& dotted_key) const {
  auto [sec, key] = split_dotted(dotted_key);
  auto s = sections_.find(sec);
  return s != sections_.end() && s->second.count(key) != 0;
}

std::string KvConfig::get(const std::string& dotted_key) const {
  require(has(dotted_key), "missing config key '" + dotted_key + "'");
  auto [sec, key] = split_dotted(dotted_key);
  return sections_.at(sec).at(key);
}

std::string KvConfig::get_or(const std::string& dotted_key, const std::string& dflt) const {
  return has(dotted_key) ? get(dotted_key) : dflt;
}

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str(), path);
}

KvConfig KvConfig::parse_string(const std::string& text, const std::string& origin) {
  KvConfig kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']' && line.size() > 2,
              origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    require(eq != std::string::npos,
            origin + ":" + std::to_string(lineno) + ": expected key = value");
    require(!section.empty(),
            origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    const std::string key = trim(line.substr(0, eq));
    require(!key.empty(), origin + ":" + std::to_string(lineno) + ": empty key");
    kv.sections_[section][key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string KvConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [sec, keys] : sections_) {
    os << "[" << sec << "]\n";
    for (const auto& [k, v] : keys) os << k << " = " << v << "\n";
  }
  return os.str();
}

uint64_t KvConfig::hash() const {
  const std::string s = serialize();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

int64_t to_i64(const KvConfig& kv, const std::string& key, int64_t dflt) {
  if (!kv.has(key)) return dflt;
  const std::string s = kv.get(key);
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(s, &pos);
    require(pos == s.size(), "");
    return v;
  } catch (...) {
    throw ConfigError("config key '" + key + "' must be an integer, got '" + s + "'");
  }
}

double to_f64(const KvConfig& kv, const std::string& key, double dflt) {
  if (!kv.has(key)) return dflt;
  const std::string s = kv.get(key);
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    require(pos == s.size(), "");
    return v;
  } catch (...) {
    throw ConfigError("config key '" + key + "' must be a number, got '" + s + "'");
  }
}

bool to_bool(const KvConfig& kv, const std::string& key, bool dflt) {
  if (!kv.has(key)) return dflt;
  const std::string s = kv.get(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config key '" + key + "' must be a boolean, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::vector<int> to_int_list(const KvConfig& kv, const std::string& key,
                             const std::string& dflt) {
  const std::string s = kv.get_or(key, dflt);
  std::vector<int> out;
  for (const auto& item : split_list(s)) {
    try {
      out.push_back(std::stoi(item));
    } catch (...) {
      throw ConfigError("config key '" + key + "' must be a comma list of integers, got '" + s +
                        "'");
    }
  }
  return out;
}

// "freq:amp:phase, freq:amp:phase, ..."
std::vector<dsp::SynthComponent> to_components(const KvConfig& kv, const std::string& key,
                                               const std::string& dflt) {
  const std::string s = kv.get_or(key, dflt);
  std::vector<dsp::SynthComponent> out;
  for (const auto& item : split_list(s)) {
    dsp::SynthComponent c;
    std::istringstream is(item);
    std::string f, a, p;
    std::getline(is, f, ':');
    std::getline(is, a, ':');
    std::getline(is, p, ':');
    try {
      c.freq = std::stod(f);
      c.amp = a.empty() ? 0.5 : std::stod(a);
      c.phase = p.empty() ? 0.0 : std::stod(p);
    } catch (...) {
      throw ConfigError("config key '" + key + "': component '" + item +
                        "' must look like freq:amp:phase");
    }
    out.push_back(c);
  }
  require(!out.empty(), "config key '" + key + "' needs at least one component");
  return out;
}

model::WaveNetHyper wavenet_hyper(const KvConfig& kv, const std::string& sec, int layers_dflt,
                                  int filter_dflt) {
  model::WaveNetHyper h;
  h.layers = static_cast<int>(to_i64(kv, sec + ".layers", layers_dflt));
  h.residual_channels = static_cast<int>(to_i64(kv, sec + ".residual_channels", 32));
  h.skip_channels = static_cast<int>(to_i64(kv, sec + ".skip_channels", 32));
  h.head_channels = static_cast<int>(to_i64(kv, sec + ".head_channels", 32));
  h.cond_channels = static_cast<int>(to_i64(kv, sec + ".cond_channels", 16));
  h.filter_size = static_cast<int>(to_i64(kv, sec + ".filter_size", filter_dflt));
  h.dilation_cycle = static_cast<int>(to_i64(kv, sec + ".dilation_cycle", 5));
  return h;
}

ad::AdamConfig adam_config(const KvConfig& kv, const std::string& sec, int64_t anneal_dflt) {
  ad::AdamConfig a;
  a.lr = to_f64(kv, sec + ".lr", 1e-3);
  a.beta1 = to_f64(kv, sec + ".beta1", 0.9);
  a.beta2 = to_f64(kv, sec + ".beta2", 0.999);
  a.eps = to_f64(kv, sec + ".eps", 1e-8);
  a.anneal_every = to_i64(kv, sec + ".anneal_every", anneal_dflt);
  a.anneal_factor = to_f64(kv, sec + ".anneal_factor", 0.5);
  return a;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_kv(const KvConfig& kv) {
  ExperimentConfig c;
  c.seed = static_cast<uint64_t>(to_i64(kv, "run.seed", 1));
  c.out_dir = kv.get_or("run.out_dir", "runs/default");
  c.workers = static_cast<int>(to_i64(kv, "run.workers", 1));
  require(c.workers >= 1, "run.workers must be >= 1");

  c.data.sample_rate = static_cast<int>(to_i64(kv, "data.sample_rate", 4000));
  c.data.clip_len = static_cast<int>(to_i64(kv, "data.clip_len", 512));
  c.data.num_clips = static_cast<int>(to_i64(kv, "data.num_clips", 4));
  c.data.components = to_components(kv, "data.components", "100:0.4:0, 230:0.2:1.1");
  c.data.noise_amp = to_f64(kv, "data.noise_amp", 0.0);
  c.data.phase_jitter = to_bool(kv, "data.phase_jitter", true);
  c.data.dequantize = to_bool(kv, "data.dequantize", false);

  c.stft.fft_size = static_cast<int>(to_i64(kv, "stft.fft_size", 256));
  c.stft.hop = static_cast<int>(to_i64(kv, "stft.hop", 50));
  c.stft.window_len = static_cast<int>(to_i64(kv, "stft.window_len", 200));
  dsp::validate_stft(c.stft);
  c.mel_bands = static_cast<int>(to_i64(kv, "mel.bands", 16));

  c.teacher.net = wavenet_hyper(kv, "teacher", 10, 2);
  c.teacher.mel_bands = c.mel_bands;
  c.teacher.log_sigma_floor = to_f64(kv, "teacher.log_sigma_floor", -9.0);

  c.student.flow_layers = to_int_list(kv, "student.flows", "6,6,6,6");
  {
    std::string rf_dflt;
    for (size_t i = 0; i < c.student.flow_layers.size(); ++i)
      rf_dflt += (i ? ",0" : "0");
    c.student.reverse_time = to_int_list(kv, "student.reverse_time", rf_dflt);
  }
  require(c.student.reverse_time.size() == c.student.flow_layers.size(),
          "student.reverse_time must have one flag per flow");
  c.student.base = wavenet_hyper(kv, "student", 6, 3);
  require(c.student.base.cond_channels == c.teacher.net.cond_channels,
          "student.cond_channels must match teacher.cond_channels (shared projection)");
  c.student.mel_bands = c.mel_bands;

  c.train.steps = to_i64(kv, "train.steps", 500);
  c.train.adam = adam_config(kv, "train", 0);
  c.train.batch = static_cast<int>(to_i64(kv, "train.batch", 1));
  c.train.metrics_interval = to_i64(kv, "train.metrics_interval", 10);
  c.train.checkpoint_interval = to_i64(kv, "train.checkpoint_interval", 0);
  require(c.train.batch >= 1, "train.batch must be >= 1");
  require(c.train.steps >= 1, "train.steps must be >= 1");
  require(c.train.metrics_interval >= 1, "train.metrics_interval must be >= 1");
  require(c.train.checkpoint_interval >= 0, "train.checkpoint_interval must be >= 0");

  c.distill.steps = to_i64(kv, "distill.steps", 2000);
  c.distill.adam = adam_config(kv, "distill", 0);
  c.distill.batch = static_cast<int>(to_i64(kv, "distill.batch", 1));
  c.distill.metrics_interval = to_i64(kv, "distill.metrics_interval", 10);
  c.distill.histogram_interval = to_i64(kv, "distill.histogram_interval", 200);
  c.distill.loss.lambda = to_f64(kv, "distill.lambda", 4.0);
  {
    const std::string dir = kv.get_or("distill.kl_direction", "reverse");
    if (dir == "reverse")
      c.distill.loss.direction = distill::KlDirection::Reverse;
    else if (dir == "forward")
      c.distill.loss.direction = distill::KlDirection::Forward;
    else
      throw ConfigError("distill.kl_direction must be 'reverse' or 'forward', got '" + dir + "'");
  }
  c.distill.loss.log_sigma_floor = to_f64(kv, "distill.log_sigma_floor", -6.0);
  c.distill.loss.kl_weight = to_f64(kv, "distill.kl_weight", 1.0);
  c.distill.loss.stft_weight = to_f64(kv, "distill.stft_weight", 1.0);
  c.distill.loss.mask_threshold = to_f64(kv, "distill.mask_threshold", 10.0);
  c.distill.loss.warmup_steps = to_i64(kv, "distill.warmup_steps", 500);
  c.distill.grad.norm_threshold = to_f64(kv, "distill.grad_norm_threshold", 1000.0);
  c.distill.grad.tight_clip = to_f64(kv, "distill.tight_clip", 0.1);
  c.distill.grad.loose_clip = to_f64(kv, "distill.loose_clip", 5.0);
  require(c.distill.batch >= 1, "distill.batch must be >= 1");
  require(c.distill.steps >= 1, "distill.steps must be >= 1");
  require(c.distill.metrics_interval >= 1, "distill.metrics_interval must be >= 1");
  require(c.distill.histogram_interval >= 0, "distill.histogram_interval must be >= 0");

  c.config_hash = kv.hash();
  return c;
}

KvConfig preset_config(const std::string& name) {
  if (name == "smoke") {
    return KvConfig::parse_string(R"(
[run]
seed = 1
out_dir = runs/smoke
[data]
clip_len = 256
num_clips = 2
[stft]
fft_size = 128
hop = 32
window_len = 96
[mel]
bands = 8
[teacher]
layers = 4
residual_channels = 12
skip_channels = 12
head_channels = 12
cond_channels = 8
dilation_cycle = 4
[student]
flows = 2,2
residual_channels = 12
skip_channels = 12
head_channels = 12
cond_channels = 8
dilation_cycle = 4
[train]
steps = 60
metrics_interval = 5
[distill]
steps = 60
metrics_interval = 5
histogram_interval = 20
warmup_steps = 30
)",
                                  "preset:smoke");
  }
  if (name == "overfit") {
    return KvConfig::parse_string(R"(
[run]
seed = 1
out_dir = runs/overfit
[data]
clip_len = 512
num_clips = 1
phase_jitter = false
[train]
steps = 500
[distill]
steps = 2000
)",
                                  "preset:overfit");
  }
  if (name == "paper-shape") {
    return KvConfig::parse_string(R"(
[run]
seed = 1
out_dir = runs/paper_shape
[data]
sample_rate = 24000
clip_len = 6000
num_clips = 8
[stft]
fft_size = 2048
hop = 300
window_len = 1200
[mel]
bands = 80
[teacher]
layers = 20
residual_channels = 64
skip_channels = 64
head_channels = 64
cond_channels = 32
dilation_cycle = 10
[student]
flows = 10,10,10,30
reverse_time = 0,1,0,1
residual_channels = 64
skip_channels = 64
head_channels = 64
cond_channels = 32
dilation_cycle = 10
[train]
steps = 20000
anneal_every = 8000
[distill]
steps = 20000
anneal_every = 8000
)",
                                  "preset:paper-shape");
  }
  throw ConfigError("unknown preset '" + name + "' (available: smoke, overfit, paper-shape)");
}

std::vector<std::string> preset_names() { return {"smoke", "overfit", "paper-shape"}; }

void apply_env_overrides(KvConfig& kv) {
  if (const char* env = std::getenv("CLARINET_SEED")) {
    const std::string s(env);
    // stoull would wrap a negative sign silently, so screen the characters
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("CLARINET_SEED must be an unsigned integer, got '" + s + "'");
    try {
      (void)std::stoull(s);
    } catch (...) {
      throw ConfigError("CLARINET_SEED must be an unsigned integer, got '" + s + "'");
    }
    kv.set("run.seed", s);
  }
}

}  // namespace clar::harness
