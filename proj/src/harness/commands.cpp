// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "harness/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "harness/metrics.hpp"

namespace clar::harness {

namespace fs = std::filesystem;

namespace {

std::string hist_path(const std::string& dir, int64_t step) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "hist_%06lld.csv", static_cast<long long>(step));
  return dir + "/" + buf;
}

void write_run_manifest(const ExperimentConfig& cfg, const std::string& command,
                        const std::vector<std::string>& files) {
  const std::string path = cfg.out_dir + "/run_manifest.txt";
  std::ofstream f(path);
  require(f.good(), "cannot write run manifest " + path);
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.config_hash));
  f << "provenance = clarinet " << kVersion << " config " << hash << " seed " << cfg.seed << "\n";
  f << "command = " << command << "\n";
  for (const auto& rel : files) {
    const std::string full = cfg.out_dir + "/" + rel;
    require(fs::exists(full), "run manifest: declared output missing: " + full);
    f << "file = " << rel << "\n";
  }
  require(f.good(), "run manifest write failed");
}

CheckpointMeta meta_from(const ExperimentConfig& cfg, const dsp::MelStats& stats,
                         int64_t trained_steps) {
  CheckpointMeta meta;
  meta.sample_rate = cfg.data.sample_rate;
  meta.mel_bands = cfg.mel_bands;
  meta.stft = cfg.stft;
  meta.mel_stats = stats;
  meta.config_hash = cfg.config_hash;
  meta.trained_steps = trained_steps;
  return meta;
}

dsp::AudioClip synth_cond_clip(const ExperimentConfig& cfg, int64_t num_samples, int sample_rate) {
  dsp::SynthSpec spec = cfg.data;
  spec.sample_rate = sample_rate;
  spec.clip_len = static_cast<int>(num_samples);
  spec.num_clips = 1;
  return dsp::synth_dataset(spec, cfg.seed)[0];
}

}  // namespace

TrainTeacherResult run_train_teacher(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  Dataset ds = build_dataset(cfg);
  write_dataset(ds, cfg.out_dir + "/data");

  model::TeacherModel teacher;
  teacher.hy = cfg.teacher;
  teacher.init(cfg.seed);

  ad::Adam opt(cfg.train.adam);
  auto named = teacher.named_params();
  std::vector<ad::Array*> ptrs;
  for (auto& [n, a] : named) ptrs.push_back(a);
  opt.attach(std::move(ptrs));

  CsvWriter csv(cfg.out_dir + "/teacher_metrics.csv", {"step", "nll", "lr", "clip_fraction"});
  TrainTeacherResult out;
  const int nclips = static_cast<int>(ds.clips.size());
  for (int64_t step = 0; step < cfg.train.steps; ++step) {
    const double lr = opt.effective_lr();
    ad::Tape tape;
    ad::Var loss;
    double clip_frac = 0.0;
    for (int b = 0; b < cfg.train.batch; ++b) {
      const int ci = static_cast<int>((step * cfg.train.batch + b) % nclips);
      model::GaussianOutVar pred =
          teacher.forward_teacher_forced(tape, ds.clips[ci].samples, ds.cond_up[ci], true);
      clip_frac += teacher.clip_fraction(pred);
      ad::Var nll = teacher.nll_var(tape, pred, ds.clips[ci].samples);
      loss = loss.valid() ? ad::add(loss, nll) : nll;
    }
    loss = ad::scale(loss, 1.0 / double(cfg.train.batch));
    clip_frac /= double(cfg.train.batch);
    const double loss_value = loss.value().v[0];
    if (!std::isfinite(loss_value))
      throw NumericError("train-teacher: non-finite loss at step " + std::to_string(step));
    tape.backward(loss);
    std::vector<ad::Array> grads;
    grads.reserve(named.size());
    for (auto& [n, a] : named) grads.push_back(tape.grad_array(*a));
    opt.step(grads);

    if (step % cfg.train.metrics_interval == 0 || step + 1 == cfg.train.steps) {
      csv.row({CsvWriter::num(step), CsvWriter::num(loss_value), CsvWriter::num(lr),
               CsvWriter::num(clip_frac)});
      out.nll_history.push_back(loss_value);
    }
    out.final_nll = loss_value;
    if (cfg.train.checkpoint_interval > 0 && (step + 1) % cfg.train.checkpoint_interval == 0 &&
        step + 1 < cfg.train.steps) {
      char name[48];
      std::snprintf(name, sizeof name, "teacher_%06lld.ckpt", static_cast<long long>(step + 1));
      save_teacher_checkpoint(cfg.out_dir + "/" + name, teacher,
                              meta_from(cfg, ds.stats, step + 1));
    }
  }
  csv.flush();
  out.checkpoint_path = cfg.out_dir + "/teacher.ckpt";
  save_teacher_checkpoint(out.checkpoint_path, teacher, meta_from(cfg, ds.stats, cfg.train.steps));
  write_run_manifest(cfg, "train-teacher",
                     {"teacher.ckpt", "teacher_metrics.csv", "data/manifest.tsv",
                      "data/mel_stats.txt"});
  return out;
}

DistillResult run_distill(const ExperimentConfig& cfg, const std::string& teacher_ckpt) {
  fs::create_directories(cfg.out_dir);
  LoadedCheckpoint lc = load_checkpoint(teacher_ckpt);
  require(lc.kind == CheckpointKind::Teacher,
          "distill: " + teacher_ckpt + " is not a teacher checkpoint");
  const model::TeacherModel& teacher = lc.teacher;

  model::StudentModel student;
  student.hy = cfg.student;
  require(student.hy.base.cond_channels == teacher.hy.net.cond_channels,
          "distill: student cond_channels " + std::to_string(student.hy.base.cond_channels) +
              " does not match the teacher checkpoint (" +
              std::to_string(teacher.hy.net.cond_channels) + ")");
  require(cfg.mel_bands == lc.meta.mel_bands,
          "distill: mel.bands does not match the teacher checkpoint");
  student.hy.mel_bands = lc.meta.mel_bands;
  student.init(cfg.seed + 1);

  // data from the config; conditioner pipeline frozen from teacher training
  dsp::SynthSpec data = cfg.data;
  data.sample_rate = lc.meta.sample_rate;
  std::vector<dsp::AudioClip> clips = dsp::synth_dataset(data, cfg.seed);
  std::vector<ad::Array> conds;
  for (const auto& clip : clips)
    conds.push_back(conditioner_for(clip, lc.meta.mel_bands, lc.meta.stft, lc.meta.mel_stats,
                                    clip.length()));

  distill::Distiller dist(teacher, student, cfg.distill.loss, cfg.distill.grad, cfg.distill.adam,
                          cfg.stft, cfg.seed);
  CsvWriter csv(cfg.out_dir + "/distill_metrics.csv",
                {"step", "kl_loss", "reg_term", "stft_loss", "grad_norm", "masked_flag", "lr"});
  DistillResult out;
  std::vector<std::string> outputs = {"student.ckpt", "distill_metrics.csv"};
  const int nclips = static_cast<int>(clips.size());
  for (int64_t step = 0; step < cfg.distill.steps; ++step) {
    std::vector<distill::DistillBatchItem> batch;
    for (int b = 0; b < cfg.distill.batch; ++b) {
      const int ci = static_cast<int>((step * cfg.distill.batch + b) % nclips);
      batch.push_back({&clips[ci].samples, &conds[ci]});
    }
    const distill::DistillStepMetrics m = dist.step(batch);
    if (step % cfg.distill.metrics_interval == 0 || step + 1 == cfg.distill.steps) {
      csv.row({CsvWriter::num(m.step), CsvWriter::num(m.kl), CsvWriter::num(m.reg),
               CsvWriter::num(m.stft), CsvWriter::num(m.grad_norm),
               CsvWriter::num(static_cast<int64_t>(m.masked ? 1 : 0)), CsvWriter::num(m.lr)});
      out.reg_kl_history.push_back(m.kl + m.reg);
    }
    if (cfg.distill.histogram_interval > 0 &&
        (step + 1) % cfg.distill.histogram_interval == 0) {
      const std::string hp = hist_path(cfg.out_dir, step + 1);
      write_histogram(hp, dist.last_histogram());
      out.overlap_history.push_back(dist.last_histogram().overlap());
      outputs.push_back(fs::path(hp).filename().string());
    }
  }
  csv.flush();
  out.aborted_steps = dist.aborted_steps();
  out.checkpoint_path = cfg.out_dir + "/student.ckpt";
  CheckpointMeta meta = lc.meta;
  meta.config_hash = cfg.config_hash;
  meta.trained_steps = cfg.distill.steps;
  save_student_checkpoint(out.checkpoint_path, student, teacher.cond, meta);
  write_run_manifest(cfg, "distill", outputs);
  return out;
}

void run_sample(const ExperimentConfig& cfg, const std::string& ckpt_path, int64_t num_samples,
                uint64_t seed, double temperature, const std::string& out_wav,
                const std::string& cond_wav) {
  require(num_samples >= 1, "sample: num_samples must be >= 1");
  LoadedCheckpoint lc = load_checkpoint(ckpt_path);
  dsp::AudioClip source;
  if (!cond_wav.empty()) {
    source = dsp::read_wav(cond_wav);
    require(source.sample_rate == lc.meta.sample_rate,
            "sample: conditioner wav rate " + std::to_string(source.sample_rate) +
                " does not match checkpoint rate " + std::to_string(lc.meta.sample_rate));
  } else {
    source = synth_cond_clip(cfg, num_samples, lc.meta.sample_rate);
  }
  const ad::Array cond_up = conditioner_for(source, lc.meta.mel_bands, lc.meta.stft,
                                            lc.meta.mel_stats, num_samples);
  dsp::AudioClip out;
  if (lc.kind == CheckpointKind::Teacher) {
    out = lc.teacher.ar_sample(cond_up, num_samples, seed, temperature, lc.meta.sample_rate);
  } else {
    Rng rng(seed);
    std::vector<double> z0(num_samples);
    for (auto& z : z0) z = temperature * rng.gauss();
    const model::IafOut s =
        model::iaf_sample(lc.student, z0, cond_up, lc.student.cond, cfg.workers);
    out.sample_rate = lc.meta.sample_rate;
    out.samples = s.x;
  }
  for (double v : out.samples)
    if (!std::isfinite(v)) throw NumericError("sample: generated non-finite audio");
  dsp::write_wav(out_wav, out);
}

BenchReport run_bench(const ExperimentConfig& cfg, const std::string& teacher_ckpt,
                      const std::string& student_ckpt, int64_t num_samples) {
  LoadedCheckpoint tl = load_checkpoint(teacher_ckpt);
  LoadedCheckpoint sl = load_checkpoint(student_ckpt);
  require(tl.kind == CheckpointKind::Teacher, "bench: first checkpoint must be a teacher");
  require(sl.kind == CheckpointKind::Student, "bench: second checkpoint must be a student");
  const int tlayers = tl.teacher.hy.net.layers;
  const int slayers = sl.student.total_layers();
  require(tlayers == slayers, "bench: teacher has " + std::to_string(tlayers) +
                                  " layers but the student stack totals " +
                                  std::to_string(slayers) +
                                  "; benchmark requires matched layer counts");
  require(tl.meta.sample_rate == sl.meta.sample_rate, "bench: checkpoint sample rates differ");

  const dsp::AudioClip clip = synth_cond_clip(cfg, num_samples, tl.meta.sample_rate);
  const ad::Array cond_t = conditioner_for(clip, tl.meta.mel_bands, tl.meta.stft,
                                           tl.meta.mel_stats, num_samples);
  const ad::Array cond_s = conditioner_for(clip, sl.meta.mel_bands, sl.meta.stft,
                                           sl.meta.mel_stats, num_samples);

  using clock = std::chrono::steady_clock;
  BenchReport r;
  r.num_samples = num_samples;
  r.teacher_layers = tlayers;
  r.student_layers = slayers;
  r.workers = cfg.workers;

  Rng rng(cfg.seed);
  std::vector<double> z0(num_samples);
  for (auto& z : z0) z = rng.gauss();

  // One untimed warmup per path, then best of three timed passes, so one-time
  // allocator and cache effects stay out of the ratio for both sides alike.
  auto best_of = [](auto&& fn) {
    fn();
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = clock::now();
      fn();
      const auto t1 = clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  dsp::AudioClip ar;
  model::IafOut s;
  const double tsec = best_of(
      [&] { ar = tl.teacher.ar_sample(cond_t, num_samples, cfg.seed, 1.0, tl.meta.sample_rate); });
  const double ssec =
      best_of([&] { s = model::iaf_sample(sl.student, z0, cond_s, sl.student.cond, cfg.workers); });

  // keep the results alive so the timed passes cannot be elided
  require(ar.samples.size() == s.x.size(), "bench: sample count mismatch");
  require(tsec > 0.0 && ssec > 0.0, "bench: timer resolution too coarse for this size");
  r.teacher_samples_per_sec = double(num_samples) / tsec;
  r.student_samples_per_sec = double(num_samples) / ssec;
  r.speedup = r.student_samples_per_sec / r.teacher_samples_per_sec;
  return r;
}

std::string format_bench(const BenchReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "num_samples = %lld\n"
                "teacher_layers = %d\n"
                "student_layers = %d\n"
                "teacher_samples_per_sec = %.2f\n"
                "student_samples_per_sec = %.2f\n"
                "speedup = %.3f\n"
                "workers = %d\n",
                static_cast<long long>(r.num_samples), r.teacher_layers, r.student_layers,
                r.teacher_samples_per_sec, r.student_samples_per_sec, r.speedup, r.workers);
  return buf;
}

EvalKlResult run_eval_kl(const ExperimentConfig& cfg, const std::string& teacher_ckpt,
                         const std::string& student_ckpt, int64_t draws) {
  require(draws >= 1, "eval-kl: draws must be >= 1");
  LoadedCheckpoint tl = load_checkpoint(teacher_ckpt);
  LoadedCheckpoint sl = load_checkpoint(student_ckpt);
  require(tl.kind == CheckpointKind::Teacher, "eval-kl: first checkpoint must be a teacher");
  require(sl.kind == CheckpointKind::Student, "eval-kl: second checkpoint must be a student");
  require(tl.teacher.hy.net.cond_channels == sl.student.hy.base.cond_channels,
          "eval-kl: checkpoints have incompatible conditioner channels");

  dsp::SynthSpec data = cfg.data;
  data.sample_rate = tl.meta.sample_rate;
  std::vector<dsp::AudioClip> clips = dsp::synth_dataset(data, cfg.seed);
  double mean = 0.0, m2 = 0.0;
  int64_t n = 0;
  for (size_t ci = 0; ci < clips.size(); ++ci) {
    const int64_t nclips = static_cast<int64_t>(clips.size());
    const int64_t share = draws / nclips + (static_cast<int64_t>(ci) < draws % nclips ? 1 : 0);
    if (share == 0) continue;
    const ad::Array cond = conditioner_for(clips[ci], tl.meta.mel_bands, tl.meta.stft,
                                           tl.meta.mel_stats, clips[ci].length());
    // student samples under its own conditioner projection
    const distill::McEstimate e = distill::sequence_kl_estimate(
        tl.teacher, sl.student, cond, sl.student.cond, clips[ci].length(), share,
        cfg.seed + 17 * ci, cfg.workers);
    // merge the per-clip moments
    const double d = e.mean - mean;
    const int64_t nn = n + e.draws;
    mean += d * double(e.draws) / double(nn);
    m2 += e.variance * double(e.draws - 1) + d * d * double(n) * double(e.draws) / double(nn);
    n = nn;
  }
  EvalKlResult out;
  out.draws = n;
  out.mean = mean;
  const double var = n > 1 ? m2 / double(n - 1) : 0.0;
  out.std_error = std::sqrt(var / double(n));
  return out;
}

}  // namespace clar::harness
