// Acceptance run: one PASS/FAIL line per criterion.  `acceptance 3 9` runs a subset.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "elgar/audio.hpp"
#include "elgar/diffusion.hpp"
#include "elgar/error.hpp"
#include "elgar/geometry.hpp"
#include "elgar/io.hpp"
#include "elgar/losses.hpp"
#include "elgar/metrics.hpp"
#include "elgar/pipeline.hpp"
#include "elgar/train.hpp"
#include "support.hpp"

using namespace elgar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("elgar_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// --- 1 ---------------------------------------------------------------------

Outcome rotation_round_trip() {
  std::mt19937_64 rng(1);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Mat3 R = testing::random_rotation(rng);
    worst = std::max(worst, (rot6d_to_matrix(matrix_to_rot6d(R)) - R).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-9, fmt("10^4 rotations, max error %.2e", worst)};
}

// --- 2 ---------------------------------------------------------------------

double best_rmsd_for(const Mat3& R, const std::vector<Vec3>& P, const std::vector<Vec3>& Q, const Vec3& pc,
                     const Vec3& qc) {
  // the optimal translation for a fixed rotation aligns the centroids
  const Vec3 t = qc - R * pc;
  double acc = 0;
  for (size_t i = 0; i < P.size(); ++i) acc += (R * P[i] + t - Q[i]).squaredNorm();
  return std::sqrt(acc / P.size());
}

Outcome kabsch_optimality() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  int violations = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<Vec3> P(12), Q(12);
    const Mat3 R0 = testing::random_rotation(rng);
    const Vec3 t0(n(rng), n(rng), n(rng));
    Vec3 pc = Vec3::Zero(), qc = Vec3::Zero();
    for (int i = 0; i < 12; ++i) {
      P[i] = Vec3(n(rng), n(rng), n(rng)) * 0.3;
      Q[i] = R0 * P[i] + t0 + Vec3(n(rng), n(rng), n(rng)) * 0.02;
      pc += P[i] / 12;
      qc += Q[i] / 12;
    }
    const KabschResult k = kabsch(P, Q);
    for (int trial = 0; trial < 100000; ++trial) {
      const double r = best_rmsd_for(testing::random_rotation(rng), P, Q, pc, qc);
      tightest = std::min(tightest, r - k.rmsd);
      if (r < k.rmsd - 1e-12) ++violations;
    }
  }
  return {violations == 0, fmt("100 instances x 10^5 rotations, %d beat Kabsch; closest margin %.2e m", violations,
                               tightest)};
}

// --- 3 ---------------------------------------------------------------------

Outcome segment_oracle() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    const Vec3 a0(u(rng), u(rng), u(rng)), a1(u(rng), u(rng), u(rng));
    const Vec3 b0(u(rng), u(rng), u(rng)), b1(u(rng), u(rng), u(rng));
    const double closed = segment_segment_distance(a0, a1, b0, b1).distance;
    // |p(s) - q(u)| is convex on the unit square, so zooming a 100 x 100 grid (10^4 samples
    // per level) onto the best cell cannot leave the global basin.
    double brute = std::numeric_limits<double>::infinity();
    double s_lo = 0, s_hi = 1, u_lo = 0, u_hi = 1;
    for (int level = 0; level < 4; ++level) {
      double best_s = 0, best_u = 0;
      for (int i = 0; i < 100; ++i) {
        const double s = s_lo + (s_hi - s_lo) * i / 99.0;
        const Vec3 p = a0 + s * (a1 - a0);
        for (int j = 0; j < 100; ++j) {
          const double uu = u_lo + (u_hi - u_lo) * j / 99.0;
          const double d = (p - (b0 + uu * (b1 - b0))).norm();
          if (d < brute) brute = d, best_s = s, best_u = uu;
        }
      }
      const double ds = 2 * (s_hi - s_lo) / 99.0, du = 2 * (u_hi - u_lo) / 99.0;
      s_lo = std::max(0.0, best_s - ds), s_hi = std::min(1.0, best_s + ds);
      u_lo = std::max(0.0, best_u - du), u_hi = std::min(1.0, best_u + du);
    }
    worst = std::max(worst, std::abs(closed - brute));
    if (closed > brute + 1e-12) worst = std::numeric_limits<double>::infinity();
  }
  return {worst < 1e-4, fmt("1000 pairs, 4 zoom levels of 10^4 samples, max |closed - brute| %.2e", worst)};
}

// --- 4 ---------------------------------------------------------------------

Outcome loss_correctness() {
  const SynthPerformance p = testing::performance(4, 5);
  const Matrix gt = p.motion.frames.topRows(24);
  const ConditionTrack cond = slice(p.condition, 0, 24);
  const LossContext ctx{&testing::skeleton(), &testing::cello(), &cond};
  const LossBreakdown zero = evaluate_losses(gt, gt, ctx, LossWeights{});
  const double zmax = std::max({zero.simple, zero.foot, zero.pos, zero.rotvel, zero.posvel, zero.hand, zero.bow});

  using Field = std::pair<double LossWeights::*, double LossBreakdown::*>;
  const Field fields[] = {{&LossWeights::simple, &LossBreakdown::simple}, {&LossWeights::foot, &LossBreakdown::foot},
                          {&LossWeights::pos, &LossBreakdown::pos},       {&LossWeights::rotvel, &LossBreakdown::rotvel},
                          {&LossWeights::posvel, &LossBreakdown::posvel}, {&LossWeights::hand, &LossBreakdown::hand},
                          {&LossWeights::bow, &LossBreakdown::bow}};
  double worst = 0;
  unsigned seed = 40;
  for (const auto& [wf, bf] : fields) {
    std::mt19937_64 rng(seed++);
    std::normal_distribution<double> n(0.0, 0.02);
    Matrix pred = gt;
    for (int i = 0; i < pred.size(); ++i) pred.data()[i] += n(rng);
    LossWeights w{0, 0, 0, 0, 0, 0, 0};
    w.*wf = 1.0;
    Matrix grad;
    evaluate_losses(pred, gt, ctx, w, &grad);
    std::vector<int> support;
    for (int i = 0; i < grad.size(); ++i)
      if (std::abs(grad.data()[i]) > 1e-8) support.push_back(i);
    if (support.empty()) return {false, "empty gradient"};
    std::uniform_int_distribution<int> any(0, static_cast<int>(grad.size()) - 1);
    std::uniform_int_distribution<int> sup(0, static_cast<int>(support.size()) - 1);
    for (int trial = 0; trial < 100; ++trial) {
      const int idx = trial % 2 ? any(rng) : support[sup(rng)];
      const int r = idx % pred.rows(), c = idx / pred.rows();
      const double fd = testing::central_difference(pred, r, c, 1e-5, [&] { return evaluate_losses(pred, gt, ctx, w).*bf; });
      worst = std::max(worst, testing::rel_error(grad(r, c), fd));
    }
  }
  return {zmax < 1e-9 && worst < 1e-4,
          fmt("max loss on ground truth %.2e; 7 x 100 coordinates, max gradient rel error %.2e", zmax, worst)};
}

// --- 5 ---------------------------------------------------------------------

Outcome schedule_and_sampler() {
  std::string notes;
  bool ok = true;
  for (int T : {10, 50, 100, 1000}) {
    const NoiseSchedule s = cosine_schedule(T);
    bool inv = s.alpha_bar[0] == 1.0 && s.alpha_bar[T] < 1e-3;
    for (int t = 1; t <= T; ++t) inv = inv && s.beta[t] > 0 && s.beta[t] < 1 && s.alpha_bar[t] < s.alpha_bar[t - 1];
    ok = ok && inv;
    notes += fmt("T=%d %s (abar_1=%.4f) ", T, inv ? "ok" : "BROKEN", s.alpha_bar[1]);
  }

  std::mt19937_64 rng(5);
  const Matrix x0 = standard_normal(6, 9, rng);
  const Matrix eps = standard_normal(6, 9, rng);
  double inv_err = 0;
  const NoiseSchedule s = cosine_schedule(1000);
  for (int t = 0; t < 1000; ++t) {
    const Matrix xt = q_sample(x0, t, eps, s);
    const Matrix back = (xt - std::sqrt(1 - s.alpha_bar[t]) * eps) / std::sqrt(s.alpha_bar[t]);
    inv_err = std::max(inv_err, (back - x0).cwiseAbs().maxCoeff());
  }

  double ddim_err = 0;
  const Matrix target = standard_normal(5, 7, rng);
  const X0Model oracle = [&](const Matrix&, int) { return target; };
  for (int T : {10, 50, 100, 1000})
    for (int steps : {1, 5, 10}) {
      const NoiseSchedule sc = cosine_schedule(T);
      const Matrix out = ddim_sample(oracle, 5, 7, sc, std::min(steps, T), 7);
      ddim_err = std::max(ddim_err, (out - target).cwiseAbs().maxCoeff());
    }
  ok = ok && inv_err < 1e-12 && ddim_err < 1e-6;
  return {ok, notes + fmt("| inversion over t<T %.2e | DDIM oracle %.2e", inv_err, ddim_err)};
}

// --- 6 ---------------------------------------------------------------------

Outcome denoiser_checks() {
  const SynthPerformance perf = testing::performance(8, 6);

  // zero gates
  DenoiserConfig big;
  big.blocks = 2;
  const DenoiserParams p0 = init_denoiser(big, 1);
  std::mt19937_64 rng(6);
  const ConditionTrack c0 = slice(perf.condition, 0, 30);
  const Matrix x30 = standard_normal(30, kFeatureDim, rng);
  ForwardProbe probe;
  denoiser_forward(p0, x30, 400, &c0.features, &probe);
  bool zero = !probe.branches.empty();
  for (const auto& b : probe.branches) zero = zero && b.isZero(0);

  // miniature gradient check
  DenoiserConfig mini;
  mini.blocks = 1;
  mini.dim = 8;
  mini.heads = 2;
  mini.max_frames = 8;
  DenoiserParams pm = init_denoiser(mini, 2);
  std::normal_distribution<double> n(0.0, 0.2);
  for (auto& t : pm.tensors)
    for (int i = 0; i < t.size(); ++i) t.data()[i] += n(rng);
  const NoiseSchedule sched = cosine_schedule(1000);
  TrainItem item;
  item.x0 = perf.motion.frames.middleRows(10, 4);
  item.condition = slice(perf.condition, 10, 4);
  item.t = 300;
  item.eps = standard_normal(4, kFeatureDim, rng);
  const LossWeights w;
  auto loss = [&] {
    const Matrix xt = q_sample(item.x0, item.t, item.eps, sched);
    const LossContext ctx{&testing::skeleton(), &testing::cello(), &item.condition};
    return evaluate_losses(denoiser_forward(pm, xt, item.t, &item.condition.features), item.x0, ctx, w).total;
  };
  std::vector<Matrix> grads = zero_gradients(pm);
  denoiser_backward(pm, item, sched, w, testing::skeleton(), testing::cello(), grads);
  std::vector<std::pair<int, int>> coords;
  for (size_t i = 0; i < grads.size(); ++i)
    for (int j = 0; j < grads[i].size(); ++j)
      if (grads[i].data()[j] != 0.0) coords.emplace_back(static_cast<int>(i), j);
  std::uniform_int_distribution<size_t> pick(0, coords.size() - 1);
  double grad_err = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto [ti, j] = coords[pick(rng)];
    double& v = pm.tensors[ti].data()[j];
    const double keep = v, h = 1e-5;
    v = keep + h;
    const double up = loss();
    v = keep - h;
    const double down = loss();
    v = keep;
    grad_err = std::max(grad_err, testing::rel_error(grads[ti].data()[j], (up - down) / (2 * h)));
  }

  // single-slice overfit on L_simple, one thread
  DenoiserConfig oc;
  oc.blocks = 1;
  oc.dim = 64;
  oc.heads = 4;
  const std::vector<TrainSample> slice_data = {make_slices(perf.motion, perf.condition, 150, 150).front()};
  TrainSettings ts;
  ts.batch = 4;
  ts.threads = 1;
  ts.adam.lr = 1e-4;
  ts.seed = 8;
  ts.cond_dropout = 0.0;
  const LossWeights simple_only{1, 0, 0, 0, 0, 0, 0};
  DenoiserParams po = init_denoiser(oc, 3);
  std::mt19937_64 eval_rng(9);
  std::vector<TrainItem> probe_items;
  std::uniform_int_distribution<int> tdist(1, 1000);
  for (int i = 0; i < 16; ++i) {
    TrainItem it;
    it.x0 = slice_data[0].x0;
    it.condition = slice_data[0].condition;
    it.t = tdist(eval_rng);
    it.eps = standard_normal(150, kFeatureDim, eval_rng);
    probe_items.push_back(std::move(it));
  }
  auto held_out_simple = [&](const DenoiserParams& p) {
    double acc = 0;
    for (const auto& it : probe_items) {
      const Matrix xt = q_sample(it.x0, it.t, it.eps, sched);
      acc += loss_simple(denoiser_forward(p, xt, it.t, &it.condition.features), it.x0) / probe_items.size();
    }
    return acc;
  };
  int steps = 0;
  double last = held_out_simple(po);
  const int chunk = 250;
  while (steps < 2000 && last >= 1e-3) {
    ts.steps = chunk;
    ts.seed += 1;
    po = train_denoiser(slice_data, po, sched, simple_only, testing::skeleton(), testing::cello(), ts, nullptr);
    steps += chunk;
    last = held_out_simple(po);
  }
  return {zero && grad_err < 1e-3 && last < 1e-3,
          fmt("%zu branches exactly 0: %s; mini gradient rel error %.2e; overfit L_simple %.2e after %d steps",
              probe.branches.size(), zero ? "yes" : "no", grad_err, last, steps)};
}

// --- 7 ---------------------------------------------------------------------

AudioClip tone(const std::vector<std::pair<double, double>>& parts, bool saw) {
  AudioClip c;
  double phase = 0;
  for (auto [hz, seconds] : parts) {
    const int count = static_cast<int>(std::lround(seconds * c.sample_rate));
    for (int i = 0; i < count; ++i) {
      c.samples.push_back(saw ? 0.5 * (2 * phase - 1) : 0.5 * std::sin(2 * std::numbers::pi * phase));
      phase += hz / c.sample_rate;
      phase -= std::floor(phase);
    }
  }
  return c;
}

Outcome pitch_extraction() {
  const CelloSpec& c = testing::cello();
  double worst_fraction = 1.0;
  for (const auto& s : c.strings)
    for (bool saw : {false, true}) {
      const auto f0 = extract_f0(tone({{s.open_hz, 2.0}}, saw), 30.0);
      int voiced = 0, good = 0;
      for (double f : f0) {
        if (f <= 0) continue;
        ++voiced;
        good += std::abs(f - s.open_hz) <= 1.0;
      }
      worst_fraction = std::min(worst_fraction, voiced ? double(good) / voiced : 0.0);
    }

  int octave_errors = 0, frames = 0, mistracked = 0;
  const std::pair<double, double> jumps[] = {{110.0, 220.0}, {220.0, 110.0}, {65.406, 130.81}, {146.83, 293.66}};
  for (auto [lo, hi] : jumps)
    for (bool saw : {false, true}) {
      const auto f0 = extract_f0(tone({{lo, 1.0}, {hi, 1.0}}, saw), 30.0);
      for (int k = 0; k < static_cast<int>(f0.size()); ++k) {
        if (f0[k] <= 0) continue;
        ++frames;
        const bool near_lo = std::abs(f0[k] - lo) <= 1.0, near_hi = std::abs(f0[k] - hi) <= 1.0;
        if (!near_lo && !near_hi) ++octave_errors;
        const bool transition = std::abs(k - 30) <= 1;
        if (!transition && !(k < 30 ? near_lo : near_hi)) ++mistracked;
      }
    }
  return {worst_fraction >= 0.95 && octave_errors == 0 && mistracked == 0,
          fmt("open strings (sine, sawtooth): worst %.1f%% within 1 Hz; octave jumps: %d wrong-octave, %d mistracked "
              "of %d voiced frames",
              100 * worst_fraction, octave_errors, mistracked, frames)};
}

// --- 8 ---------------------------------------------------------------------

Outcome metrics_fixed_point() {
  const RunConfig config = default_run_config();
  const auto& sk = testing::skeleton();
  const auto& c = testing::cello();
  std::vector<EvaluationReport> reports;
  bool detected = true;
  for (int i = 0; i < config.synth.train_takes + config.synth.test_takes; ++i) {
    const auto score = random_score(config.synth.notes_per_take, 100 + i, c, config.synth.min_note_s,
                                    config.synth.max_note_s);
    SynthOptions o;
    o.seed = 100 + i;
    o.down_bow_first = i % 2 == 0;
    const SynthPerformance p = synth_performance(score, sk, c, o);
    MotionSequence stored = p.motion;
    quantize_to_f32(stored);
    reports.push_back(evaluate_motion(stored, p.condition.f0, sk, c, &stored));
    detected = detected && bowing_f1(detect_bowing_attacks(stored, sk, c), p.attack_frames).f1 == 1.0;
  }
  const EvaluationReport r = pool_reports(reports);

  std::vector<int> gt;
  for (int k = 20; k < 600; k += 25) gt.push_back(k);
  std::vector<int> two = gt, four = gt;
  for (int& k : two) k += 2;
  for (int& k : four) k += 4;
  const double f2 = bowing_f1(two, gt).f1, f4 = bowing_f1(four, gt).f1;
  const bool ok = r.fcd.mean_mm < 1e-3 && r.bsd.mean_mm < 1e-3 && r.bowing->f1 == 1.0 &&
                  std::abs(*r.bcs - 1.0) < 1e-12 && detected && f2 == 1.0 && f4 == 0.0;
  return {ok, fmt("%zu takes: FCD %.2e mm, BSD %.2e mm, BF1 %.4f, BCS %.6f, detector vs score %s; shift 2 F1 %.1f, "
                  "shift 4 F1 %.1f",
                  reports.size(), r.fcd.mean_mm, r.bsd.mean_mm, r.bowing->f1, *r.bcs, detected ? "exact" : "off", f2,
                  f4)};
}

// --- 9 ---------------------------------------------------------------------

RunConfig ablation_config(const fs::path& dir) {
  RunConfig c = load_run_config(std::string(ELGAR_SOURCE_DIR) + "/configs/ablation.json");
  c.dataset_dir = (dir / "dataset").string();
  c.output_dir = (dir / "runs").string();
  return c;
}

Outcome directional_ablation() {
  const fs::path dir = scratch("ablation");
  const RunConfig c = ablation_config(dir);
  const auto rows = run_ablation(c, c.output_dir);
  std::printf("%s", ablation_table(rows).c_str());
  const auto find = [&](const std::string& name) -> const EvaluationReport& {
    for (const auto& r : rows)
      if (r.name == name) return r.report;
    raise(ErrorCode::InvalidArgument, "missing ablation row " + name);
  };
  const auto& none = find("w/o ICL");
  const auto& hicl = find("w/ HICL");
  const auto& both = find("w/ HICL+BICL");
  const bool bsd = both.bsd.mean_mm < none.bsd.mean_mm;
  const bool fcd = hicl.fcd.mean_mm < none.fcd.mean_mm;
  return {bsd && fcd, fmt("BSD %.2f (HICL+BICL) vs %.2f (w/o ICL): %s; FCD %.2f (HICL) vs %.2f (w/o ICL): %s",
                          both.bsd.mean_mm, none.bsd.mean_mm, bsd ? "lower" : "NOT lower", hicl.fcd.mean_mm,
                          none.fcd.mean_mm, fcd ? "lower" : "NOT lower")};
}

// --- 10 --------------------------------------------------------------------

std::map<std::string, std::string> run_pipeline(const fs::path& dir) {
  fs::remove_all(dir);
  RunConfig c = default_run_config();
  c.dataset_dir = (dir / "dataset").string();
  c.output_dir = (dir / "model").string();
  c.seed = 17;
  c.slice_frames = 60;
  c.overlap_s = 1.0;
  c.sample_steps = 5;
  c.denoiser.blocks = 1;
  c.denoiser.dim = 16;
  c.denoiser.heads = 2;
  c.denoiser.max_frames = 60;
  c.train.steps = 20;
  c.train.batch = 4;
  c.train.checkpoint_every = 10;
  c.synth.train_takes = 2;
  c.synth.test_takes = 1;
  c.synth.notes_per_take = 5;
  synthesize_dataset(c, c.dataset_dir);
  preprocess_dataset(c);
  const DenoiserParams params = train_run(c, c.output_dir);
  const fs::path test = fs::path(c.dataset_dir) / "processed" / "test" / "take_000";
  const ConditionTrack cond = read_condition(test.string() + ".cond.jsonl");
  GenerateOptions o;
  o.guidance_w = c.guidance_w;
  o.steps = c.sample_steps;
  o.overlap_s = c.overlap_s;
  o.seed = c.seed;
  write_motion((dir / "generated.motion").string(), generate_motion(params, cond, o));
  const std::string gt = test.string() + ".motion";
  const EvaluationReport r =
      evaluate_files(c, (dir / "generated.motion").string(), test.string() + ".cond.jsonl", &gt);
  write_file_atomic((dir / "report.json").string(), report_json(r));

  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  return files;
}

Outcome pipeline_determinism() {
  const fs::path dir = scratch("determinism");
  const auto first = run_pipeline(dir);
  const auto second = run_pipeline(dir);
  int differing = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) ++differing;
  }
  const bool ok = differing == 0 && first.size() == second.size() && first.size() > 10;
  return {ok, fmt("synth, preprocess, train, generate, evaluate twice: %zu files, %d differ", first.size(), differing)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion all[] = {
      {1, "rotation round trip", 5, rotation_round_trip},
      {2, "Kabsch optimality", 60, kabsch_optimality},
      {3, "segment-distance oracle", 30, segment_oracle},
      {4, "loss correctness", 60, loss_correctness},
      {5, "schedule and DDIM", 0, schedule_and_sampler},
      {6, "denoiser", 600, denoiser_checks},
      {7, "pitch extraction", 0, pitch_extraction},
      {8, "metrics fixed point", 0, metrics_fixed_point},
      {9, "directional ablation", 2700, directional_ablation},
      {10, "pipeline determinism", 0, pipeline_determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s == 0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::string timing = fmt("%.1f s", secs);
    if (c.budget_s > 0) timing += fmt(" of %.0f s", c.budget_s);
    std::printf("%s %2d %-24s %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
