#include "elgar/elgar.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <new>
#include <string>

#include "elgar/error.hpp"
#include "elgar/geometry.hpp"
#include "elgar/io.hpp"
#include "elgar/pipeline.hpp"

struct elgar_config {
  elgar::RunConfig config;
};
struct elgar_skeleton {
  elgar::Skeleton skeleton;
};
struct elgar_cello {
  elgar::CelloSpec cello;
};
struct elgar_motion {
  elgar::MotionSequence motion;
};

namespace {

thread_local std::string g_last_error;

elgar_status status_for(elgar::ErrorCode code) {
  using elgar::ErrorCode;
  switch (code) {
    case ErrorCode::DegenerateRotation:
    case ErrorCode::NotARotation:
    case ErrorCode::MissingAnchorJoints:
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::ZeroLengthSegment:
      return ELGAR_ERR_GEOMETRY;
    case ErrorCode::NonFiniteActivation:
    case ErrorCode::ModelFailure:
      return ELGAR_ERR_DIVERGENCE;
    case ErrorCode::FpsMismatch:
    case ErrorCode::BadOverlap:
    case ErrorCode::ShapeMismatch:
      return ELGAR_ERR_ALIGNMENT;
    default:
      return ELGAR_ERR_INPUT;
  }
}

template <class F>
elgar_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return ELGAR_OK;
  } catch (const elgar::Error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ELGAR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ELGAR_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) elgar::raise(elgar::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

elgar::Vec3 v3(const double* p) { return elgar::Vec3(p[0], p[1], p[2]); }

}  // namespace

extern "C" {

const char* elgar_version(void) { return "0.1.0"; }
const char* elgar_last_error(void) { return g_last_error.c_str(); }
void elgar_string_free(char* s) { std::free(s); }
void elgar_buffer_free(double* b) { std::free(b); }

elgar_status elgar_config_load(const char* path, elgar_config** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    auto* c = new elgar_config;
    try {
      c->config = path ? elgar::load_run_config(path) : elgar::default_run_config();
    } catch (...) {
      delete c;
      throw;
    }
    *out = c;
  });
}

void elgar_config_free(elgar_config* c) { delete c; }

elgar_status elgar_config_set_seed(elgar_config* c, uint64_t seed) {
  return guard([&] {
    need(c, "config");
    c->config.seed = seed;
  });
}

elgar_status elgar_config_set_guidance_w(elgar_config* c, double w) {
  return guard([&] {
    need(c, "config");
    if (!std::isfinite(w)) elgar::raise(elgar::ErrorCode::InvalidArgument, "guidance weight must be finite");
    c->config.guidance_w = w;
  });
}

elgar_status elgar_config_set_steps(elgar_config* c, int steps) {
  return guard([&] {
    need(c, "config");
    elgar::RunConfig next = c->config;
    next.sample_steps = steps;
    next.validate();
    c->config = next;
  });
}

elgar_status elgar_config_set_overlap_s(elgar_config* c, double overlap_s) {
  return guard([&] {
    need(c, "config");
    elgar::RunConfig next = c->config;
    next.overlap_s = overlap_s;
    next.validate();
    c->config = next;
  });
}

elgar_status elgar_config_set_output(elgar_config* c, const char* dir) {
  return guard([&] {
    need(c, "config");
    need(dir, "dir");
    c->config.output_dir = dir;
  });
}

elgar_status elgar_config_set_dataset(elgar_config* c, const char* dir) {
  return guard([&] {
    need(c, "config");
    need(dir, "dir");
    c->config.dataset_dir = dir;
  });
}

elgar_status elgar_config_json(const elgar_config* c, char** json) {
  return guard([&] {
    need(c, "config");
    need(json, "json");
    *json = dup(elgar::run_config_json(c->config));
  });
}

elgar_status elgar_skeleton_load(const char* path, elgar_skeleton** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new elgar_skeleton{elgar::load_skeleton(path)};
  });
}

void elgar_skeleton_free(elgar_skeleton* s) { delete s; }
int elgar_skeleton_joint_count(const elgar_skeleton* s) { return s ? s->skeleton.joint_count() : 0; }

elgar_status elgar_cello_load(const char* path, elgar_cello** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new elgar_cello{elgar::load_cello(path)};
  });
}

void elgar_cello_free(elgar_cello* c) { delete c; }

elgar_status elgar_motion_read(const char* path, elgar_motion** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new elgar_motion{elgar::read_motion(path)};
  });
}

elgar_status elgar_motion_create(double fps, int frames, int dim, const double* data, elgar_motion** out) {
  return guard([&] {
    need(data, "data");
    need(out, "out");
    if (frames < 1 || dim != elgar::kFeatureDim) {
      elgar::raise(elgar::ErrorCode::ShapeMismatch, "motion must have >= 1 frame of 309 features");
    }
    elgar::MotionSequence m;
    m.fps = fps;
    m.frames.resize(frames, dim);
    for (int k = 0; k < frames; ++k)
      for (int d = 0; d < dim; ++d) m.frames(k, d) = data[static_cast<size_t>(k) * dim + d];
    m.validate();
    *out = new elgar_motion{std::move(m)};
  });
}

elgar_status elgar_motion_write(const elgar_motion* m, const char* path) {
  return guard([&] {
    need(m, "motion");
    need(path, "path");
    elgar::write_motion(path, m->motion);
  });
}

void elgar_motion_free(elgar_motion* m) { delete m; }
int elgar_motion_frames(const elgar_motion* m) { return m ? m->motion.frame_count() : 0; }
int elgar_motion_dim(const elgar_motion* m) { return m ? static_cast<int>(m->motion.frames.cols()) : 0; }
double elgar_motion_fps(const elgar_motion* m) { return m ? m->motion.fps : 0.0; }

elgar_status elgar_motion_copy_data(const elgar_motion* m, double* out, size_t capacity) {
  return guard([&] {
    need(m, "motion");
    need(out, "out");
    const auto& f = m->motion.frames;
    if (capacity < static_cast<size_t>(f.size())) elgar::raise(elgar::ErrorCode::InvalidArgument, "buffer too small");
    for (int k = 0; k < f.rows(); ++k)
      for (int d = 0; d < f.cols(); ++d) out[static_cast<size_t>(k) * f.cols() + d] = f(k, d);
  });
}

elgar_status elgar_rot6d_to_matrix(const double a[6], double R[9]) {
  return guard([&] {
    need(a, "a");
    need(R, "R");
    const elgar::Mat3 M = elgar::rot6d_to_matrix(std::span<const double, 6>(a, 6));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) R[3 * r + c] = M(r, c);
  });
}

elgar_status elgar_matrix_to_rot6d(const double R[9], double a[6]) {
  return guard([&] {
    need(a, "a");
    need(R, "R");
    elgar::Mat3 M;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) M(r, c) = R[3 * r + c];
    const elgar::Rot6D x = elgar::matrix_to_rot6d(M);
    std::memcpy(a, x.a.data(), sizeof(double) * 6);
  });
}

elgar_status elgar_forward_kinematics(const elgar_skeleton* s, const double* frame, size_t frame_len,
                                      double* positions, size_t capacity) {
  return guard([&] {
    need(s, "skeleton");
    need(frame, "frame");
    need(positions, "positions");
    if (frame_len != static_cast<size_t>(elgar::kFeatureDim)) {
      elgar::raise(elgar::ErrorCode::ShapeMismatch, "frame must have 309 features");
    }
    const elgar::Pose pose = elgar::forward_kinematics(std::span<const double>(frame, frame_len), s->skeleton);
    if (capacity < 3 * pose.positions.size()) elgar::raise(elgar::ErrorCode::InvalidArgument, "buffer too small");
    for (size_t j = 0; j < pose.positions.size(); ++j)
      for (int c = 0; c < 3; ++c) positions[3 * j + c] = pose.positions[j](c);
  });
}

elgar_status elgar_bow_endpoints(const elgar_skeleton* s, const elgar_cello* cello, const double* frame,
                                 size_t frame_len, double frog[3], double tip[3]) {
  return guard([&] {
    need(s, "skeleton");
    need(cello, "cello");
    need(frame, "frame");
    need(frog, "frog");
    need(tip, "tip");
    if (frame_len != static_cast<size_t>(elgar::kFeatureDim)) {
      elgar::raise(elgar::ErrorCode::ShapeMismatch, "frame must have 309 features");
    }
    const std::span<const double> f(frame, frame_len);
    const elgar::Pose pose = elgar::forward_kinematics(f, s->skeleton);
    const elgar::BowPose bow = elgar::frame_bow(f, s->skeleton, pose, cello->cello.bow_length);
    for (int c = 0; c < 3; ++c) {
      frog[c] = bow.frog(c);
      tip[c] = bow.tip(c);
    }
  });
}

elgar_status elgar_kabsch(const double* P, const double* Q, size_t n, double R[9], double t[3], double* rmsd) {
  return guard([&] {
    need(P, "P");
    need(Q, "Q");
    need(R, "R");
    need(t, "t");
    std::vector<elgar::Vec3> p(n), q(n);
    for (size_t i = 0; i < n; ++i) {
      p[i] = v3(P + 3 * i);
      q[i] = v3(Q + 3 * i);
    }
    const elgar::KabschResult k = elgar::kabsch(p, q);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) R[3 * r + c] = k.transform.R(r, c);
      t[r] = k.transform.t(r);
    }
    if (rmsd) *rmsd = k.rmsd;
  });
}

elgar_status elgar_segment_distance(const double a0[3], const double a1[3], const double b0[3], const double b1[3],
                                    double* distance, double* s, double* u) {
  return guard([&] {
    need(a0, "a0");
    need(a1, "a1");
    need(b0, "b0");
    need(b1, "b1");
    need(distance, "distance");
    const elgar::SegmentDistance d = elgar::segment_segment_distance(v3(a0), v3(a1), v3(b0), v3(b1));
    *distance = d.distance;
    if (s) *s = d.s;
    if (u) *u = d.u;
  });
}

elgar_status elgar_extract_f0_wav(const char* wav_path, double fps, double** f0, size_t* frames) {
  return guard([&] {
    need(wav_path, "wav_path");
    need(f0, "f0");
    need(frames, "frames");
    const elgar::AudioClip clip = elgar::read_wav(wav_path);
    clip.validate();
    const std::vector<double> track = elgar::extract_f0(clip, fps);
    double* buf = static_cast<double*>(std::malloc(sizeof(double) * std::max<size_t>(track.size(), 1)));
    if (!buf) throw std::bad_alloc();
    std::copy(track.begin(), track.end(), buf);
    *f0 = buf;
    *frames = track.size();
  });
}

elgar_status elgar_synth_dataset(const elgar_config* c, const char* out_dir, int* takes) {
  return guard([&] {
    need(c, "config");
    const std::string dir = out_dir ? out_dir : c->config.dataset_dir;
    const int n = elgar::synthesize_dataset(c->config, dir);
    if (takes) *takes = n;
  });
}

namespace {
nlohmann::json summary_json(const elgar::PreprocessSummary& s) {
  return {{"frames", s.frames},
          {"voiced_frames", s.voiced_frames},
          {"mean_rmsd_m", s.mean_rmsd},
          {"max_rmsd_m", s.max_rmsd},
          {"worst_frame", s.worst_frame}};
}
}  // namespace

elgar_status elgar_preprocess(const elgar_config* c, const char* take_path, const char* audio_path,
                              const char* out_prefix, char** summary) {
  return guard([&] {
    need(c, "config");
    need(take_path, "take_path");
    need(out_prefix, "out_prefix");
    if (!audio_path) elgar::raise(elgar::ErrorCode::InvalidArgument, "preprocess needs the take's audio for f0");
    const elgar::PreprocessSummary s = elgar::preprocess_take(c->config, take_path, audio_path, out_prefix);
    if (summary) *summary = dup(summary_json(s).dump());
  });
}

elgar_status elgar_preprocess_dataset(const elgar_config* c, char** summary) {
  return guard([&] {
    need(c, "config");
    const auto all = elgar::preprocess_dataset(c->config);
    if (all.empty()) elgar::raise(elgar::ErrorCode::InvalidArgument, "no raw takes under " + c->config.dataset_dir);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : all) j.push_back(summary_json(s));
    if (summary) *summary = dup(j.dump());
  });
}

elgar_status elgar_train(const elgar_config* c, const char* out_dir) {
  return guard([&] {
    need(c, "config");
    elgar::train_run(c->config, out_dir ? out_dir : c->config.output_dir);
  });
}

elgar_status elgar_generate(const elgar_config* c, const char* checkpoint_path, const char* audio_path,
                            const char* condition_path, double duration_s, const char* out_path) {
  return guard([&] {
    need(c, "config");
    need(checkpoint_path, "checkpoint_path");
    need(out_path, "out_path");
    if ((audio_path == nullptr) == (condition_path == nullptr)) {
      elgar::raise(elgar::ErrorCode::InvalidArgument, "give exactly one of audio or condition");
    }
    const elgar::DenoiserParams params = elgar::read_checkpoint(checkpoint_path);
    elgar::ConditionTrack cond;
    if (audio_path) {
      cond = elgar::condition_from_audio(elgar::read_wav(audio_path), c->config.fps);
    } else {
      cond = elgar::read_condition(condition_path);
    }
    if (duration_s > 0) {
      const int frames = static_cast<int>(std::lround(duration_s * cond.fps));
      if (frames < 1) elgar::raise(elgar::ErrorCode::InvalidArgument, "duration is shorter than one frame");
      cond = elgar::slice(cond, 0, frames);
    }
    elgar::GenerateOptions o;
    o.guidance_w = c->config.guidance_w;
    o.steps = c->config.sample_steps;
    o.overlap_s = c->config.overlap_s;
    o.seed = c->config.seed;
    o.T = c->config.diffusion_steps_T;
    elgar::MotionSequence m = elgar::generate_motion(params, cond, o);
    elgar::write_motion(out_path, m);
  });
}

elgar_status elgar_evaluate(const elgar_config* c, const char* motion_path, const char* condition_path,
                            const char* gt_path, const char* out_json, char** table) {
  return guard([&] {
    need(c, "config");
    need(motion_path, "motion_path");
    need(condition_path, "condition_path");
    const std::string gt = gt_path ? gt_path : "";
    const elgar::EvaluationReport r =
        elgar::evaluate_files(c->config, motion_path, condition_path, gt_path ? &gt : nullptr);
    if (out_json) elgar::write_file_atomic(out_json, elgar::report_json(r));
    if (table) {
      const std::pair<std::string, elgar::EvaluationReport> row{std::filesystem::path(motion_path).stem().string(), r};
      *table = dup(elgar::report_table(std::span(&row, 1)));
    }
  });
}

elgar_status elgar_ablate(const elgar_config* c, const char* out_dir, char** table) {
  return guard([&] {
    need(c, "config");
    const auto rows = elgar::run_ablation(c->config, out_dir ? out_dir : c->config.output_dir);
    if (table) *table = dup(elgar::ablation_table(rows));
  });
}

}  // extern "C"
