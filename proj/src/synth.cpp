#include "elgar/synth.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <random>

#include "elgar/error.hpp"

namespace elgar {

namespace {

Mat3 rot_x(double deg) { return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_y(double deg) { return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3::UnitY()).toRotationMatrix(); }
Mat3 rot_z(double deg) { return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3::UnitZ()).toRotationMatrix(); }

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

void set_rotation(std::span<double> frame, const Skeleton& sk, const std::string& joint, const Mat3& R) {
  const int slot = sk.slot_of(sk.index_of(joint));
  const Rot6D r = matrix_to_rot6d(R);
  std::copy(r.a.begin(), r.a.end(), frame.begin() + 6 * slot);
}

void copy_slot(std::span<double> dst, std::span<const double> src, int slot) {
  std::copy(src.begin() + 6 * slot, src.begin() + 6 * slot + 6, dst.begin() + 6 * slot);
}

Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a;
  const Vec3 n = ab.cross(ac);
  const double d = 2.0 * n.squaredNorm();
  if (!(d > 0)) raise(ErrorCode::DegenerateConfiguration, "string cross-section points are collinear");
  return a + (ac.squaredNorm() * n.cross(ab) + ab.squaredNorm() * ac.cross(n)) / d;
}

// Rough outward normal of the string plane: the middle strings sit higher on the arch.
Vec3 string_plane_normal(const CelloSpec& cello) {
  const auto& s = cello.strings;
  return (0.5 * (s[1].bridge + s[2].bridge) - 0.5 * (s[0].bridge + s[3].bridge)).normalized();
}

struct NoteSpan {
  int begin = 0;
  int end = 0;
  ScoreNote note;
  std::optional<ContactIntent> intent;
};

ContactIntent intent_for(const ScoreNote& note, const CelloSpec& cello) {
  const auto candidates = pitch_to_positions(note.pitch_hz, cello);
  for (const auto& c : candidates) {
    if (c.string == note.string && c.is_open_string == !note.finger.has_value()) return c;
  }
  raise(ErrorCode::NoPlayablePosition, std::to_string(note.pitch_hz) + " Hz is not playable on string " +
                                           cello.strings.at(note.string).name +
                                           (note.finger ? " with a stopping finger" : " as an open string"));
}

}  // namespace

Vec3 arch_bow_direction(const CelloSpec& cello, int string, double from_bridge) {
  std::array<Vec3, kStringCount> x;
  for (int i = 0; i < kStringCount; ++i) {
    const auto& s = cello.strings[i];
    x[i] = s.bridge + (from_bridge / s.speaking_length()) * (s.nut - s.bridge);
  }
  const int mid = std::clamp(string, 1, kStringCount - 2);
  const Vec3 center = circumcenter(x[mid - 1], x[mid], x[mid + 1]);
  const Vec3 plane = (x[mid] - x[mid - 1]).cross(x[mid + 1] - x[mid - 1]).normalized();
  Vec3 t = plane.cross(x[string] - center);
  const auto& s = cello.strings[string];
  const Vec3 along = (s.bridge - s.nut).normalized();
  t -= t.dot(along) * along;
  t.normalize();
  if (t.dot(x[0] - x[kStringCount - 1]) < 0) t = -t;
  return t;
}

double solve_ik(std::span<double> frame, const Skeleton& skeleton, std::span<const int> chain, const IkEffector& effector,
                double tolerance, int max_iterations) {
  const int m = static_cast<int>(chain.size());
  auto effector_position = [&](const Pose& pose) {
    Vec3 p = Vec3::Zero();
    for (const auto& [j, w] : effector.joints) p += w * pose.positions[j];
    return p;
  };
  std::vector<double> saved(frame.begin(), frame.end());
  Pose pose = forward_kinematics(frame, skeleton);
  Vec3 err = effector.target - effector_position(pose);
  double lambda = 0.05;
  for (int iter = 0; iter < max_iterations && err.norm() > tolerance; ++iter) {
    Eigen::MatrixXd J(3, 3 * m);
    for (int c = 0; c < m; ++c) {
      Vec3 r = Vec3::Zero();
      for (const auto& [j, w] : effector.joints)
        if (skeleton.is_descendant(j, chain[c])) r += w * (pose.positions[j] - pose.positions[chain[c]]);
      J.block<3, 3>(0, 3 * c) = -skew(r);
    }
    const Eigen::Matrix3d A = J * J.transpose() + lambda * lambda * Eigen::Matrix3d::Identity();
    Eigen::VectorXd dq = J.transpose() * A.ldlt().solve(err);
    const double max_step = 0.3;
    for (int c = 0; c < m; ++c) {
      const double n = dq.segment<3>(3 * c).norm();
      if (n > max_step) dq.segment<3>(3 * c) *= max_step / n;
    }
    saved.assign(frame.begin(), frame.end());
    for (int c = 0; c < m; ++c) {
      const int joint = chain[c];
      const int slot = skeleton.slot_of(joint);
      const Mat3& Wp = pose.world[skeleton.joint(joint).parent];
      const Mat3 R = rot6d_to_matrix(std::span<const double>(frame).subspan(6 * slot).first<6>());
      const Mat3 updated = Wp.transpose() * axis_angle_matrix(dq.segment<3>(3 * c)) * Wp * R;
      const Rot6D r = matrix_to_rot6d(updated);
      std::copy(r.a.begin(), r.a.end(), frame.begin() + 6 * slot);
    }
    Pose trial = forward_kinematics(frame, skeleton);
    const Vec3 trial_err = effector.target - effector_position(trial);
    if (trial_err.norm() < err.norm()) {
      pose = std::move(trial);
      err = trial_err;
      lambda = std::max(lambda * 0.5, 1e-7);
    } else {
      std::copy(saved.begin(), saved.end(), frame.begin());
      lambda *= 4.0;
    }
  }
  if (err.norm() > tolerance) {
    raise(ErrorCode::InvalidArgument, "IK target unreachable (residual " + std::to_string(err.norm()) + " m)");
  }
  return err.norm();
}

SynthPerformance synth_performance(std::span<const ScoreNote> score, const Skeleton& skeleton, const CelloSpec& cello,
                                   const SynthOptions& opt) {
  if (score.empty()) raise(ErrorCode::InvalidArgument, "score is empty");
  const SkeletonAnchors& an = skeleton.anchors();

  // Timeline.
  std::vector<NoteSpan> spans;
  double t = 0;
  for (const auto& note : score) {
    if (!(note.duration_s > 0)) raise(ErrorCode::InvalidArgument, "note duration must be positive");
    NoteSpan span;
    span.note = note;
    span.begin = static_cast<int>(std::lround(t * opt.fps));
    t += note.duration_s;
    span.end = static_cast<int>(std::lround(t * opt.fps));
    if (note.pitch_hz > 0) span.intent = intent_for(note, cello);
    spans.push_back(span);
  }

  SynthPerformance out;

  // Audio: phase-continuous naive sawtooth.
  out.audio.sample_rate = opt.sample_rate;
  out.audio.samples.assign(static_cast<size_t>(std::lround(t * opt.sample_rate)), 0.0);
  {
    double phase = 0;
    size_t i = 0;
    double note_end_time = 0;
    for (const auto& span : spans) {
      note_end_time += span.note.duration_s;
      const size_t last = std::min(out.audio.samples.size(), static_cast<size_t>(std::lround(note_end_time * opt.sample_rate)));
      for (; i < last; ++i) {
        if (span.note.pitch_hz > 0) {
          phase += span.note.pitch_hz / opt.sample_rate;
          phase -= std::floor(phase);
          out.audio.samples[i] = opt.amplitude * (2.0 * phase - 1.0);
        }
      }
    }
  }

  const int F = frame_count_for(out.audio, opt.fps);
  std::vector<int> note_of(F, static_cast<int>(spans.size()) - 1);
  for (int n = 0; n < static_cast<int>(spans.size()); ++n)
    for (int k = spans[n].begin; k < std::min(spans[n].end, F); ++k) note_of[k] = n;

  out.condition.fps = opt.fps;
  out.condition.f0.resize(F);
  for (int k = 0; k < F; ++k) out.condition.f0[k] = std::max(0.0, spans[note_of[k]].note.pitch_hz);
  out.condition.features = build_features(out.condition.f0, out.audio, opt.fps);

  // Bow strokes: contact parameter slides between bow_low and bow_high, reversing per voiced note.
  std::vector<double> stroke_u(F);
  std::vector<int> bow_string(F);
  {
    bool down = opt.down_bow_first;
    double u = down ? opt.bow_low : opt.bow_high;
    int string = spans.front().note.pitch_hz > 0 ? spans.front().note.string : 2;
    bool first_voiced = true;
    for (int n = 0; n < static_cast<int>(spans.size()); ++n) {
      const auto& span = spans[n];
      const int b = span.begin, e = std::min(span.end, F);
      if (span.note.pitch_hz > 0) {
        if (!first_voiced) {
          down = !down;
          out.attack_frames.push_back(b);
        }
        first_voiced = false;
        string = span.note.string;
        const double from = u;
        const double to = down ? opt.bow_high : opt.bow_low;
        for (int k = b; k < e; ++k) {
          stroke_u[k] = from + (to - from) * static_cast<double>(k - b) / std::max(1, e - b);
          bow_string[k] = string;
        }
        u = to;
      } else {
        for (int k = b; k < e; ++k) {
          stroke_u[k] = u;
          bow_string[k] = string;
        }
      }
      out.note_start_frames.push_back(b);
    }
  }

  // Kinematics.
  const std::vector<int> left_chain = {skeleton.index_of("left_shoulder"), skeleton.index_of("left_elbow"),
                                       skeleton.index_of("left_wrist")};
  const std::vector<int> right_chain = {skeleton.index_of("right_shoulder"), skeleton.index_of("right_elbow"),
                                        skeleton.index_of("right_wrist")};
  const Vec3 normal = string_plane_normal(cello);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
  const double sway_phase = uni(rng);
  const double sway_rate = 0.15 + 0.1 * std::uniform_real_distribution<double>(0, 1)(rng);

  out.motion.fps = opt.fps;
  out.motion.frames.resize(F, kFeatureDim);
  std::vector<double> frame(kFeatureDim, 0.0), previous;
  static const char* kFingers[5] = {"index", "middle", "pinky", "ring", "thumb"};

  for (int k = 0; k < F; ++k) {
    for (int s = 0; s < kRotatedJoints; ++s) {
      const Rot6D id;
      std::copy(id.a.begin(), id.a.end(), frame.begin() + 6 * s);
    }
    const double time = k / opt.fps;
    const double sway = opt.sway_deg * std::sin(2 * std::numbers::pi * sway_rate * time + sway_phase);
    set_rotation(frame, skeleton, "left_hip", rot_x(-90));
    set_rotation(frame, skeleton, "right_hip", rot_x(-90));
    set_rotation(frame, skeleton, "left_knee", rot_x(90));
    set_rotation(frame, skeleton, "right_knee", rot_x(90));
    set_rotation(frame, skeleton, "spine2", rot_z(sway) * rot_x(0.5 * sway));
    set_rotation(frame, skeleton, "head", rot_x(15) * rot_y(12));
    for (const char* f : kFingers) {
      const double curl = std::string(f) == "thumb" ? 10 : 22;
      for (int seg = 1; seg <= 3; ++seg) {
        set_rotation(frame, skeleton, std::string("left_") + f + std::to_string(seg), rot_z(-curl));
        set_rotation(frame, skeleton, std::string("right_") + f + std::to_string(seg), rot_z(curl));
      }
    }
    if (previous.empty()) {
      set_rotation(frame, skeleton, "left_shoulder", rot_y(-30) * rot_z(-40));
      set_rotation(frame, skeleton, "left_elbow", rot_y(-90));
      set_rotation(frame, skeleton, "right_shoulder", rot_y(30) * rot_z(40));
      set_rotation(frame, skeleton, "right_elbow", rot_y(60));
    } else {
      for (int j : left_chain) copy_slot(frame, previous, skeleton.slot_of(j));
      for (int j : right_chain) copy_slot(frame, previous, skeleton.slot_of(j));
    }

    // Fingering hand.
    const NoteSpan& span = spans[note_of[k]];
    IkEffector hand;
    if (span.intent && span.note.finger) {
      hand.joints = {{an.fingertips[*span.note.finger], 1.0}};
      hand.target = span.intent->point;
    } else {
      const auto& s = cello.strings[2];
      hand.joints = {{an.fingertips[0], 1.0}};
      hand.target = s.point_at(0.2) + 0.03 * normal;
    }
    solve_ik(frame, skeleton, left_chain, hand);

    // Bow hand.
    const int bs = bow_string[k];
    const auto& str = cello.strings[bs];
    const Vec3 dir = arch_bow_direction(cello, bs, opt.contact_from_bridge);
    const Vec3 contact = str.point_at(str.speaking_length() - opt.contact_from_bridge);
    IkEffector bow;
    for (int f = 0; f < 3; ++f) {
      bow.joints.push_back({an.bow_pip[f], 1.0 / 6.0});
      bow.joints.push_back({an.bow_dip[f], 1.0 / 6.0});
    }
    bow.target = contact - stroke_u[k] * cello.bow_length * dir;
    solve_ik(frame, skeleton, right_chain, bow);

    frame[kRotationFeatures] = dir.x();
    frame[kRotationFeatures + 1] = dir.y();
    frame[kRotationFeatures + 2] = dir.z();
    for (int d = 0; d < kFeatureDim; ++d) out.motion.frames(k, d) = frame[d];
    previous = frame;
  }

  annotate(out.condition, out.motion, skeleton, cello);
  std::erase_if(out.attack_frames, [F](int f) { return f >= F; });
  return out;
}

std::vector<ScoreNote> random_score(int notes, unsigned seed, const CelloSpec& cello, double min_duration,
                                    double max_duration) {
  std::mt19937_64 rng(seed);
  // tuned strings sit on semitones; rounding keeps an open-string pitch on its own string
  std::array<int, kStringCount> open_midi;
  for (int s = 0; s < kStringCount; ++s)
    open_midi[s] = static_cast<int>(std::lround(69.0 + 12.0 * std::log2(cello.strings[s].open_hz / 440.0)));
  const int lowest = open_midi[0];
  const int highest = open_midi[kStringCount - 1] + 7;
  std::uniform_int_distribution<int> pick(lowest, highest);
  std::uniform_real_distribution<double> dur(min_duration, max_duration);
  std::vector<ScoreNote> score;
  for (int i = 0; i < notes; ++i) {
    const int midi = pick(rng);
    int string = 0;
    for (int s = 0; s < kStringCount; ++s)
      if (open_midi[s] <= midi) string = s;
    const int semis = midi - open_midi[string];
    ScoreNote note;
    note.pitch_hz = midi_to_hz(midi);
    note.string = string;
    note.duration_s = dur(rng);
    if (semis > 0) note.finger = std::min(3, semis / 2);
    score.push_back(note);
  }
  return score;
}

}  // namespace elgar
