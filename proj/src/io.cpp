#include "elgar/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "elgar/error.hpp"

namespace elgar {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(ErrorCode::IoError, "short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) raise(ErrorCode::IoError, "cannot rename " + tmp + ": " + ec.message());
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

template <class T>
void put(std::string& out, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = std::bit_cast<U>(v);
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(const std::string& b, const char* what) : b_(b), what_(what) {}
  template <class T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(T));
    U bits = 0;
    for (size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(size_t n) const {
    if (pos_ + n > b_.size()) raise(ErrorCode::ParseError, std::string(what_) + " is truncated");
  }
  const std::string& b_;
  const char* what_;
  size_t pos_ = 0;
};

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 to_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) raise(ErrorCode::ParseError, what + " must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string encode_motion(const MotionSequence& seq) {
  seq.validate();
  std::string out = "ELGR";
  put<std::uint32_t>(out, kMotionFileVersion);
  put<float>(out, static_cast<float>(seq.fps));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.frame_count()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.frames.cols()));
  out.reserve(out.size() + 4 * seq.frames.size());
  for (int k = 0; k < seq.frame_count(); ++k)
    for (int d = 0; d < seq.frames.cols(); ++d) put<float>(out, static_cast<float>(seq.frames(k, d)));
  return out;
}

MotionSequence decode_motion(const std::string& bytes) {
  Reader r(bytes, "motion file");
  if (r.bytes(4) != "ELGR") raise(ErrorCode::ParseError, "not a motion file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kMotionFileVersion) raise(ErrorCode::ParseError, "unsupported motion file version " + std::to_string(version));
  MotionSequence seq;
  seq.fps = r.get<float>();
  const auto frames = r.get<std::uint32_t>();
  const auto dim = r.get<std::uint32_t>();
  if (dim != static_cast<std::uint32_t>(kFeatureDim)) {
    raise(ErrorCode::ParseError, "motion file feature dim is " + std::to_string(dim) + ", expected 309");
  }
  if (r.remaining() != static_cast<size_t>(frames) * dim * 4) {
    raise(ErrorCode::ParseError, "motion file length does not match its header");
  }
  seq.frames.resize(frames, dim);
  for (std::uint32_t k = 0; k < frames; ++k)
    for (std::uint32_t d = 0; d < dim; ++d) seq.frames(k, d) = r.get<float>();
  seq.validate();
  return seq;
}

void write_motion(const std::string& path, const MotionSequence& seq) { write_file_atomic(path, encode_motion(seq)); }
MotionSequence read_motion(const std::string& path) { return decode_motion(read_file(path)); }

void quantize_to_f32(MotionSequence& seq) {
  seq.fps = static_cast<float>(seq.fps);
  seq.frames = seq.frames.cast<float>().cast<double>();
}

std::string encode_condition(const ConditionTrack& t) {
  t.validate();
  std::string out;
  json head = {{"format", "elgar-condition"},
               {"version", 1},
               {"fps", t.fps},
               {"frames", t.frame_count()},
               {"feature_dim", t.features.cols()}};
  out += head.dump() + "\n";
  for (int k = 0; k < t.frame_count(); ++k) {
    json j;
    j["frame"] = k;
    j["f0"] = t.f0[k];
    std::vector<double> feat(t.features.cols());
    for (int d = 0; d < t.features.cols(); ++d) feat[d] = t.features(k, d);
    j["features"] = feat;
    j["foot_contact"] = t.foot_contact.empty() ? json(nullptr) : json(static_cast<bool>(t.foot_contact[k]));
    if (t.annotated() && t.annotations[k]) {
      const FrameAnnotation& a = *t.annotations[k];
      j["annotation"] = {{"string", a.intent.string},
                         {"point", vec3(a.intent.point)},
                         {"distance_from_nut", a.intent.distance_from_nut},
                         {"open", a.intent.is_open_string},
                         {"note_finger", a.note_finger ? json(*a.note_finger) : json(nullptr)},
                         {"finger_distances", a.finger_distances},
                         {"bow_endpoint_distances", a.bow_endpoint_distances}};
    } else {
      j["annotation"] = nullptr;
    }
    out += j.dump() + "\n";
  }
  return out;
}

ConditionTrack decode_condition(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ConditionTrack t;
  try {
    if (!std::getline(in, line)) raise(ErrorCode::ParseError, "condition file is empty");
    const json head = json::parse(line);
    if (head.value("format", "") != "elgar-condition") raise(ErrorCode::ParseError, "not a condition file");
    t.fps = head.at("fps").get<double>();
    const int F = head.at("frames").get<int>();
    const int D = head.at("feature_dim").get<int>();
    t.f0.resize(F);
    t.features.resize(F, D);
    bool any_annotation = false, any_foot = false;
    std::vector<std::optional<FrameAnnotation>> ann(F);
    std::vector<bool> foot(F, false);
    int k = 0;
    for (; k < F && std::getline(in, line); ++k) {
      const json j = json::parse(line);
      if (j.at("frame").get<int>() != k) raise(ErrorCode::ParseError, "condition frames out of order at line " + std::to_string(k + 2));
      t.f0[k] = j.at("f0").get<double>();
      const auto feat = j.at("features").get<std::vector<double>>();
      if (static_cast<int>(feat.size()) != D) raise(ErrorCode::ParseError, "feature length mismatch at frame " + std::to_string(k));
      for (int d = 0; d < D; ++d) t.features(k, d) = feat[d];
      if (j.contains("foot_contact") && !j["foot_contact"].is_null()) {
        any_foot = true;
        foot[k] = j["foot_contact"].get<bool>();
      }
      if (j.contains("annotation") && !j["annotation"].is_null()) {
        any_annotation = true;
        const json& a = j["annotation"];
        FrameAnnotation fa;
        fa.intent.string = a.at("string").get<int>();
        fa.intent.point = to_vec3(a.at("point"), "annotation point");
        fa.intent.distance_from_nut = a.at("distance_from_nut").get<double>();
        fa.intent.is_open_string = a.at("open").get<bool>();
        if (!a.at("note_finger").is_null()) fa.note_finger = a["note_finger"].get<int>();
        fa.finger_distances = a.at("finger_distances").get<std::array<double, 4>>();
        fa.bow_endpoint_distances = a.at("bow_endpoint_distances").get<std::array<double, 2>>();
        ann[k] = fa;
      }
    }
    if (k != F) raise(ErrorCode::ParseError, "condition file has fewer frames than its header");
    if (any_annotation) t.annotations = std::move(ann);
    if (any_foot) t.foot_contact = std::move(foot);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, std::string("condition file: ") + e.what());
  }
  t.validate();
  return t;
}

void write_condition(const std::string& path, const ConditionTrack& t) { write_file_atomic(path, encode_condition(t)); }
ConditionTrack read_condition(const std::string& path) { return decode_condition(read_file(path)); }

std::string encode_raw_take(const RawTake& take) {
  json frames = json::array();
  for (const auto& f : take.frames) {
    json o = json::object();
    for (const auto& [name, p] : f) o[name] = vec3(p);
    frames.push_back(std::move(o));
  }
  return frames.dump() + "\n";
}

RawTake decode_raw_take(const std::string& text, double default_fps) {
  RawTake take;
  take.fps = default_fps;
  try {
    const json j = json::parse(text);
    const json* frames = &j;
    if (j.is_object()) {
      take.fps = j.value("fps", default_fps);
      frames = &j.at("frames");
    }
    if (!frames->is_array() || frames->empty()) raise(ErrorCode::ParseError, "raw take must be a nonempty array of frames");
    for (size_t k = 0; k < frames->size(); ++k) {
      KeypointFrame f;
      for (const auto& [name, v] : (*frames)[k].items()) {
        f[name] = to_vec3(v, "frame " + std::to_string(k) + " keypoint " + name);
        if (!f[name].allFinite()) raise(ErrorCode::ParseError, "frame " + std::to_string(k) + " keypoint " + name + " is not finite");
      }
      take.frames.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, std::string("raw take: ") + e.what());
  }
  return take;
}

RawTake read_raw_take(const std::string& path, double default_fps) { return decode_raw_take(read_file(path), default_fps); }

std::string denoiser_config_json(const DenoiserConfig& c) {
  json j = {{"blocks", c.blocks},   {"dim", c.dim},           {"heads", c.heads},
            {"cond_dim", c.cond_dim}, {"max_frames", c.max_frames}, {"feature_dim", c.feature_dim}};
  return j.dump();
}

DenoiserConfig denoiser_config_from_json(const std::string& text) {
  DenoiserConfig c;
  try {
    const json j = json::parse(text);
    const json& d = j.contains("denoiser") ? j["denoiser"] : j;
    c.blocks = d.value("blocks", c.blocks);
    c.dim = d.value("dim", c.dim);
    c.heads = d.value("heads", c.heads);
    c.cond_dim = d.value("cond_dim", c.cond_dim);
    c.max_frames = d.value("max_frames", c.max_frames);
    c.feature_dim = d.value("feature_dim", c.feature_dim);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, std::string("denoiser config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string encode_checkpoint(const DenoiserParams& params, const std::string& config_json) {
  std::string out = "ELGRCKPT";
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(config_json.size()));
  out += config_json;
  put<std::uint64_t>(out, static_cast<std::uint64_t>(params.count()));
  for (const Matrix& m : params.tensors)
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
  for (const auto* v : {&params.normalization.mean, &params.normalization.scale})
    for (double x : *v) put<double>(out, x);
  return out;
}

DenoiserParams decode_checkpoint(const std::string& bytes, std::string* config_json) {
  Reader r(bytes, "checkpoint");
  if (r.bytes(8) != "ELGRCKPT") raise(ErrorCode::ParseError, "not a checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) raise(ErrorCode::ParseError, "unsupported checkpoint version");
  const auto n = r.get<std::uint32_t>();
  const std::string cfg = r.bytes(n);
  DenoiserParams p = init_denoiser(denoiser_config_from_json(cfg), 0);
  const auto count = r.get<std::uint64_t>();
  if (count != static_cast<std::uint64_t>(p.count())) raise(ErrorCode::ParseError, "checkpoint parameter count mismatch");
  const std::uint64_t stats = 2 * static_cast<std::uint64_t>(p.config.feature_dim);
  if (r.remaining() != (count + stats) * 8) raise(ErrorCode::ParseError, "checkpoint length does not match its header");
  for (Matrix& m : p.tensors)
    for (int i = 0; i < m.rows(); ++i)
      for (int c = 0; c < m.cols(); ++c) m(i, c) = r.get<double>();
  for (auto* v : {&p.normalization.mean, &p.normalization.scale})
    for (double& x : *v) x = r.get<double>();
  if (!(p.normalization.scale.array() > 0).all()) raise(ErrorCode::ParseError, "checkpoint has a non-positive scale");
  if (config_json) *config_json = cfg;
  return p;
}

void write_checkpoint(const std::string& path, const DenoiserParams& params, const std::string& config_json) {
  write_file_atomic(path, encode_checkpoint(params, config_json));
}

DenoiserParams read_checkpoint(const std::string& path, std::string* config_json) {
  return decode_checkpoint(read_file(path), config_json);
}

std::string encode_train_log(const std::vector<TrainLogRow>& rows) {
  std::string out = "step,simple,foot,pos,rotvel,posvel,hand,bow,total\n";
  for (const auto& r : rows) {
    const LossBreakdown& l = r.loss;
    out += std::to_string(r.step);
    for (double v : {l.simple, l.foot, l.pos, l.rotvel, l.posvel, l.hand, l.bow, l.total}) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

}  // namespace elgar
