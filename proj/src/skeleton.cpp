#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "elgar/error.hpp"
#include "elgar/motion.hpp"

namespace elgar {

namespace {

constexpr const char* kBowPip[3] = {"bow_thumb_pip", "bow_middle_pip", "bow_ring_pip"};
constexpr const char* kBowDip[3] = {"bow_thumb_dip", "bow_middle_dip", "bow_ring_dip"};
constexpr const char* kTips[4] = {"fingertip_index", "fingertip_middle", "fingertip_ring", "fingertip_pinky"};
constexpr const char* kFeet[2] = {"foot_left", "foot_right"};
constexpr const char* kWrists[2] = {"wrist_left", "wrist_right"};

Vec3 vec3_from(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) raise(ErrorCode::ParseError, what + " must be a 3-element array");
  Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!v.allFinite()) raise(ErrorCode::ParseError, what + " is not finite");
  return v;
}

}  // namespace

Skeleton::Skeleton(std::vector<Joint> joints, const std::unordered_map<std::string, std::string>& anchors,
                   RigidTransform root_pose)
    : joints_(std::move(joints)), anchor_names_(anchors), root_pose_(root_pose) {
  if (joints_.empty()) raise(ErrorCode::InvalidArgument, "skeleton has no joints");
  joint_to_slot_.assign(joints_.size(), -1);
  for (size_t i = 0; i < joints_.size(); ++i) {
    const Joint& j = joints_[i];
    if (i == 0) {
      if (j.parent != -1) raise(ErrorCode::InvalidArgument, "first joint must be the root");
      continue;
    }
    if (j.parent < 0 || j.parent >= static_cast<int>(i)) {
      raise(ErrorCode::InvalidArgument, "joint '" + j.name + "' is not topologically ordered");
    }
    if (!j.offset.allFinite()) raise(ErrorCode::InvalidArgument, "joint '" + j.name + "' has a non-finite offset");
    if (j.rotated) {
      if (j.offset.norm() == 0.0) raise(ErrorCode::InvalidArgument, "rotated joint '" + j.name + "' has a zero offset");
      joint_to_slot_[i] = static_cast<int>(slot_to_joint_.size());
      slot_to_joint_.push_back(static_cast<int>(i));
    }
  }

  bool complete = true;
  SkeletonAnchors an;
  auto resolve = [&](const char* role, int& out) {
    auto it = anchor_names_.find(role);
    if (it == anchor_names_.end()) {
      complete = false;
      return;
    }
    auto idx = find(it->second);
    if (!idx) {
      complete = false;
      return;
    }
    out = *idx;
  };
  for (int k = 0; k < 3; ++k) {
    resolve(kBowPip[k], an.bow_pip[k]);
    resolve(kBowDip[k], an.bow_dip[k]);
  }
  for (int k = 0; k < 4; ++k) resolve(kTips[k], an.fingertips[k]);
  for (int k = 0; k < 2; ++k) {
    resolve(kFeet[k], an.feet[k]);
    resolve(kWrists[k], an.wrists[k]);
  }
  if (complete) anchors_ = an;
}

std::optional<int> Skeleton::find(const std::string& name) const {
  for (size_t i = 0; i < joints_.size(); ++i)
    if (joints_[i].name == name) return static_cast<int>(i);
  return std::nullopt;
}

int Skeleton::index_of(const std::string& name) const {
  auto idx = find(name);
  if (!idx) raise(ErrorCode::MissingAnchorJoints, "skeleton has no joint '" + name + "'");
  return *idx;
}

const SkeletonAnchors& Skeleton::anchors() const {
  if (!anchors_) raise(ErrorCode::MissingAnchorJoints, "skeleton lacks bow-hand, fingertip, foot or wrist anchors");
  return *anchors_;
}

bool Skeleton::is_descendant(int joint, int ancestor) const {
  for (int j = joint; j >= 0; j = joints_[j].parent)
    if (j == ancestor) return true;
  return false;
}

Skeleton skeleton_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, std::string("skeleton JSON: ") + e.what());
  }
  try {
    std::vector<Joint> joints;
    std::unordered_map<std::string, int> by_name;
    for (const auto& jj : doc.at("joints")) {
      Joint j;
      j.name = jj.at("name").get<std::string>();
      const auto& parent = jj.at("parent");
      if (parent.is_null()) {
        j.parent = -1;
      } else if (parent.is_string()) {
        auto it = by_name.find(parent.get<std::string>());
        if (it == by_name.end()) raise(ErrorCode::ParseError, "joint '" + j.name + "' names an unknown or later parent");
        j.parent = it->second;
      } else {
        j.parent = parent.get<int>();
      }
      j.offset = vec3_from(jj.at("offset"), "offset of '" + j.name + "'");
      j.rotated = !jj.value("virtual", false) && j.parent >= 0;
      by_name[j.name] = static_cast<int>(joints.size());
      joints.push_back(std::move(j));
    }
    std::unordered_map<std::string, std::string> anchors;
    if (doc.contains("anchors")) {
      for (auto it = doc["anchors"].begin(); it != doc["anchors"].end(); ++it) anchors[it.key()] = it.value().get<std::string>();
    }
    RigidTransform root;
    if (doc.contains("root")) {
      const auto& r = doc["root"];
      if (r.contains("translation")) root.t = vec3_from(r["translation"], "root translation");
      if (r.contains("rotation6d")) {
        auto a = r["rotation6d"].get<std::vector<double>>();
        if (a.size() != 6) raise(ErrorCode::ParseError, "root rotation6d needs 6 values");
        Rot6D rr;
        std::copy(a.begin(), a.end(), rr.a.begin());
        root.R = rot6d_to_matrix(rr);
      }
    }
    return Skeleton(std::move(joints), anchors, root);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, std::string("skeleton JSON: ") + e.what());
  }
}

Skeleton load_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot open skeleton file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Skeleton sk = skeleton_from_json_text(ss.str());
  int rotated = 0;
  for (const auto& j : sk.joints()) rotated += j.rotated ? 1 : 0;
  if (rotated != kRotatedJoints) {
    raise(ErrorCode::ParseError, "performer skeleton must have exactly 51 rotated joints, found " + std::to_string(rotated));
  }
  sk.anchors();
  return sk;
}

}  // namespace elgar
