#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "elgar/cello.hpp"
#include "elgar/types.hpp"

namespace elgar {

struct KabschResult {
  RigidTransform transform;
  double rmsd = 0.0;
};

/// Weighted least-squares rigid fit R*P + t ~ Q (covariance SVD with reflection correction).
/// Empty weights mean uniform.  Throws DegenerateConfiguration for n < 3 or collinear input.
KabschResult kabsch(std::span<const Vec3> P, std::span<const Vec3> Q, std::span<const double> weights = {});

/// Rotation-only fit about the origin: argmin_R sum w |R p - q|^2.
Mat3 kabsch_rotation(std::span<const Vec3> P, std::span<const Vec3> Q, std::span<const double> weights = {});

double rmsd(std::span<const Vec3> P, std::span<const Vec3> Q, const RigidTransform& T,
            std::span<const double> weights = {});

struct SegmentDistance {
  double distance = 0.0;
  double s = 0.0;  ///< parameter on the first segment
  double u = 0.0;  ///< parameter on the second segment
  Vec3 p = Vec3::Zero();
  Vec3 q = Vec3::Zero();
};

/// Closest points between segments a0-a1 and b0-b1.  Throws ZeroLengthSegment.
SegmentDistance segment_segment_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1);
inline SegmentDistance segment_segment_distance(const Segment& a, const Segment& b) {
  return segment_segment_distance(a.a, a.b, b.a, b.b);
}

struct PointSegmentDistance {
  double distance = 0.0;
  double u = 0.0;
  Vec3 q = Vec3::Zero();
};

PointSegmentDistance point_segment_distance(const Vec3& p, const Vec3& b0, const Vec3& b1);
inline PointSegmentDistance point_segment_distance(const Vec3& p, const Segment& s) {
  return point_segment_distance(p, s.a, s.b);
}

// ---------------------------------------------------------------------------
// Take normalization

/// Per-frame name -> point map.  Names with the prefix "dir/" are free vectors (rotated only);
/// names with the prefix "rot6d/" are local quantities left untouched.
using KeypointFrame = std::map<std::string, Vec3>;

struct RawTake {
  double fps = 30.0;
  std::vector<KeypointFrame> frames;
};

struct NormalizedTake {
  double fps = 30.0;
  std::vector<KeypointFrame> frames;
  std::vector<RigidTransform> transforms;  ///< raw -> shared frame, per frame
  std::vector<double> rmsd;                ///< cello-landmark residual per frame
};

inline bool is_direction_key(const std::string& name) { return name.rfind("dir/", 0) == 0; }
inline bool is_local_key(const std::string& name) { return name.rfind("rot6d/", 0) == 0; }

/// Pins each frame's endpin onto the shared endpin, then rotates about it by the Kabsch fit of
/// the remaining cello landmarks.  The same rigid transform moves every human keypoint.
NormalizedTake normalize_take(const RawTake& raw, const CelloSpec& shared_cello);

/// Raises DegenerateConfiguration naming the frame and the missing landmark.
void require_landmarks(const RawTake& raw, const CelloSpec& shared_cello);

}  // namespace elgar
