#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elgar/types.hpp"

namespace elgar {

inline constexpr int kStringCount = 4;

struct CelloString {
  std::string name;
  Vec3 nut = Vec3::Zero();
  Vec3 bridge = Vec3::Zero();
  double open_hz = 0.0;

  double speaking_length() const { return (bridge - nut).norm(); }
  Vec3 point_at(double distance_from_nut) const;
};

/// Shared instrument.  Strings are ordered C, G, D, A (low to high).
struct CelloSpec {
  std::array<CelloString, kStringCount> strings;
  double bow_length = 0.71;
  Vec3 endpin = Vec3::Zero();
  /// Named landmarks used for rigid alignment; always includes "endpin".
  std::map<std::string, Vec3> landmarks;
  /// Playable positions are capped at f0 <= max_ratio * f_open.
  double max_ratio = 3.0;
  /// Band (in cents) around an open-string frequency that counts as the open string.
  double open_tolerance_cents = 15.0;

  Vec3 bridge_center() const;
  /// Throws InvalidArgument on a violated instrument invariant.
  void validate() const;
};

CelloSpec load_cello(const std::string& path);
CelloSpec cello_from_json_text(const std::string& text);

/// Equal-tempered frequency of a MIDI note, A4 = 440 Hz.
double midi_to_hz(double midi);
double cents_between(double f, double reference);

struct ContactIntent {
  int string = 0;
  Vec3 point = Vec3::Zero();
  double distance_from_nut = 0.0;
  bool is_open_string = false;
};

/// Every string position sounding f0.  Throws NoPlayablePosition when none exists.
std::vector<ContactIntent> pitch_to_positions(double f0, const CelloSpec& cello);

struct IntentChoice {
  ContactIntent intent;
  std::optional<int> note_finger;  ///< 0..3 = index, middle, ring, pinky; none for open strings
  double distance = 0.0;           ///< fingertip-to-contact distance of the chosen pair (0 for open)
};

/// Nearest (candidate, fingertip) pair.  An open-string match takes precedence and
/// reports no note finger.  Ties go to the lowest string index, then lowest finger.
IntentChoice select_intent(double f0, std::span<const Vec3, 4> fingertips, const CelloSpec& cello);

/// Vibrating part of the string for an intent: contact point (nut if open) to bridge.
Segment activating_string(const ContactIntent& intent, const CelloSpec& cello);

}  // namespace elgar
