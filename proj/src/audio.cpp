#include "elgar/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "elgar/error.hpp"

namespace elgar {

void AudioClip::validate() const {
  if (!(sample_rate >= 8000)) raise(ErrorCode::InvalidArgument, "sample rate must be >= 8000 Hz");
  if (samples.empty()) raise(ErrorCode::InvalidArgument, "audio clip is empty");
}

// ---------------------------------------------------------------------------
// WAV

namespace {

uint32_t le32(const unsigned char* p) { return p[0] | (p[1] << 8) | (p[2] << 16) | (uint32_t(p[3]) << 24); }
uint16_t le16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::vector<unsigned char>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}
void put16(std::vector<unsigned char>& b, uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xFF));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open audio file " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    raise(ErrorCode::ParseError, path + " is not a RIFF/WAVE file");
  }
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    const uint32_t size = le32(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > buf.size() && std::memcmp(chunk, "data", 4) != 0) break;
    if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16) {
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == 0xFFFE && size >= 26) format = le16(chunk + 8 + 24);  // extensible: sub-format GUID head
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min<size_t>(size, buf.size() - body);
    }
    pos = body + size + (size & 1);
  }
  if (!data || channels == 0) raise(ErrorCode::ParseError, path + " has no fmt or data chunk");
  const bool pcm16 = format == 1 && bits == 16;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !f32) raise(ErrorCode::ParseError, path + ": only 16-bit PCM and 32-bit float WAV are supported");

  const size_t bytes = bits / 8;
  const size_t frames = data_size / (bytes * channels);
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0;
    for (size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (i * channels + c) * bytes;
      if (pcm16) {
        acc += static_cast<int16_t>(le16(p)) / 32768.0;
      } else {
        uint32_t raw = le32(p);
        float v;
        std::memcpy(&v, &raw, 4);
        acc += v;
      }
    }
    clip.samples[i] = acc / channels;
  }
  clip.validate();
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip, WavFormat format) {
  clip.validate();
  const bool f32 = format == WavFormat::Float32;
  const uint16_t bits = f32 ? 32 : 16;
  const uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * (bits / 8));
  std::vector<unsigned char> b;
  b.reserve(44 + data_size);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put32(b, 36 + data_size);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(b, 16);
  put16(b, f32 ? 3 : 1);
  put16(b, 1);
  const auto rate = static_cast<uint32_t>(std::lround(clip.sample_rate));
  put32(b, rate);
  put32(b, rate * (bits / 8));
  put16(b, bits / 8);
  put16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put32(b, data_size);
  for (double s : clip.samples) {
    const double v = std::clamp(s, -1.0, 1.0);
    if (f32) {
      const float f = static_cast<float>(v);
      uint32_t raw;
      std::memcpy(&raw, &f, 4);
      put32(b, raw);
    } else {
      put16(b, static_cast<uint16_t>(static_cast<int16_t>(std::lround(v * 32767.0))));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write audio file " + path);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

// ---------------------------------------------------------------------------
// Pitch

int frame_count_for(const AudioClip& clip, double fps) {
  if (!(fps > 0)) raise(ErrorCode::InvalidArgument, "fps must be positive");
  const auto n = static_cast<long>(std::floor(clip.samples.size() * fps / clip.sample_rate + 1e-9));
  return static_cast<int>(std::max(1L, n));
}

std::vector<double> extract_f0(const AudioClip& clip, double fps, const PitchTrackerConfig& config) {
  clip.validate();
  const int frames = frame_count_for(clip, fps);
  const int W = config.window;
  const int half = W / 2;
  const double sr = clip.sample_rate;
  const int tau_min = std::max(2, static_cast<int>(std::floor(sr / config.max_hz)));
  const int tau_max = std::min(W - half - 1, static_cast<int>(std::ceil(sr / config.min_hz)));
  const long n = static_cast<long>(clip.samples.size());

  std::vector<double> buf(W), diff(tau_max + 2), cmnd(tau_max + 2);
  std::vector<double> out(frames, 0.0);
  for (int k = 0; k < frames; ++k) {
    // Keep the analysis frame inside the clip when the clip is long enough.
    const long center = std::lround(k * sr / fps);
    long start = center - half;
    if (n >= W) start = std::clamp(start, 0L, n - W);
    double energy = 0;
    for (int i = 0; i < W; ++i) {
      const long idx = start + i;
      buf[i] = (idx >= 0 && idx < n) ? clip.samples[idx] : 0.0;
      energy += buf[i] * buf[i];
    }
    if (std::sqrt(energy / W) < config.silence_rms) continue;

    for (int tau = 1; tau <= tau_max + 1; ++tau) {
      double acc = 0;
      for (int j = 0; j < half; ++j) {
        const double d = buf[j] - buf[j + tau];
        acc += d * d;
      }
      diff[tau] = acc;
    }
    cmnd[0] = 1.0;
    double running = 0;
    for (int tau = 1; tau <= tau_max + 1; ++tau) {
      running += diff[tau];
      cmnd[tau] = running > 0 ? diff[tau] * tau / running : 1.0;
    }
    int best = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (cmnd[tau] < config.threshold) {
        while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
        best = tau;
        break;
      }
    }
    if (best < 0) continue;
    double refined = best;
    const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
    const double denom = a - 2 * b + c;
    if (denom > 0) refined = best + 0.5 * (a - c) / denom;
    const double f = sr / refined;
    if (f >= config.min_hz && f <= config.max_hz) out[k] = f;
  }
  return out;
}

double normalized_log_f0(double f0) {
  if (!(f0 > 0)) return 0.0;
  return std::log2(f0 / 60.0) / std::log2(1200.0 / 60.0);
}

Matrix build_features(std::span<const double> f0, const AudioClip& clip, double fps) {
  const int frames = static_cast<int>(f0.size());
  Matrix feat = Matrix::Zero(frames, kConditionFeatures);
  const double hop = clip.sample_rate / fps;
  const long n = static_cast<long>(clip.samples.size());
  for (int k = 0; k < frames; ++k) {
    const bool voiced = f0[k] > 0;
    feat(k, 0) = normalized_log_f0(f0[k]);
    feat(k, 1) = voiced ? 1.0 : 0.0;
    const long begin = std::clamp(std::lround(k * hop), 0L, n);
    const long end = std::clamp(std::lround((k + 1) * hop), 0L, n);
    double acc = 0;
    for (long i = begin; i < end; ++i) acc += clip.samples[i] * clip.samples[i];
    feat(k, 2) = end > begin ? std::sqrt(acc / (end - begin)) : 0.0;
    if (k > 0 && voiced && f0[k - 1] > 0) feat(k, 3) = feat(k, 0) - feat(k - 1, 0);
  }
  return feat;
}

}  // namespace elgar
