// Copyright 2026 The sercc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Log-Mel filterbank and MFCC front end (HTK conventions).

#ifndef SERCC_DSP_HPP_
#define SERCC_DSP_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sercc/binary_io.hpp"
#include "sercc/corpus.hpp"
#include "sercc/error.hpp"
#include "sercc/wav.hpp"

namespace sercc {

enum class FeatureKind : std::uint32_t { lmfb = 0, mfcc = 1 };

inline std::string_view to_string(FeatureKind k) { return k == FeatureKind::lmfb ? "lmfb" : "mfcc"; }

inline FeatureKind feature_kind_from_name(std::string_view s) {
  if (s == "lmfb" || s == "LMFB") return FeatureKind::lmfb;
  if (s == "mfcc" || s == "MFCC") return FeatureKind::mfcc;
  throw ConfigError("unknown feature kind '" + std::string(s) + "'");
}

struct FeatureConfig {
  FeatureKind kind = FeatureKind::lmfb;
  double frame_length = 0.025;  // seconds
  double frame_hop = 0.010;     // seconds
  int n_mels = 23;
  int n_ceps = 13;              // includes c0
  double low_freq = 0;
  double high_freq = 0;         // <= 0 means Nyquist
  double log_floor = 1e-10;
  double preemphasis = 0.97;    // 0 disables
  bool trim = true;
  double trim_threshold_db = -35;

  int frame_samples(int sample_rate) const {
    return static_cast<int>(std::lround(frame_length * sample_rate));
  }
  int hop_samples(int sample_rate) const { return static_cast<int>(std::lround(frame_hop * sample_rate)); }
  int n_fft(int sample_rate) const {
    return static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::max(1, frame_samples(sample_rate)))));
  }
  double upper_freq(int sample_rate) const { return high_freq > 0 ? high_freq : sample_rate / 2.0; }
  int dim() const { return kind == FeatureKind::lmfb ? n_mels : n_ceps; }

  void validate(int sample_rate) const {
    if (!(frame_hop > 0) || frame_hop > frame_length)
      throw ConfigError("feature config: need 0 < frame_hop <= frame_length");
    if (frame_samples(sample_rate) < 2 || hop_samples(sample_rate) < 1)
      throw ConfigError("feature config: frame shorter than two samples");
    if (n_mels < 1) throw ConfigError("feature config: n_mels must be >= 1");
    if (kind == FeatureKind::mfcc && (n_ceps < 1 || n_ceps > n_mels))
      throw ConfigError("feature config: need 1 <= n_ceps <= n_mels");
    if (!(low_freq >= 0) || !(low_freq < upper_freq(sample_rate)) || upper_freq(sample_rate) > sample_rate / 2.0)
      throw ConfigError("feature config: need 0 <= low_freq < high_freq <= sample_rate/2");
    if (!(log_floor > 0)) throw ConfigError("feature config: log_floor must be positive");
  }
};

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureSequence {
  FeatureMatrix frames;  // T x D
  double frame_rate = 100;
  FeatureKind kind = FeatureKind::lmfb;

  Eigen::Index length() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

/// Splits `audio` into overlapping frames of `frame_len` samples every `hop`.
inline std::vector<std::vector<double>> frame_signal(std::span<const double> audio, std::size_t frame_len,
                                                     std::size_t hop) {
  if (frame_len == 0 || hop == 0) throw ArgumentError("frame_signal: zero frame length or hop");
  if (audio.size() < frame_len)
    throw TooShortError("frame_signal: " + std::to_string(audio.size()) + " samples, frame needs " +
                        std::to_string(frame_len));
  const std::size_t n = 1 + (audio.size() - frame_len) / hop;
  std::vector<std::vector<double>> frames(n);
  for (std::size_t i = 0; i < n; ++i)
    frames[i].assign(audio.begin() + static_cast<std::ptrdiff_t>(i * hop),
                     audio.begin() + static_cast<std::ptrdiff_t>(i * hop + frame_len));
  return frames;
}

inline std::vector<std::vector<double>> frame_signal(std::span<const double> audio, int sample_rate,
                                                     const FeatureConfig& config) {
  return frame_signal(audio, static_cast<std::size_t>(config.frame_samples(sample_rate)),
                      static_cast<std::size_t>(config.hop_samples(sample_rate)));
}

inline std::vector<double> hamming_window(std::size_t n) {
  if (n < 2) throw ArgumentError("hamming_window: n must be >= 2");
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = 0.54 - 0.46 * std::cos(2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
  return w;
}

/// In-place iterative radix-2 FFT. `data.size()` must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n == 0 || !std::has_single_bit(n)) throw ArgumentError("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(k));
        auto u = data[i + k];
        auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

/// |FFT|^2 of the zero-padded frame, bins 0..n_fft/2 inclusive.
inline std::vector<double> power_spectrum(std::span<const double> frame, std::size_t n_fft) {
  if (n_fft == 0 || !std::has_single_bit(n_fft))
    throw ArgumentError("power_spectrum: n_fft " + std::to_string(n_fft) + " is not a power of two");
  if (frame.size() > n_fft) throw ArgumentError("power_spectrum: frame longer than n_fft");
  std::vector<std::complex<double>> buf(n_fft);
  std::copy(frame.begin(), frame.end(), buf.begin());
  fft_inplace(buf);
  std::vector<double> out(n_fft / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(buf[k]);
  return out;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// n_mels x (n_fft/2+1) triangular filters, centres equally spaced in mel.
inline Eigen::MatrixXd mel_filterbank_matrix(const FeatureConfig& config, int sample_rate) {
  config.validate(sample_rate);
  const int n_fft = config.n_fft(sample_rate);
  const int n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(config.low_freq);
  const double mel_hi = hz_to_mel(config.upper_freq(sample_rate));
  std::vector<double> edges(static_cast<std::size_t>(config.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(config.n_mels + 1);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(config.n_mels, n_bins);
  for (int b = 0; b < n_bins; ++b) {
    const double mel = hz_to_mel(static_cast<double>(b) * sample_rate / n_fft);
    for (int m = 0; m < config.n_mels; ++m) {
      const double lo = edges[m], c = edges[m + 1], hi = edges[m + 2];
      if (mel > lo && mel < hi) fb(m, b) = mel <= c ? (mel - lo) / (c - lo) : (hi - mel) / (hi - c);
    }
  }
  for (int m = 0; m < config.n_mels; ++m)
    if (!(fb.row(m).sum() > 0))
      throw ConfigError("mel filterbank: filter " + std::to_string(m) + " of " + std::to_string(config.n_mels) +
                        " covers no FFT bin; reduce n_mels or raise n_fft");
  return fb;
}

inline std::vector<double> log_mel(std::span<const double> spectrum, const Eigen::MatrixXd& fbank,
                                   double log_floor) {
  if (static_cast<Eigen::Index>(spectrum.size()) != fbank.cols())
    throw ArgumentError("log_mel: spectrum has " + std::to_string(spectrum.size()) + " bins, filterbank expects " +
                        std::to_string(fbank.cols()));
  Eigen::Map<const Eigen::VectorXd> s(spectrum.data(), static_cast<Eigen::Index>(spectrum.size()));
  Eigen::VectorXd e = fbank * s;
  std::vector<double> out(static_cast<std::size_t>(e.size()));
  for (Eigen::Index i = 0; i < e.size(); ++i) out[static_cast<std::size_t>(i)] = std::log(std::max(e[i], log_floor));
  return out;
}

/// Orthonormal DCT-II basis, n_out x n_in.
inline Eigen::MatrixXd dct_matrix(int n_in, int n_out) {
  Eigen::MatrixXd d(n_out, n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
    for (int n = 0; n < n_in; ++n) d(k, n) = scale * std::cos(std::numbers::pi * k * (n + 0.5) / n_in);
  }
  return d;
}

/// Coefficients 0..n_ceps-1 of the orthonormal DCT-II; c0 is kept.
inline std::vector<double> mfcc(std::span<const double> log_mel_vec, int n_ceps) {
  const int n = static_cast<int>(log_mel_vec.size());
  if (n_ceps < 1 || n_ceps > n)
    throw ArgumentError("mfcc: n_ceps " + std::to_string(n_ceps) + " exceeds " + std::to_string(n) + " mel bands");
  Eigen::Map<const Eigen::VectorXd> x(log_mel_vec.data(), n);
  Eigen::VectorXd c = dct_matrix(n, n_ceps) * x;
  return {c.data(), c.data() + c.size()};
}

/// Precomputed front end for a fixed (config, sample rate).
class FeatureExtractor {
 public:
  FeatureExtractor(FeatureConfig config, int sample_rate)
      : config_(config),
        sample_rate_(sample_rate),
        fbank_(mel_filterbank_matrix(config, sample_rate)),
        dct_(dct_matrix(config.n_mels, config.n_ceps)),
        window_(hamming_window(static_cast<std::size_t>(config.frame_samples(sample_rate)))) {}

  FeatureSequence operator()(std::span<const float> audio) const {
    std::vector<float> trimmed;
    if (config_.trim) {
      trimmed = trim_silence(audio, sample_rate_, config_.trim_threshold_db);
      audio = trimmed;
    }
    std::vector<double> x(audio.begin(), audio.end());
    if (config_.preemphasis > 0)
      for (std::size_t n = x.size(); n-- > 1;) x[n] -= config_.preemphasis * x[n - 1];
    const auto frames = frame_signal(x, sample_rate_, config_);
    const auto n_fft = static_cast<std::size_t>(config_.n_fft(sample_rate_));
    FeatureSequence seq;
    seq.kind = config_.kind;
    seq.frame_rate = 1.0 / config_.frame_hop;
    seq.frames.resize(static_cast<Eigen::Index>(frames.size()), config_.dim());
    for (std::size_t t = 0; t < frames.size(); ++t) {
      std::vector<double> f = frames[t];
      for (std::size_t k = 0; k < f.size(); ++k) f[k] *= window_[k];
      auto lm = log_mel(power_spectrum(f, n_fft), fbank_, config_.log_floor);
      const auto row = static_cast<Eigen::Index>(t);
      if (config_.kind == FeatureKind::lmfb) {
        for (int j = 0; j < config_.n_mels; ++j) seq.frames(row, j) = static_cast<float>(lm[j]);
      } else {
        Eigen::VectorXd c = dct_ * Eigen::Map<const Eigen::VectorXd>(lm.data(), config_.n_mels);
        for (int j = 0; j < config_.n_ceps; ++j) seq.frames(row, j) = static_cast<float>(c[j]);
      }
    }
    return seq;
  }

  const FeatureConfig& config() const { return config_; }
  int sample_rate() const { return sample_rate_; }

 private:
  FeatureConfig config_;
  int sample_rate_;
  Eigen::MatrixXd fbank_;
  Eigen::MatrixXd dct_;
  std::vector<double> window_;
};

/// Loads the utterance's audio (inline buffer or WAV file).
inline Audio load_audio(const Utterance& u) {
  if (!u.samples.empty()) return {u.samples, u.sample_rate};
  if (u.audio_path.empty()) throw IoError("utterance '" + u.id + "' has no audio");
  return read_wav(u.audio_path);
}

/// trim -> pre-emphasis -> frame -> window -> power spectrum -> log-mel (-> DCT).
inline FeatureSequence extract_features(const Utterance& u, const FeatureConfig& config) {
  auto audio = load_audio(u);
  try {
    return FeatureExtractor(config, audio.sample_rate)(audio.samples);
  } catch (const TooShortError& e) {
    throw TooShortError("utterance '" + u.id + "': " + e.what());
  } catch (const EmptyBufferError& e) {
    throw TooShortError("utterance '" + u.id + "': nothing left after trimming (" + e.what() + ")");
  }
}

// Feature cache: "SRFT" magic, uint32 T, uint32 D, uint32 kind, then T*D
// row-major float32, all little-endian.

inline void write_features(std::ostream& os, const FeatureSequence& seq) {
  le::write_tag(os, "SRFT", 4);
  le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(seq.length()));
  le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(seq.dim()));
  le::write_uint<std::uint32_t>(os, static_cast<std::uint32_t>(seq.kind));
  for (Eigen::Index i = 0; i < seq.frames.size(); ++i) le::write_f32(os, seq.frames.data()[i]);
}

inline FeatureSequence read_features(std::istream& is, double frame_rate = 100) {
  if (le::read_tag(is, 4) != "SRFT") throw FormatError("feature cache: bad magic");
  FeatureSequence seq;
  const auto t = le::read_uint<std::uint32_t>(is);
  const auto d = le::read_uint<std::uint32_t>(is);
  const auto kind = le::read_uint<std::uint32_t>(is);
  if (kind > 1) throw FormatError("feature cache: unknown feature kind");
  if (t == 0 || d == 0) throw FormatError("feature cache: empty matrix");
  seq.kind = static_cast<FeatureKind>(kind);
  seq.frame_rate = frame_rate;
  seq.frames.resize(t, d);
  for (Eigen::Index i = 0; i < seq.frames.size(); ++i) seq.frames.data()[i] = le::read_f32(is);
  return seq;
}

inline void save_features(const std::string& path, const FeatureSequence& seq) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  write_features(os, seq);
  if (!os) throw IoError("write failed: " + path);
}

inline FeatureSequence load_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  try {
    return read_features(is);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace sercc

#endif  // SERCC_DSP_HPP_
