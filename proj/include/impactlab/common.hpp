// Copyright 2026 The impactlab Authors
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

// Shared vocabulary: error type, 2D vectors, seed streams and a tiny
// parallel_for used by dataset generation and evaluation.

#ifndef IMPACTLAB_COMMON_HPP_
#define IMPACTLAB_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace impactlab {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
  kConfig = 1,
  kIo = 2,
  kNumeric = 3,
  kInvalidArgument,
  kNoContact,
  kNonConvergence,
  kInsufficientData,
  kShapeMismatch,
  kEnvelopeViolation,
  kDegenerateRoute,
  kNoFeasibleStrike,
};

std::string_view error_code_name(ErrorCode code);

// Process exit code for a failure of this kind (1 config, 2 IO, 3 numeric).
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

// Wraps to [-pi, pi).
double wrap_angle(double a);

// 2D helpers; perp() rotates by +90 degrees.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }
inline double cross(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}
inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Counter-based seed derivation. A master seed is split into named streams
// (data/init/train/plan/eval) and each stream into indexed substreams with
// splitmix64, so stages never share RNG state.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t master, std::string_view name);
std::uint64_t substream_seed(std::uint64_t stream, std::uint64_t index);

// Bit-level hash of a sequence of doubles, used to key deterministic noise.
std::uint64_t hash_doubles(std::uint64_t seed, std::initializer_list<double> xs);

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

// Whole-file IO; failures raise kIo. write_text_file creates parent dirs.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// Monotonic seconds since an arbitrary epoch.
double monotonic_seconds();

// Thread cap for internal fan-out. 0 means hardware concurrency.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs body(i) for i in [0, n). Exceptions from workers are rethrown after
// all workers join; the one with the smallest index wins.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace impactlab

#endif  // IMPACTLAB_COMMON_HPP_
