#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace walltherm {

/// Counter-based deterministic random stream. Every stream is derived from a
/// master seed plus a textual label (e.g. "prior/member/7"), so any parallel
/// schedule that assigns the same labels reproduces the same draws.
class RngStream {
public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed);

  /// Derive an independent stream from a master seed and a label.
  static RngStream derive(std::uint64_t master_seed, std::string_view label);

  std::uint64_t next_u64();

  /// Uniform double in (0, 1].
  double uniform();

  /// Standard normal via Box-Muller (portable across standard libraries).
  double normal();

private:
  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace walltherm
