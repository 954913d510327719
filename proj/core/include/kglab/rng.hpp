#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

// Counter-based Gaussian stream: Philox4x32-10 keyed by the master seed, with
// the counter laid out as {draw_lo, draw_hi, replica, stream}. Any (replica,
// stream, draw index) triple is reproducible in O(1) without generating the
// stream prefix, and distinct replicas/streams never collide.

namespace kglab {

enum class StreamId : std::uint32_t {
  ExactSampler = 0,
  NoiseGrid = 1,
  YPath = 2,
  XField = 3,
  USecond = 4,
  NullCalibration = 5,
  BrownianOracle = 6,
};

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replica_id = 0;
};

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint64_t(p1) >> 32, lo1 = std::uint32_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

}  // namespace detail

class GaussianStream {
 public:
  GaussianStream(const SeedSpec& seed, StreamId stream) {
    if (seed.replica_id >> 32)
      throw std::invalid_argument("GaussianStream: replica_id must fit in 32 bits");
    key_ = {std::uint32_t(seed.master_seed), std::uint32_t(seed.master_seed >> 32)};
    replica_ = std::uint32_t(seed.replica_id);
    stream_ = std::uint32_t(stream);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto block = detail::philox4x32(
        {std::uint32_t(draw_), std::uint32_t(draw_ >> 32), replica_, stream_}, key_);
    ++draw_;
    const double u1 = to_unit(block[0], block[1]);  // in (0, 1]
    const double u2 = to_unit(block[2], block[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  // Draw counter, for reproducibility assertions.
  std::uint64_t draws_used() const { return draw_; }

 private:
  static double to_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t x = (std::uint64_t(a) << 32) | b;
    return double((x >> 11) + 1) * 0x1p-53;
  }

  std::array<std::uint32_t, 2> key_{};
  std::uint32_t replica_ = 0, stream_ = 0;
  std::uint64_t draw_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace kglab
