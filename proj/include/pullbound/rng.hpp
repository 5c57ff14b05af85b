#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace pullbound {

// Counter-based random streams built on Philox4x32-10.
//
// A stream is identified by (master_seed, path_index). Every draw is addressed
// by (substream, block) counters instead of mutable generator state, so
//   - identical (master_seed, path_index) reproduce identical draws bit for bit,
//   - draws are independent of thread count and evaluation order,
//   - the k-th increment of a path is the same whether the path is simulated
//     to horizon T or 10T, streamed or materialized.
//
// Substream 0 carries Gaussian increments, substream 1 carries the uniforms
// used by the crossing correction. path_index must stay below 2^62: the top
// bits of the high counter word tag the substream.

std::uint64_t splitmix64(std::uint64_t x);

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& x, std::uint32_t k0, std::uint32_t k1) {
  constexpr std::uint32_t m0 = 0xD2511F53u;
  constexpr std::uint32_t m1 = 0xCD9E8D57u;
  const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * x[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * x[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::uint32_t k0, std::uint32_t k1) {
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, k0, k1);
    k0 += w0;
    k1 += w1;
  }
  return ctr;
}

inline std::uint64_t join64(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// (0,1], usable as the radial uniform of a Box-Muller pair.
inline double to_unit_pos(std::uint64_t u) {
  return static_cast<double>((u >> 11) + 1) * 0x1.0p-53;
}

// (0,1), never exactly 0 or 1.
inline double to_unit_open(std::uint64_t u) {
  return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t path_index)
      : master_seed_(master_seed), path_index_(path_index) {
    const std::uint64_t k = splitmix64(master_seed);
    key0_ = static_cast<std::uint32_t>(k);
    key1_ = static_cast<std::uint32_t>(k >> 32);
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t path_index() const { return path_index_; }

  std::array<std::uint32_t, 4> raw_block(std::uint32_t substream, std::uint64_t block) const {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block),
        static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(path_index_),
        static_cast<std::uint32_t>(path_index_ >> 32) | (substream << 30),
    };
    return detail::philox4x32_10(ctr, key0_, key1_);
  }

  // Box-Muller pair from one block of substream 0.
  std::pair<double, double> gaussian_pair(std::uint64_t block) const {
    const auto b = raw_block(0, block);
    const double u1 = detail::to_unit_pos(detail::join64(b[0], b[1]));
    const double u2 = static_cast<double>(detail::join64(b[2], b[3]) >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  // Gaussian draw addressed by a flat index; a simulation step k in dimension d
  // consumes indices k*d .. k*d+d-1.
  double gaussian(std::uint64_t index) const {
    const auto pair = gaussian_pair(index >> 1);
    return (index & 1) ? pair.second : pair.first;
  }

  void gaussians(std::uint64_t first_index, std::span<double> out) const {
    std::uint64_t i = first_index;
    for (std::size_t k = 0; k < out.size();) {
      const auto pair = gaussian_pair(i >> 1);
      if ((i & 1) == 0) {
        out[k++] = pair.first;
        ++i;
        if (k < out.size()) {
          out[k++] = pair.second;
          ++i;
        }
      } else {
        out[k++] = pair.second;
        ++i;
      }
    }
  }

  // Uniform in (0,1) addressed per simulation step, substream 1.
  double uniform(std::uint64_t index) const {
    const auto b = raw_block(1, index);
    return detail::to_unit_open(detail::join64(b[0], b[1]));
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t path_index_;
  std::uint32_t key0_;
  std::uint32_t key1_;
};

// Sequential reader over a stream's Gaussian substream. next() returns exactly
// stream.gaussian(i) for i = 0, 1, 2, ... while touching each block once.
class NormalCursor {
 public:
  explicit NormalCursor(const RngStream& stream) : stream_(&stream) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto pair = stream_->gaussian_pair(next_index_ >> 1);
    spare_ = pair.second;
    have_spare_ = true;
    next_index_ += 2;
    return pair.first;
  }

 private:
  const RngStream* stream_;
  std::uint64_t next_index_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pullbound
