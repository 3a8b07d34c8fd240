#pragma once

// Counter-based random streams.
//
// Every random number in the library comes from Philox4x32-10 keyed by the
// master seed. The counter encodes (stream tag, episode, timestep, stream
// index, block), so any draw is a pure function of those coordinates and is
// unaffected by thread scheduling or by how many other draws were made.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace drpi {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Named, disjoint families of streams.
enum class StreamTag : std::uint16_t {
  rollout = 1,     // controller's Monte Carlo disturbance samples
  truth = 2,       // realized disturbance of the simulated plant
  experiment = 3,  // test / experiment helpers (coverage trials, etc.)
};

/// Coordinates of a batch of draws.
/// Episodes are distinguished by their low 24 bits.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint32_t episode = 0;
  std::uint32_t timestep = 0;
};

namespace detail {

// Marsaglia-Tsang ziggurat tables (128 layers, 32-bit draws).
struct ZigguratTables {
  std::array<std::uint32_t, 128> k{};
  std::array<double, 128> w{};
  std::array<double, 128> f{};

  ZigguratTables() {
    constexpr double m1 = 2147483648.0;
    constexpr double vn = 9.91256303526217e-3;
    double dn = 3.442619855899;
    double tn = dn;
    const double q = vn / std::exp(-0.5 * dn * dn);
    k[0] = static_cast<std::uint32_t>((dn / q) * m1);
    k[1] = 0;
    w[0] = q / m1;
    w[127] = dn / m1;
    f[0] = 1.0;
    f[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      k[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      f[i] = std::exp(-0.5 * dn * dn);
      w[i] = dn / m1;
    }
  }
};

inline const ZigguratTables& ziggurat_tables() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

/// Sequential standard-normal draws from one (tag, seed, stream) coordinate.
///
/// Philox blocks are consumed as a stream of 32-bit words and turned into
/// normals with the ziggurat method. The sequence is fully determined by the
/// constructor arguments.
class NormalStream {
 public:
  NormalStream(StreamTag tag, const SeedSpec& seed, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed.master_seed),
             static_cast<std::uint32_t>(seed.master_seed >> 32)},
        stream_(stream),
        timestep_(seed.timestep),
        high_((static_cast<std::uint32_t>(tag) << 24) | (seed.episode & 0xFFFFFFu)),
        tables_(&detail::ziggurat_tables()) {}

  double next() {
    auto hz = static_cast<std::int32_t>(next_word());
    std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
    if (magnitude(hz) < tables_->k[iz]) return hz * tables_->w[iz];
    return slow_path(hz, iz);
  }

  void fill(std::span<double> out) {
    for (double& v : out) v = next();
  }

  /// Uniform on (0, 1).
  double uniform() { return (static_cast<double>(next_word()) + 0.5) * 0x1.0p-32; }

 private:
  static std::uint32_t magnitude(std::int32_t v) {
    return static_cast<std::uint32_t>(v < 0 ? -static_cast<std::int64_t>(v) : v);
  }

  std::uint32_t next_word() {
    if (used_ == 4) {
      words_ = Philox4x32::generate({block_++, stream_, timestep_, high_}, key_);
      used_ = 0;
    }
    return words_[used_++];
  }

  double slow_path(std::int32_t hz, std::uint32_t iz) {
    constexpr double r = 3.442620;
    const auto& t = *tables_;
    for (;;) {
      const double x = hz * t.w[iz];
      if (iz == 0) {
        double tail = 0.0;
        double y = 0.0;
        do {
          tail = -std::log(uniform()) * (1.0 / r);
          y = -std::log(uniform());
        } while (y + y < tail * tail);
        return hz > 0 ? r + tail : -r - tail;
      }
      if (t.f[iz] + uniform() * (t.f[iz - 1] - t.f[iz]) < std::exp(-0.5 * x * x)) return x;
      hz = static_cast<std::int32_t>(next_word());
      iz = static_cast<std::uint32_t>(hz) & 127u;
      if (magnitude(hz) < t.k[iz]) return hz * t.w[iz];
    }
  }

  Philox4x32::Key key_;
  std::uint32_t stream_;
  std::uint32_t timestep_;
  std::uint32_t high_;
  const detail::ZigguratTables* tables_;
  std::uint32_t block_ = 0;
  Philox4x32::Counter words_{};
  int used_ = 4;
};

}  // namespace drpi
