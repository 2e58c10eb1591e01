#ifndef DGN_PHILOX_HPP
#define DGN_PHILOX_HPP

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every
// output block is a pure function of (counter, key), so any sub-range of a
// stream can be produced independently and in any order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace dgn {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t key) : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

  Block operator()(std::uint64_t counter) const {
    Block ctr{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), 0u, 0u};
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  std::array<std::uint32_t, 2> key_;
};

/// Two independent N(0,1) deviates from one Philox block (Box-Muller on a
/// pair of 53-bit uniforms in the open interval (0, 1)).
inline std::array<double, 2> normal_pair(const Philox4x32& gen, std::uint64_t counter) {
  const auto b = gen(counter);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const std::uint64_t m1 = (std::uint64_t{b[0]} << 21) ^ (b[1] >> 11);
  const std::uint64_t m2 = (std::uint64_t{b[2]} << 21) ^ (b[3] >> 11);
  const double u1 = (static_cast<double>(m1) + 0.5) * kScale;
  const double u2 = (static_cast<double>(m2) + 0.5) * kScale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(angle), r * std::sin(angle)};
}

}  // namespace dgn

#endif  // DGN_PHILOX_HPP
