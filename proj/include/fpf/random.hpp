#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fpf {

/// Well-known stream ids. Each stochastic component draws from its own
/// substream so that truth noise never aliases particle noise.
namespace streams {
inline constexpr std::uint64_t truth = 0x7472757468ULL;
inline constexpr std::uint64_t fpf = 0x667066ULL;
inline constexpr std::uint64_t bootstrap = 0x626f6f74ULL;
}  // namespace streams

/// Reproducible source of random numbers keyed by (seed, stream_id).
///
/// Two streams constructed from the same key produce the same sequence.
/// Streams with different ids are seeded through independent seed_seq
/// material and are treated as independent.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Fresh stream derived from this stream's key and `id`. Does not
  /// consume anything from this stream.
  RandomStream substream(std::uint64_t id) const;

  double normal();
  /// Uniform on [0, 1).
  double uniform();
  void fill_normal(std::span<double> out);

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace fpf
