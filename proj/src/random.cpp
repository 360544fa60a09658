#include "fpf/random.hpp"

namespace fpf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream_id), hi(stream_id)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

RandomStream RandomStream::substream(std::uint64_t id) const {
  return RandomStream(seed_, splitmix64(stream_id_ ^ splitmix64(id)));
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::uniform() { return uniform_(engine_); }

void RandomStream::fill_normal(std::span<double> out) {
  for (double& v : out) {
    v = normal_(engine_);
  }
}

}  // namespace fpf
