#include "nhqmc/random.hpp"

namespace nhqmc {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t master_seed, std::uint64_t stream_id,
                std::uint64_t draw_index) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ draw_index);
  return Rng(h);
}

}  // namespace nhqmc
