#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace calm {

/// Seeded random stream with portable output.
///
/// std::mt19937_64 is fully specified by the standard, but the standard
/// distributions are not, so uniform/normal/shuffle are derived here from
/// raw engine output. Named substreams ("shuffle", "eps", "dropout",
/// "init", ...) are independent engines derived from (seed, name), so
/// consuming one never perturbs another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, cached second value).
  double normal();
  /// Uniform integer in [0, n), rejection-sampled.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace calm
