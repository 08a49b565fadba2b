#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace bpinn {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
//
// Output depends only on (seed, stream, counter), never on the platform's
// standard library, so every dataset, chain and mask sequence is
// reproducible bit-for-bit.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block apply(Block counter, Key key);
};

// Named streams keep independent consumers from sharing random numbers.
enum class RngStream : std::uint64_t {
  kInit = 1,
  kMomentum = 2,
  kAccept = 3,
  kVariational = 4,
  kFlow = 5,
  kDropoutMask = 6,
  kSensorPlacement = 7,
  kSensorNoise = 8,
  kPriorDraws = 9,
  kPredictive = 10,
};

class Rng {
 public:
  static constexpr const char* kAlgorithm = "philox4x32-10";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);
  Rng(std::uint64_t seed, RngStream stream) : Rng(seed, static_cast<std::uint64_t>(stream)) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform in the open interval (0, 1), 53-bit resolution.
  double uniform();
  // Standard normal by Box-Muller.
  double normal();
  // Bernoulli(p).
  bool bernoulli(double p) { return uniform() < p; }

  void fill_normal(Eigen::Ref<Eigen::VectorXd> out);
  Eigen::VectorXd normal_vector(Eigen::Index n);

 private:
  void refill();

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::Block block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bpinn
