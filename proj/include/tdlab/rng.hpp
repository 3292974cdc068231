#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace tdlab {

// Philox4x32-10 counter-based generator. The 64-bit seed is the key; the
// upper two counter words hold a stream id, so every (seed, stream) pair is an
// independent sequence and no state is shared between consumers.
class Philox {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;

    Philox(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform in (0, 1), 53 random bits.
    double uniform();
    double normal() { return normal_(*this); }

    static Block bijection(Block counter, std::array<std::uint32_t, 2> key);

private:
    std::array<std::uint32_t, 2> key_;
    Block counter_;
    Block buffer_{};
    int next_ = 4;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Substream ids. Fixed values: changing them changes every simulation.
enum class Stream : std::uint64_t {
    Inputs = 1,
    TestInputs = 2,
    Teacher = 3,
    TrainNoise = 4,
    TestNoise = 5,
    W1 = 6,
    W2 = 7,
    ThetaF = 8,
    PowerIteration = 9,
    CopyB = 10,
};

Philox make_rng(std::uint64_t seed, Stream s);

// Column-major fill, entries N(0, scale^2).
void fill_normal(Eigen::Ref<Eigen::MatrixXd> M, Philox& rng, double scale = 1.0);

}  // namespace tdlab
