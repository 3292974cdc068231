#include "tdlab/rng.hpp"

namespace tdlab {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = std::uint64_t(a) * b;
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

}  // namespace

Philox::Block Philox::bijection(Block c, std::array<std::uint32_t, 2> k) {
    for (int r = 0; r < 10; ++r) {
        if (r) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
      counter_{0u, 0u, std::uint32_t(stream), std::uint32_t(stream >> 32)} {}

Philox::result_type Philox::operator()() {
    if (next_ == 4) {
        buffer_ = bijection(counter_, key_);
        if (++counter_[0] == 0) ++counter_[1];
        next_ = 0;
    }
    return buffer_[next_++];
}

double Philox::uniform() {
    std::uint64_t a = (*this)() >> 5, b = (*this)() >> 6;  // 27 + 26 bits
    return (double(a) * 67108864.0 + double(b) + 0.5) / 9007199254740992.0;
}

Philox make_rng(std::uint64_t seed, Stream s) { return Philox(seed, static_cast<std::uint64_t>(s)); }

void fill_normal(Eigen::Ref<Eigen::MatrixXd> M, Philox& rng, double scale) {
    double* p = M.data();
    const Eigen::Index n = M.size();
    // Ref may carry an outer stride; walk columns explicitly
    if (M.outerStride() == M.rows()) {
        for (Eigen::Index i = 0; i < n; ++i) p[i] = scale * rng.normal();
        return;
    }
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = scale * rng.normal();
}

}  // namespace tdlab
