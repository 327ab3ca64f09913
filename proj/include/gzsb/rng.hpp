#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace gzsb {

// mt19937_64 with hand-rolled draws. std:: distributions are
// implementation-defined, so going through them would break bit-for-bit
// reproducibility of checkpoints across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // uniform in [0, 1), 53-bit mantissa
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // uniform integer in [0, n); modulo bias is < 2^-57 for the pool sizes
    // used here
    std::size_t bounded(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    // standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        do {
            u = u01();
        } while (u <= 0.0);
        const double r = std::sqrt(-2.0 * std::log(u));
        const double t = 2.0 * kPi * u01();
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[bounded(i)]);
        }
    }

  private:
    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gzsb
