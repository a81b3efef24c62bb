#include "fockforge/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fockforge {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

std::int64_t Rng::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("poisson mean must be finite and non-negative");
    if (mean == 0.0) return 0;
    if (mean < 256.0) {
        // count unit-rate exponential arrivals inside [0, mean)
        std::int64_t k = -1;
        double acc = 0.0;
        do {
            acc += -std::log1p(-uniform());
            ++k;
        } while (acc < mean);
        return k;
    }
    double draw = std::round(mean + std::sqrt(mean) * normal());
    return draw < 0.0 ? 0 : static_cast<std::int64_t>(draw);
}

} // namespace fockforge
