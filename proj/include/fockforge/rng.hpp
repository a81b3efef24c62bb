#pragma once

#include <cstdint>
#include <random>

namespace fockforge {

// Mixes a base seed with a stream index into an independent sub-seed
// (splitmix64 finalizer). Used to hand every scan point, tomography setting
// and bootstrap resample its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Deterministic sampling built directly on std::mt19937_64, whose output
// sequence is fixed by the standard. The std:: distribution adaptors are
// implementation defined and must not be used anywhere in this library:
// identical seeds have to give identical counts on any toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform double in [0, 1) with 53 random bits
    double uniform();

    // standard normal via Box-Muller (no state caching)
    double normal();

    // Poisson sample; exact (exponential gaps) below mean 256, normal
    // approximation with rounding above. Throws std::invalid_argument for
    // negative or non-finite means.
    std::int64_t poisson(double mean);

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace fockforge
