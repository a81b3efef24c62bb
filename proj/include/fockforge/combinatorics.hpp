#pragma once

namespace fockforge {

// factorial/binomial as double, computed through a long double table.
// Exact for every value representable below 2^53; callers stay well inside
// the supported range (arguments up to 64).
double factorial(int n);
double binomial(int n, int k);

} // namespace fockforge
