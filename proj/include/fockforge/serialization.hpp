#pragma once

#include <string>

#include "fockforge/fock_core.hpp"

namespace fockforge {

// JSON document form shared by states and density matrices:
//   {"cutoff": int, "basis": "nH,nV row-major", "re": [[...]], "im": [[...]]}
// For a FockVector "re"/"im" are (cutoff+1) x (cutoff+1) grids over (nH, nV);
// for a DensityMatrix they are the full dim x dim matrix. Round trips are
// bit exact (shortest round-trip double formatting on write, exact parse on
// read). truncated_mass is a diagnostic and is not serialized.

std::string state_to_json(const FockVector& psi);
FockVector state_from_json(const std::string& text);

std::string density_to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const std::string& text);

} // namespace fockforge
