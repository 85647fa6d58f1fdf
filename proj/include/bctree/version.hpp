#pragma once

namespace bctree {

inline constexpr const char* kEngineVersion = "bctree 1.0.0";

// Identity string for the instance generator; recorded in instance file
// comments so instances can be regenerated bit-exactly.
inline constexpr const char* kGeneratorVersion = "mt19937_64/acklam-icdf v1";

}  // namespace bctree
