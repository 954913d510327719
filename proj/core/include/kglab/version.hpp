#pragma once

namespace kglab {

// Stamped into every JSON summary so artifacts can be traced to the code
// that produced them.
inline constexpr const char* kVersion = "kglab 1.0.0";

}  // namespace kglab
