#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kappa {

/// Software version recorded in output manifests.
inline constexpr std::string_view version_string = "0.1.0";

/// FNV-1a 64-bit hash rendered as 16 hex digits; used to fingerprint
/// configurations in output files.
std::string fnv1a_hex(std::string_view text);

/// Locale-independent double formatting ("%.*g") for deterministic output.
std::string fmt_g(double v, int precision = 12);

} // namespace kappa
