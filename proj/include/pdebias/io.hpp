#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pdebias {

/// Formats a double with 17 significant digits (round-trip exact).
std::string fmt17(double v);

/// FNV-1a 64-bit hash, used to fingerprint resolved configurations.
std::uint64_t fnv1a64(const std::string& text);

std::string hex64(std::uint64_t v);

/// n equispaced values on [a, b], endpoints included. Requires n >= 2.
std::vector<double> linspace(double a, double b, int n);

}  // namespace pdebias
