#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "asgd/losses.hpp"

namespace asgd {

/// Benchmark configurations: λ, M = max ‖x‖² over 1000 samples, and the
/// averaging start t0 where one was published. Data files are not shipped.
struct Preset {
  std::string_view name;
  std::string_view description;
  std::size_t dim;
  double lambda;
  double M;
  std::optional<std::uint64_t> t0;
  LossKind loss = LossKind::squared_hinge;
};

inline constexpr std::array<Preset, 12> kPresets{{
    {"covtype", "forest cover type, class 2 vs rest", 54, 1e-6, 6.8, 100},
    {"delta", "synthetic, dense", 500, 1e-2, 3.8e3, 100},
    {"rcv1", "text, CCAT vs rest", 47153, 1e-5, 1.0, 781},
    {"mnist9", "digit image features, 9 vs rest", 2304, 1e-3, 2.1e4, 128},
    {"alpha", "synthetic, dense", 500, 1e-5, 1.0, std::nullopt},
    {"beta", "synthetic, dense", 500, 1e-4, 1.0, std::nullopt},
    {"gamma", "synthetic, dense", 500, 1e-3, 2.5e3, std::nullopt},
    {"epsilon", "synthetic, dense", 2000, 1e-5, 1.0, std::nullopt},
    {"zeta", "synthetic, dense", 2000, 1e-5, 1.0, std::nullopt},
    {"fd", "character images", 900, 1e-5, 1.0, std::nullopt},
    {"ocr", "character images", 1156, 1e-5, 1.0, std::nullopt},
    {"dna", "DNA sequences, sparse", 800, 1e-3, 200.0, std::nullopt},
}};

inline const Preset* find_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace asgd
