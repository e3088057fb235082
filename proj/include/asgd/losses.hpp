#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "asgd/errors.hpp"

namespace asgd {

enum class LossKind { squared, hinge, squared_hinge, logistic };

inline constexpr bool is_classification(LossKind k) { return k != LossKind::squared; }

/// Config-file name: "squared" | "hinge" | "l2svm" | "logistic".
inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::squared: return "squared";
    case LossKind::hinge: return "hinge";
    case LossKind::squared_hinge: return "l2svm";
    case LossKind::logistic: return "logistic";
  }
  return "?";
}

inline std::optional<LossKind> parse_loss_kind(std::string_view name) {
  if (name == "squared") return LossKind::squared;
  if (name == "hinge") return LossKind::hinge;
  if (name == "l2svm" || name == "squared_hinge") return LossKind::squared_hinge;
  if (name == "logistic") return LossKind::logistic;
  return std::nullopt;
}

namespace detail {

inline void check_label(LossKind k, double y) {
  if (is_classification(k) && y != 1.0 && y != -1.0)
    throw contract_error(std::string(to_string(k)) + " loss requires labels in {-1, +1}, got " +
                         std::to_string(y));
}

}  // namespace detail

/// L(s, y) for score s and label y.
inline double loss_value(LossKind k, double s, double y) {
  detail::check_label(k, y);
  switch (k) {
    case LossKind::squared: {
      const double r = y - s;
      return 0.5 * r * r;
    }
    case LossKind::hinge: return std::max(0.0, 1.0 - y * s);
    case LossKind::squared_hinge: {
      const double m = std::max(0.0, 1.0 - y * s);
      return 0.5 * m * m;
    }
    case LossKind::logistic: {
      const double z = y * s;
      return std::log1p(std::exp(-std::abs(z))) + std::max(0.0, -z);
    }
  }
  return 0.0;
}

/// ∂L/∂s. The hinge subgradient at the kink ys = 1 is 0.
inline double loss_deriv(LossKind k, double s, double y) {
  detail::check_label(k, y);
  switch (k) {
    case LossKind::squared: return s - y;
    case LossKind::hinge: return y * s < 1.0 ? -y : 0.0;
    case LossKind::squared_hinge: return -y * std::max(0.0, 1.0 - y * s);
    case LossKind::logistic: {
      // -y σ(-z), evaluated without overflow for either sign of z.
      const double z = y * s;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        return -y * e / (1.0 + e);
      }
      return -y / (1.0 + std::exp(z));
    }
  }
  return 0.0;
}

}  // namespace asgd
