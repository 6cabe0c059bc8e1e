#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fbmvar {

/// A smooth weight f with exact derivatives f^(k), k = 0..order().
class WeightFunction {
 public:
  using Eval = std::function<double(int, double)>;

  WeightFunction(std::string id, int order, Eval eval);

  double operator()(double x) const { return eval_(0, x); }
  /// k-th derivative; throws std::invalid_argument when k > order().
  double derivative(int k, double x) const;
  int order() const noexcept { return order_; }
  const std::string& id() const noexcept { return id_; }

  /// True iff the function is affine (so midpoint and trapezoid weights agree).
  bool affine() const noexcept { return affine_; }
  WeightFunction& mark_affine() noexcept {
    affine_ = true;
    return *this;
  }
  /// Copy under a different identifier.
  WeightFunction named(std::string id) const {
    WeightFunction out = *this;
    out.id_ = std::move(id);
    return out;
  }

 private:
  std::string id_;
  int order_;
  Eval eval_;
  bool affine_ = false;
};

namespace weights {
/// Order reported for functions whose derivatives exist to every order.
inline constexpr int kSmoothOrder = 32;

WeightFunction zero();
WeightFunction constant(double c);
WeightFunction affine(double slope, double intercept);
WeightFunction identity();
WeightFunction square();
WeightFunction sine();
WeightFunction cosine();
/// exp(-x^2)
WeightFunction gaussian();
/// x^2 exp(-x^2)
WeightFunction square_gaussian();
}  // namespace weights

/// Built-in registry used by the CLI and experiment configs.
WeightFunction weight_from_registry(const std::string& id);
std::vector<std::string> weight_registry_ids();

/// Largest |f^(k)(x) - central difference of f^(k-1)| over `points`,
/// relative to max(1, |f^(k)(x)|). Validates user-supplied derivatives.
double derivative_mismatch(const WeightFunction& f, int k, std::span<const double> points,
                           double step = 1e-5);

}  // namespace fbmvar
