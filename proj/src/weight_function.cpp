#include "fbmvar/weight_function.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace fbmvar {

WeightFunction::WeightFunction(std::string id, int order, Eval eval)
    : id_(std::move(id)), order_(order), eval_(std::move(eval)) {
  if (order < 0) throw std::invalid_argument("weight function order must be nonnegative");
  if (!eval_) throw std::invalid_argument("weight function needs an evaluator");
}

double WeightFunction::derivative(int k, double x) const {
  if (k < 0 || k > order_) {
    throw std::invalid_argument("weight function '" + id_ + "' has no derivative of order " +
                                std::to_string(k));
  }
  return eval_(k, x);
}

namespace weights {

namespace {

// d^k/dx^k exp(-x^2) = (-1)^k Hp_k(x) exp(-x^2), Hp the physicists' Hermite
// polynomial: Hp_{k+1} = 2x Hp_k - 2k Hp_{k-1}.
double gaussian_derivative(int k, double x) {
  double prev = 1.0;
  double cur = 2.0 * x;
  double hp = 1.0;
  if (k == 1) hp = cur;
  for (int i = 1; i < k; ++i) {
    const double next = 2.0 * x * cur - 2.0 * i * prev;
    prev = cur;
    cur = next;
    hp = cur;
  }
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * hp * std::exp(-x * x);
}

}  // namespace

WeightFunction zero() {
  return WeightFunction("zero", kSmoothOrder, [](int, double) { return 0.0; }).mark_affine();
}

WeightFunction constant(double c) {
  return WeightFunction("const", kSmoothOrder, [c](int k, double) { return k == 0 ? c : 0.0; })
      .mark_affine();
}

WeightFunction affine(double slope, double intercept) {
  return WeightFunction("affine", kSmoothOrder,
                        [slope, intercept](int k, double x) {
                          if (k == 0) return slope * x + intercept;
                          return k == 1 ? slope : 0.0;
                        })
      .mark_affine();
}

WeightFunction identity() {
  return WeightFunction("x", kSmoothOrder,
                        [](int k, double x) {
                          if (k == 0) return x;
                          return k == 1 ? 1.0 : 0.0;
                        })
      .mark_affine();
}

WeightFunction square() {
  return WeightFunction("x2", kSmoothOrder, [](int k, double x) {
    switch (k) {
      case 0: return x * x;
      case 1: return 2.0 * x;
      case 2: return 2.0;
      default: return 0.0;
    }
  });
}

WeightFunction sine() {
  return WeightFunction("sin", kSmoothOrder, [](int k, double x) {
    switch (k % 4) {
      case 0: return std::sin(x);
      case 1: return std::cos(x);
      case 2: return -std::sin(x);
      default: return -std::cos(x);
    }
  });
}

WeightFunction cosine() {
  return WeightFunction("cos", kSmoothOrder, [](int k, double x) {
    switch (k % 4) {
      case 0: return std::cos(x);
      case 1: return -std::sin(x);
      case 2: return -std::cos(x);
      default: return std::sin(x);
    }
  });
}

WeightFunction gaussian() {
  return WeightFunction("gauss", kSmoothOrder, gaussian_derivative);
}

WeightFunction square_gaussian() {
  // Leibniz rule with (x^2)' = 2x, (x^2)'' = 2.
  return WeightFunction("x2gauss", kSmoothOrder, [](int k, double x) {
    double out = x * x * gaussian_derivative(k, x);
    if (k >= 1) out += k * 2.0 * x * gaussian_derivative(k - 1, x);
    if (k >= 2) out += 0.5 * k * (k - 1) * 2.0 * gaussian_derivative(k - 2, x);
    return out;
  });
}

}  // namespace weights

namespace {

const std::map<std::string, WeightFunction (*)()>& registry() {
  static const std::map<std::string, WeightFunction (*)()> table{
      {"zero", &weights::zero},
      {"one", [] { return weights::constant(1.0); }},
      {"x", &weights::identity},
      {"x2", &weights::square},
      {"sin", &weights::sine},
      {"cos", &weights::cosine},
      {"gauss", &weights::gaussian},
      {"x2gauss", &weights::square_gaussian},
  };
  return table;
}

}  // namespace

WeightFunction weight_from_registry(const std::string& id) {
  const auto& table = registry();
  auto it = table.find(id);
  if (it == table.end()) throw std::invalid_argument("unknown weight function '" + id + "'");
  return it->second().named(id);
}

std::vector<std::string> weight_registry_ids() {
  std::vector<std::string> out;
  for (const auto& [id, make] : registry()) out.push_back(id);
  return out;
}

double derivative_mismatch(const WeightFunction& f, int k, std::span<const double> points,
                           double step) {
  if (k < 1 || k > f.order()) throw std::invalid_argument("derivative order out of range");
  double worst = 0.0;
  for (double x : points) {
    const double fd = (f.derivative(k - 1, x + step) - f.derivative(k - 1, x - step)) / (2.0 * step);
    const double exact = f.derivative(k, x);
    worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
  }
  return worst;
}

}  // namespace fbmvar
