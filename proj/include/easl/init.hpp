#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "easl/autodiff.hpp"
#include "easl/random.hpp"

namespace easl {

// Trainable leaf drawn from uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
inline ad::Tensor uniform_parameter(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> data(ad::shape_numel(shape));
  for (auto& v : data) v = rng.uniform(-bound, bound);
  return ad::Tensor::from_data(std::move(shape), std::move(data), true);
}

}  // namespace easl
