#pragma once

#include <doctest.h>

#include <cstdint>
#include <memory>
#include <vector>

#include "truncchain/error.hpp"
#include "truncchain/function_class.hpp"
#include "truncchain/rng.hpp"

namespace tc_test {

/// Code of the Error thrown by fn; fails the test if nothing is thrown.
template <class Fn>
truncchain::ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const truncchain::Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return truncchain::ErrorCode::InvalidArgument;
}

/// {0, f} with f = (3, -1) under P = (1/4, 3/4).
inline truncchain::ClassPtr two_point() {
  auto space = std::make_shared<const truncchain::DiscreteSpace>(std::vector<double>{0.25, 0.75});
  return truncchain::make_class(space, {{0.0, 0.0}, {3.0, -1.0}});
}

inline std::vector<double> random_probs(truncchain::CounterRng& rng, std::size_t atoms,
                                        double floor = 0.0) {
  std::vector<double> p(atoms);
  double total = 0.0;
  for (auto& v : p) {
    v = floor + rng.uniform() + 1e-3;
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

/// Random class with small-integer values, so many distance ties occur.
inline truncchain::ClassPtr random_class(std::uint64_t seed, std::size_t functions,
                                         std::size_t atoms) {
  truncchain::CounterRng rng(truncchain::mix64(seed));
  auto space = std::make_shared<const truncchain::DiscreteSpace>(random_probs(rng, atoms));
  std::vector<std::vector<double>> table(functions, std::vector<double>(atoms));
  for (auto& row : table) {
    for (auto& v : row) v = static_cast<double>(static_cast<int>(rng.below(7)) - 3) * 0.5;
  }
  return truncchain::make_class(space, table);
}

}  // namespace tc_test
