#pragma once

#include <initializer_list>
#include <vector>

#include "eclosure/core.hpp"

namespace testing_helpers {

inline eclosure::Subset S(std::initializer_list<int> one_based) {
  return eclosure::Subset::of(one_based);
}

inline eclosure::ValueVector evals(std::vector<double> v) {
  return eclosure::ValueVector(eclosure::ValueKind::evalue, std::move(v));
}

inline eclosure::ValueVector pvals(std::vector<double> v) {
  return eclosure::ValueVector(eclosure::ValueKind::pvalue, std::move(v));
}

inline eclosure::ValueVector wstats(std::vector<double> v) {
  return eclosure::ValueVector(eclosure::ValueKind::knockoff_stat, std::move(v));
}

}  // namespace testing_helpers
