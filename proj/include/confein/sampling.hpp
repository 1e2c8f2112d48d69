#pragma once

#include "confein/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace confein {

// Deterministic sample set over the margin-shrunk coordinate box of a chart.
struct SamplePlan {
  std::size_t count = 200;
  // Overrides the chart's singular margin when set.
  std::optional<double> margin;
  // Only "halton" is defined: radical inverses in the first dim primes,
  // starting at index seed + 1.
  std::string rule = "halton";
  std::uint64_t seed = 0;
};

// Throws EmptyDomain when the margin swallows an interval and
// Error(Precondition) for an unknown rule or a zero count.
std::vector<Point> sample(const Chart& chart, const SamplePlan& plan);

double radical_inverse(std::uint64_t index, unsigned base);

}  // namespace confein
