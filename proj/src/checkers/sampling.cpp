#include "confein/sampling.hpp"

#include "confein/errors.hpp"

#include <array>

namespace confein {
namespace {

constexpr std::array<unsigned, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                              41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
  const double inv_base = 1.0 / base;
  double inv = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * inv;
    index /= base;
    inv *= inv_base;
  }
  return result;
}

std::vector<Point> sample(const Chart& chart, const SamplePlan& plan) {
  if (plan.rule != "halton") {
    throw Error(ErrorCode::Precondition, "unknown sample rule '" + plan.rule + "'");
  }
  if (plan.count == 0) throw Error(ErrorCode::Precondition, "sample count must be positive");
  const std::size_t n = chart.dim();
  if (n > kPrimes.size()) {
    throw Error(ErrorCode::UnsupportedDim, "halton rule supports at most " +
                                               std::to_string(kPrimes.size()) + " coordinates");
  }
  const double margin = plan.margin.value_or(chart.singular_margin());
  if (!(margin >= 0.0)) throw Error(ErrorCode::Precondition, "margin must be >= 0");

  std::vector<Interval> box(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Interval& d = chart.domain()[i];
    if (!(2.0 * margin < d.hi - d.lo)) {
      throw Error(ErrorCode::EmptyDomain, "margin " + std::to_string(margin) +
                                              " leaves no interior for coordinate '" +
                                              chart.names()[i] + "'");
    }
    box[i] = {d.lo + margin, d.hi - margin};
  }

  std::vector<Point> points;
  points.reserve(plan.count);
  for (std::size_t k = 0; k < plan.count; ++k) {
    Point p(n);
    const std::uint64_t index = plan.seed + k + 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = radical_inverse(index, kPrimes[i]);
      p[i] = box[i].lo + u * (box[i].hi - box[i].lo);
    }
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace confein
