#pragma once

#include <initializer_list>
#include <tuple>
#include <vector>

#include "cifboot/data_model.hpp"
#include "cifboot/rng.hpp"
#include "cifboot/simulation.hpp"

namespace fixtures {

using cifboot::Observation;
using cifboot::Sample;
using cifboot::Status;

inline Sample sample(std::initializer_list<std::tuple<double, int>> rows) {
  Sample s;
  for (const auto& [exit, status] : rows) {
    s.observations.push_back(cifboot::make_observation(0.0, exit, static_cast<Status>(status)));
  }
  return s;
}

/// Exits 1, 2, 3 with causes 1, 2, 1.
inline Sample three_subjects() { return sample({{1, 1}, {2, 2}, {3, 1}}); }

/// Exits 1, 2, 3 with cause 1, censored, cause 2.
inline Sample censored_three() { return sample({{1, 1}, {2, 0}, {3, 2}}); }

inline Sample simulated(const cifboot::HazardModel& model, std::size_t n, double lambda,
                        std::uint64_t seed) {
  cifboot::Rng rng(seed);
  return cifboot::simulate_sample(model, n, lambda, rng);
}

}  // namespace fixtures
