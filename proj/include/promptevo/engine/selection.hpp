#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace promptevo::engine {

/// Roulette-wheel draw: index i with probability S_i / sum(S); uniform when
/// every fitness is zero. Fitness values must be non-negative.
std::size_t roulette_index(const std::vector<double>& fitness, std::mt19937_64& rng);

/// Two distinct indices, the second drawn from the remaining members.
/// `exclude` (if < size) is never drawn, which DE uses to skip the target.
std::pair<std::size_t, std::size_t> roulette_pair(const std::vector<double>& fitness,
                                                  std::mt19937_64& rng,
                                                  std::size_t exclude = static_cast<std::size_t>(-1));

struct Candidate {
  std::string id;
  double fitness = 0.0;
  bool is_child = false;
};

/// GA survivors: the `keep` highest-fitness candidates; ties go to children,
/// then to the smaller id. Returns indices into `candidates` in rank order.
std::vector<std::size_t> top_survivors(const std::vector<Candidate>& candidates, std::size_t keep);

/// DE replacement rule: the child takes the slot only if strictly fitter.
inline bool de_replaces(double child_fitness, double target_fitness) {
  return child_fitness > target_fitness;
}

}  // namespace promptevo::engine
