#include "promptevo/engine/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace promptevo::engine {

namespace {

std::size_t draw(const std::vector<double>& fitness, const std::vector<bool>& allowed,
                 std::mt19937_64& rng) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    if (!allowed[i]) continue;
    if (!(fitness[i] >= 0.0)) throw std::invalid_argument("fitness values must be non-negative");
    total += fitness[i];
    ++count;
  }
  if (count == 0) throw std::invalid_argument("nothing to select from");

  if (total <= 0.0) {
    std::uniform_int_distribution<std::size_t> pick(0, count - 1);
    auto k = pick(rng);
    for (std::size_t i = 0; i < fitness.size(); ++i)
      if (allowed[i] && k-- == 0) return i;
  }

  std::uniform_real_distribution<double> spin(0.0, total);
  const double r = spin(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    if (!allowed[i] || fitness[i] <= 0.0) continue;
    acc += fitness[i];
    last = i;
    if (r < acc) return i;
  }
  return last;  // r landed on the rounding edge of the wheel
}

}  // namespace

std::size_t roulette_index(const std::vector<double>& fitness, std::mt19937_64& rng) {
  return draw(fitness, std::vector<bool>(fitness.size(), true), rng);
}

std::pair<std::size_t, std::size_t> roulette_pair(const std::vector<double>& fitness,
                                                  std::mt19937_64& rng, std::size_t exclude) {
  std::vector<bool> allowed(fitness.size(), true);
  if (exclude < allowed.size()) allowed[exclude] = false;
  const auto first = draw(fitness, allowed, rng);
  allowed[first] = false;
  const auto second = draw(fitness, allowed, rng);
  return {first, second};
}

std::vector<std::size_t> top_survivors(const std::vector<Candidate>& candidates, std::size_t keep) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = candidates[a];
    const auto& y = candidates[b];
    if (x.fitness != y.fitness) return x.fitness > y.fitness;
    if (x.is_child != y.is_child) return x.is_child;
    return x.id < y.id;
  });
  order.resize(std::min(keep, order.size()));
  return order;
}

}  // namespace promptevo::engine
