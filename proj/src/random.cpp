#include "qvts/random.hpp"

#include <algorithm>
#include <stdexcept>

namespace qvts {

std::size_t sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  std::size_t last_positive = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = i;
    if (u < acc) return i;
  }
  if (last_positive == probs.size()) {
    throw std::invalid_argument("sample_index: no positive weight");
  }
  return last_positive;
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    index_.push_back(i);
    cumulative_.push_back(acc);
  }
  if (index_.empty()) {
    throw std::invalid_argument("DiscreteSampler: no positive weight");
  }
}

std::size_t DiscreteSampler::sample(double u) const {
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  return index_[static_cast<std::size_t>(it - cumulative_.begin())];
}

}  // namespace qvts
