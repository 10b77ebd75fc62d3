#pragma once

#include <cstdint>
#include <vector>

#include "knxlab/ids/features.hpp"
#include "knxlab/sim/rng.hpp"

namespace knxlab::ids {

struct SingleClassTraining : Error {
  SingleClassTraining() : Error("training split contains a single class") {}
};

// Labeled feature vectors of a single kind with a train/test partition.
struct Dataset {
  std::vector<FeatureVector> vectors;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
};

// Stratified seeded split: per label, a deterministic shuffle and a 70/30 cut
// by construction.
inline Dataset make_dataset(std::vector<FeatureVector> vectors,
                            std::uint64_t seed, double train_fraction = 0.7) {
  if (train_fraction <= 0 || train_fraction >= 1)
    throw Error("train fraction must be within (0,1)");
  Dataset d;
  d.vectors = std::move(vectors);
  sim::Rng rng(seed);
  for (Label label : {Label::Attack, Label::NoAttack, Label::Unlabeled}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.vectors.size(); ++i)
      if (d.vectors[i].label == label) idx.push_back(i);
    if (idx.empty()) continue;
    // Fisher-Yates with the dataset's own stream.
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.next() % i]);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < n_train ? d.train_idx : d.test_idx).push_back(idx[i]);
  }
  return d;
}

}  // namespace knxlab::ids
