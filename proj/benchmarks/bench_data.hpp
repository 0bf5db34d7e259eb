#pragma once

#include "popaudit/synthetic.hpp"

namespace popaudit::bench {

// Shared synthetic corpus; 100 users per archetype keeps KNN fits quick.
inline const SyntheticDataset& corpus() {
  static const SyntheticDataset data = [] {
    SyntheticSpec spec;
    spec.users_per_archetype = 100;
    spec.items = 400;
    return generate_synthetic(spec);
  }();
  return data;
}

}  // namespace popaudit::bench
