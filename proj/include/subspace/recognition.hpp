#pragma once

#include "subspace/linear.hpp"

#include <string>
#include <vector>

namespace subspace {

/// Distance between features: frobenius is the entrywise L2 norm of the
/// difference (plain Euclidean for vector features); colsum adds up the
/// Euclidean norms of the difference's columns, a convention some 2D feature
/// pipelines use.
enum class Metric { frobenius, colsum };

struct Prediction {
  std::string label;
  double distance = 0.0;
  int gallery_index = -1;
};

/// Minimum-distance (1-nearest-neighbor) classification of every probe
/// against the gallery. Ties go to the lowest gallery index.
std::vector<Prediction> classify(const FeatureSet& gallery, const FeatureSet& probe,
                                 Metric metric = Metric::frobenius);

/// Fraction of predictions whose label matches the truth exactly.
double accuracy(const std::vector<Prediction>& predictions,
                const std::vector<std::string>& truth);

}  // namespace subspace
