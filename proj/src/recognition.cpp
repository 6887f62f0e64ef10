#include "subspace/recognition.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace subspace {

namespace {

double feature_distance(const Matrix& a, const Matrix& b, Metric metric) {
  if (metric == Metric::frobenius) return (a - b).norm();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) sum += (a.col(j) - b.col(j)).norm();
  return sum;
}

}  // namespace

std::vector<Prediction> classify(const FeatureSet& gallery, const FeatureSet& probe,
                                 Metric metric) {
  if (gallery.features.empty()) throw std::invalid_argument("classify: empty gallery");
  const Eigen::Index rows = gallery.features.front().rows();
  const Eigen::Index cols = gallery.features.front().cols();
  for (const Matrix& f : gallery.features)
    if (f.rows() != rows || f.cols() != cols)
      throw std::invalid_argument("classify: inconsistent gallery feature shapes");

  std::vector<Prediction> out;
  out.reserve(probe.features.size());
  for (const Matrix& p : probe.features) {
    if (p.rows() != rows || p.cols() != cols) {
      std::ostringstream msg;
      msg << "classify: probe feature shape " << p.rows() << "x" << p.cols()
          << " does not match gallery " << rows << "x" << cols;
      throw std::invalid_argument(msg.str());
    }
    Prediction best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < gallery.features.size(); ++g) {
      const double d = feature_distance(p, gallery.features[g], metric);
      if (d < best.distance) {
        best.distance = d;
        best.gallery_index = static_cast<int>(g);
        best.label = gallery.labels[g];
      }
    }
    out.push_back(std::move(best));
  }
  return out;
}

double accuracy(const std::vector<Prediction>& predictions,
                const std::vector<std::string>& truth) {
  if (predictions.size() != truth.size()) {
    std::ostringstream msg;
    msg << "accuracy: " << predictions.size() << " predictions vs " << truth.size()
        << " truth labels";
    throw std::invalid_argument(msg.str());
  }
  if (predictions.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i].label == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

}  // namespace subspace
