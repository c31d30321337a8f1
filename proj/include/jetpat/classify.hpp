#ifndef JETPAT_CLASSIFY_HPP
#define JETPAT_CLASSIFY_HPP

// Chi-square nearest-neighbor (NNC) and nearest-subspace (NSC) classifiers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace jetpat {

using ClassId = int;

struct LabeledFeature {
  std::vector<double> vector;
  ClassId label = 0;
};

/// sum (a_i - b_i)^2 / (a_i + b_i); bins where both are zero contribute nothing.
inline double chi_square(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("chi_square: length mismatch " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = a[i] + b[i];
    if (s > 0.0) {
      const double diff = a[i] - b[i];
      d += diff * diff / s;
    }
  }
  return d;
}

/// Index of the training sample nearest to `query` in chi-square distance
/// (lowest index wins ties).
inline std::size_t nnc_nearest(std::span<const LabeledFeature> train, std::span<const double> query) {
  if (train.empty()) throw std::invalid_argument("nnc_predict: empty training set");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double d = chi_square(train[i].vector, query);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline ClassId nnc_predict(std::span<const LabeledFeature> train, std::span<const double> query) {
  return train[nnc_nearest(train, query)].label;
}

/// Element-wise square root, applied before fitting or querying the NSC.
inline std::vector<double> sqrt_preprocess(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0)
      throw std::invalid_argument("sqrt_preprocess: negative entry at index " + std::to_string(i));
    out[i] = std::sqrt(v[i]);
  }
  return out;
}

/// Per-class subspace size: a fixed dimension or the smallest dimension capturing
/// the given fraction of the class scatter energy.
struct SubspaceRule {
  struct Fixed {
    std::size_t dim;
  };
  struct Energy {
    double fraction;
  };
  std::variant<Fixed, Energy> rule = Energy{0.99};

  static SubspaceRule fixed(std::size_t dim) { return {Fixed{dim}}; }
  static SubspaceRule energy(double fraction) { return {Energy{fraction}}; }
};

/// Eigenvalues below this fraction of the largest are treated as zero rank.
inline constexpr double kRankTolerance = 1e-12;

struct ClassModel {
  ClassId label = 0;
  Eigen::MatrixXd basis;  // feature_dim x subspace_dim, orthonormal columns

  std::size_t subspace_dim() const noexcept { return static_cast<std::size_t>(basis.cols()); }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(basis.rows()); }

  /// ||(I - B B^T) y||_2
  double residual(std::span<const double> y) const {
    if (y.size() != feature_dim())
      throw std::invalid_argument("NSC residual: query dimension " + std::to_string(y.size()) +
                                  " does not match model dimension " +
                                  std::to_string(feature_dim()));
    const Eigen::Map<const Eigen::VectorXd> q(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::VectorXd coeff = basis.transpose() * q;
    return (q - basis * coeff).norm();
  }
};

/// Fits one principal subspace per class. Each basis holds the leading left singular
/// vectors of the class data matrix X_c (feature_dim x n_c), i.e. the principal
/// eigenvectors of X_c X_c^T. Models come out in ascending label order.
inline std::vector<ClassModel> fit_nsc(std::span<const LabeledFeature> train,
                                       const SubspaceRule& rule = {}) {
  if (train.empty()) throw std::invalid_argument("fit_nsc: empty training set");
  const std::size_t dim = train.front().vector.size();
  std::map<ClassId, std::vector<const LabeledFeature*>> by_class;
  for (const auto& s : train) {
    if (s.vector.size() != dim)
      throw std::invalid_argument("fit_nsc: inconsistent feature lengths");
    by_class[s.label].push_back(&s);
  }

  std::vector<ClassModel> models;
  for (const auto& [label, samples] : by_class) {
    if (samples.empty())
      throw std::invalid_argument("fit_nsc: class " + std::to_string(label) + " has no samples");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t j = 0; j < samples.size(); ++j)
      for (std::size_t i = 0; i < dim; ++i)
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = samples[j]->vector[i];

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
    const Eigen::VectorXd energy = svd.singularValues().array().square();
    const double top = energy.size() > 0 ? energy(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < energy.size() && energy(rank) > kRankTolerance * top) ++rank;
    if (rank == 0)
      throw std::invalid_argument("fit_nsc: class " + std::to_string(label) +
                                  " has an all-zero scatter matrix");

    Eigen::Index keep = rank;
    if (const auto* fixed = std::get_if<SubspaceRule::Fixed>(&rule.rule)) {
      if (fixed->dim == 0) throw std::invalid_argument("fit_nsc: subspace dimension must be >= 1");
      keep = std::min<Eigen::Index>(rank, static_cast<Eigen::Index>(fixed->dim));
    } else {
      const double fraction = std::get<SubspaceRule::Energy>(rule.rule).fraction;
      if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("fit_nsc: energy fraction must be in (0, 1]");
      const double total = energy.head(rank).sum();
      double acc = 0.0;
      keep = 0;
      while (keep < rank) {
        acc += energy(keep++);
        if (acc >= fraction * total) break;
      }
    }
    models.push_back({label, svd.matrixU().leftCols(keep)});
  }
  return models;
}

/// Relative slack under which two residuals count as a tie.
inline constexpr double kResidualTieTolerance = 1e-12;

/// Label of the model with the smallest projection residual (lowest label on ties).
inline ClassId nsc_predict(std::span<const ClassModel> models, std::span<const double> query) {
  if (models.empty()) throw std::invalid_argument("nsc_predict: no class models");
  double qnorm = 0.0;
  for (double v : query) qnorm += v * v;
  const double slack = kResidualTieTolerance * std::sqrt(qnorm);

  ClassId best = models.front().label;
  double best_r = std::numeric_limits<double>::infinity();
  for (const auto& m : models) {
    const double r = m.residual(query);
    if (r < best_r - slack || (r <= best_r + slack && m.label < best)) {
      best_r = std::min(r, best_r);
      best = m.label;
    }
  }
  return best;
}

}  // namespace jetpat

#endif  // JETPAT_CLASSIFY_HPP
