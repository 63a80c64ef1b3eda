#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tegnas/numkit/eig.hpp"

namespace tegnas::numkit {

/// A fitted principal-component basis. Components are sign-canonicalized
/// (largest-magnitude entry positive) so the basis does not depend on point order.
struct PcaModel {
  std::vector<double> mean;
  Matrix components;  // dims x D, rows orthonormal
  std::vector<double> explained_variance_ratio;
  bool degenerate = false;

  std::vector<double> project(std::span<const double> point) const {
    if (point.size() != mean.size()) throw Error(Errc::ShapeMismatch, "point dimension differs from PCA basis");
    std::vector<double> out(components.rows(), 0.0);
    if (degenerate) return out;
    for (std::size_t k = 0; k < components.rows(); ++k) {
      double s = 0.0;
      for (std::size_t d = 0; d < point.size(); ++d) s += components(k, d) * (point[d] - mean[d]);
      out[k] = s;
    }
    return out;
  }
};

inline PcaModel fit_pca(const std::vector<std::vector<double>>& points, std::size_t dims = 2) {
  if (points.size() < dims + 1) throw Error(Errc::TooFewPoints, "need at least dims+1 points");
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw Error(Errc::ShapeMismatch, "points differ in dimension");
  if (dims > dim) throw Error(Errc::ShapeMismatch, "more components requested than dimensions");

  PcaModel model;
  model.mean.assign(dim, 0.0);
  for (const auto& p : points)
    for (std::size_t d = 0; d < dim; ++d) model.mean[d] += p[d];
  for (auto& m : model.mean) m /= static_cast<double>(points.size());

  Matrix cov(dim, dim);
  for (const auto& p : points) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double di = p[i] - model.mean[i];
      if (di == 0.0) continue;
      for (std::size_t j = 0; j < dim; ++j) cov(i, j) += di * (p[j] - model.mean[j]);
    }
  }
  cov *= 1.0 / static_cast<double>(points.size() - 1);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < i; ++j) cov(i, j) = cov(j, i) = 0.5 * (cov(i, j) + cov(j, i));

  model.components = Matrix(dims, dim);
  model.explained_variance_ratio.assign(dims, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < dim; ++i) total += cov(i, i);
  if (!(total > 1e-300)) {
    model.degenerate = true;
    return model;
  }

  const EigResult eig = sym_eig(cov);
  for (std::size_t k = 0; k < dims; ++k) {
    std::size_t arg = 0;
    for (std::size_t d = 1; d < dim; ++d)
      if (std::abs(eig.vectors(d, k)) > std::abs(eig.vectors(arg, k)) + 1e-12) arg = d;
    const double sign = eig.vectors(arg, k) < 0.0 ? -1.0 : 1.0;
    for (std::size_t d = 0; d < dim; ++d) model.components(k, d) = sign * eig.vectors(d, k);
    model.explained_variance_ratio[k] = std::max(eig.values[k], 0.0) / total;
  }
  return model;
}

struct PcaProjection {
  std::vector<std::vector<double>> points;
  std::vector<double> explained_variance_ratio;
  bool degenerate = false;
};

inline PcaProjection pca_project(const std::vector<std::vector<double>>& points, std::size_t dims = 2) {
  const PcaModel model = fit_pca(points, dims);
  PcaProjection out;
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(model.project(p));
  out.explained_variance_ratio = model.explained_variance_ratio;
  out.degenerate = model.degenerate;
  return out;
}

}  // namespace tegnas::numkit
