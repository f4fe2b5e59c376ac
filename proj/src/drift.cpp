#include "topoproto/drift.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace topoproto::drift {

FeatureMatrix to_feature_matrix(const FeatureSet& z) {
  FeatureMatrix m;
  m.rows.reserve(z.size());
  for (const auto& row : z.rows()) {
    m.rows.emplace_back(row.sample_id, row.vector.data());
  }
  return m;
}

namespace {

// Rows sorted by sample id so both matrices line up.
Eigen::MatrixXd matched_matrix(const FeatureMatrix& m,
                               const std::vector<SampleId>& order) {
  std::map<SampleId, const RawVector*> by_id;
  for (const auto& [sid, vec] : m.rows) by_id[sid] = &vec;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(order.size()),
                      static_cast<Eigen::Index>(m.dim()));
  for (std::size_t r = 0; r < order.size(); ++r) {
    const RawVector& v = *by_id.at(order[r]);
    for (std::size_t c = 0; c < v.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
  }
  return out;
}

// Center columns and scale to unit Frobenius norm.
void center_and_scale(Eigen::MatrixXd& m) {
  const Eigen::RowVectorXd mean = m.colwise().mean();
  m.rowwise() -= mean;
  const double f = m.norm();
  if (f <= kNormEps) {
    throw DegenerateMatrixError(
        "feature matrix has zero variance after centering");
  }
  m /= f;
}

}  // namespace

ProcrustesResult procrustes_distance(const FeatureMatrix& h1,
                                     const FeatureMatrix& h2) {
  if (h1.size() < 2 || h2.size() < 2) {
    throw DegenerateMatrixError("procrustes_distance needs at least 2 rows");
  }
  if (h1.dim() != h2.dim()) {
    throw DimensionMismatchError("feature matrices have dimensions " +
                                 std::to_string(h1.dim()) + " and " +
                                 std::to_string(h2.dim()));
  }

  std::vector<SampleId> ids1;
  ids1.reserve(h1.size());
  for (const auto& [sid, vec] : h1.rows) {
    (void)vec;
    ids1.push_back(sid);
  }
  std::sort(ids1.begin(), ids1.end());
  std::vector<SampleId> ids2;
  ids2.reserve(h2.size());
  for (const auto& [sid, vec] : h2.rows) {
    (void)vec;
    ids2.push_back(sid);
  }
  std::sort(ids2.begin(), ids2.end());
  if (std::adjacent_find(ids1.begin(), ids1.end()) != ids1.end() ||
      std::adjacent_find(ids2.begin(), ids2.end()) != ids2.end()) {
    throw SampleMismatchError("feature matrix repeats a sample id");
  }
  if (ids1 != ids2) {
    throw SampleMismatchError(
        "feature matrices cover different sample id sets");
  }

  const auto d = static_cast<Eigen::Index>(h1.dim());
  Eigen::MatrixXd x = matched_matrix(h1, ids1);
  Eigen::MatrixXd y = matched_matrix(h2, ids1);

  ProcrustesResult result;
  result.rotation.assign(h1.dim(), RawVector(h1.dim(), 0.0));

  if (x == y) {
    // Identical configurations are at distance exactly zero by definition.
    for (Eigen::Index i = 0; i < d; ++i) result.rotation[i][i] = 1.0;
    result.distance = 0.0;
    return result;
  }

  center_and_scale(x);
  center_and_scale(y);

  const Eigen::MatrixXd cross = y.transpose() * x;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();

  result.distance = (x - y * q).norm();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      result.rotation[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          q(i, j);
    }
  }
  return result;
}

double average_procrustes(const std::vector<int>& class_ids,
                          const std::map<int, FeatureMatrix>& reference,
                          const std::map<int, FeatureMatrix>& current) {
  if (class_ids.empty()) {
    throw EmptyInputError("average_procrustes: no classes given");
  }
  double total = 0.0;
  for (int cid : class_ids) {
    auto ref = reference.find(cid);
    auto cur = current.find(cid);
    if (ref == reference.end() || cur == current.end()) {
      throw MissingClassError("average_procrustes: class " +
                              std::to_string(cid) +
                              " is missing from one of the snapshots");
    }
    total += procrustes_distance(ref->second, cur->second).distance;
  }
  return total / static_cast<double>(class_ids.size());
}

namespace {

double euclidean(const RawVector& a, const RawVector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace

RadiusReport manifold_radii(const FeatureSet& z,
                            const classifier::ClassModel& model) {
  if (z.empty()) throw EmptyInputError("manifold_radii: empty feature set");
  if (z.dim() != model.mean_unit.dim()) {
    throw DimensionMismatchError("sample dimension differs from the model");
  }

  RadiusReport report;
  std::map<int, double> per_node;
  for (const auto& [id, node] : model.topology.nodes()) {
    (void)node;
    per_node[id] = 0.0;
  }

  for (const auto& row : z.rows()) {
    report.global_radius = std::max(
        report.global_radius, euclidean(row.vector.data(), model.mean_unit.data()));

    // Nearest node by cosine (ties to the lowest id); radius in Euclidean
    // distance, exactly as the bound is stated.
    int nearest = -1;
    double best = -2.0;
    for (const auto& [id, node] : model.topology.nodes()) {
      const double c = cosine_sim(row.vector, node.unit);
      if (c > best) {
        best = c;
        nearest = id;
      }
    }
    const double dist =
        euclidean(row.vector.data(), model.topology.node(nearest).unit.data());
    per_node[nearest] = std::max(per_node[nearest], dist);
  }

  for (const auto& [id, radius] : per_node) {
    report.per_node_radii.emplace_back(id, radius);
    report.local_radius = std::max(report.local_radius, radius);
  }
  return report;
}

}  // namespace topoproto::drift
