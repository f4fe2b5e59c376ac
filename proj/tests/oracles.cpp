#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace oracles {

UnitVector basis_vec(std::size_t d, std::size_t i) {
  RawVector v(d, 0.0);
  v[i] = 1.0;
  return UnitVector::trusted(std::move(v));
}

UnitVector random_unit(Rng& rng, std::size_t d) {
  for (;;) {
    RawVector g(d);
    for (auto& x : g) x = rng.normal();
    if (topoproto::norm(g) > 1e-9) return topoproto::normalize(g);
  }
}

std::vector<RawVector> random_orthogonal(Rng& rng, std::size_t d) {
  std::vector<RawVector> rows;
  while (rows.size() < d) {
    RawVector g(d);
    for (auto& x : g) x = rng.normal();
    for (const auto& row : rows) {
      const double proj = topoproto::dot(g, row);
      for (std::size_t i = 0; i < d; ++i) g[i] -= proj * row[i];
    }
    const double n = topoproto::norm(g);
    if (n <= 1e-8) continue;
    for (auto& x : g) x /= n;
    rows.push_back(std::move(g));
  }
  return rows;
}

RawVector apply_matrix(const std::vector<RawVector>& m, const RawVector& x) {
  RawVector out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = topoproto::dot(m[i], x);
  return out;
}

namespace {

struct Cluster {
  int id;
  std::vector<std::size_t> members;  // row indices
};

double mean_pairwise_distance(const FeatureSet& z, const Cluster& a,
                              const Cluster& b) {
  double total = 0.0;
  for (std::size_t i : a.members) {
    for (std::size_t j : b.members) {
      total += 1.0 - topoproto::cosine_sim(z[i].vector, z[j].vector);
    }
  }
  return total / (static_cast<double>(a.members.size()) *
                  static_cast<double>(b.members.size()));
}

std::vector<Cluster> run_merges(const FeatureSet& z, int merges,
                                topoproto::cluster::Dendrogram* record) {
  const int n = static_cast<int>(z.size());
  std::vector<Cluster> clusters;
  for (int i = 0; i < n; ++i) {
    clusters.push_back(Cluster{i, {static_cast<std::size_t>(i)}});
  }

  for (int step = 0; step < merges; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    std::size_t best_j = 0;
    for (std::size_t i = 0; i + 1 < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const auto [lo, hi] =
            std::minmax(clusters[i].id, clusters[j].id);
        const double d = mean_pairwise_distance(z, clusters[i], clusters[j]);
        // Strictly smaller distance wins; on ties prefer the smaller
        // (lo, hi) id pair.
        bool better = d < best;
        if (!better && d == best) {
          const auto [blo, bhi] =
              std::minmax(clusters[best_i].id, clusters[best_j].id);
          better = std::pair(lo, hi) < std::pair(blo, bhi);
        }
        if (better) {
          best = d;
          best_i = i;
          best_j = j;
        }
      }
    }

    Cluster merged;
    merged.id = n + step;
    merged.members = clusters[best_i].members;
    merged.members.insert(merged.members.end(),
                          clusters[best_j].members.begin(),
                          clusters[best_j].members.end());
    if (record != nullptr) {
      const auto [lo, hi] = std::minmax(clusters[best_i].id, clusters[best_j].id);
      record->steps.push_back(
          topoproto::cluster::MergeStep{lo, hi, best, merged.id});
    }
    // Erase the higher index first.
    const auto hi_idx = std::max(best_i, best_j);
    const auto lo_idx = std::min(best_i, best_j);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(hi_idx));
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(lo_idx));
    clusters.push_back(std::move(merged));
  }
  return clusters;
}

}  // namespace

topoproto::cluster::Dendrogram brute_force_upgma(const FeatureSet& z) {
  topoproto::cluster::Dendrogram out;
  for (const auto& row : z.rows()) out.leaf_sample_ids.push_back(row.sample_id);
  if (z.size() > 1) {
    run_merges(z, static_cast<int>(z.size()) - 1, &out);
  }
  return out;
}

Partition brute_force_cut(const FeatureSet& z, int k) {
  const int n = static_cast<int>(z.size());
  const int merges = std::max(0, n - k);
  const std::vector<Cluster> clusters = run_merges(z, merges, nullptr);

  Partition partition;
  for (const auto& c : clusters) {
    std::vector<SampleId> ids;
    for (std::size_t row : c.members) ids.push_back(z[row].sample_id);
    std::sort(ids.begin(), ids.end());
    partition.push_back(std::move(ids));
  }
  std::sort(partition.begin(), partition.end());
  return partition;
}

Partition partition_of(const topoproto::cluster::ClusterAssignment& assignment) {
  std::map<int, std::vector<SampleId>> groups;
  for (const auto& [sid, label] : assignment.labels) groups[label].push_back(sid);
  Partition partition;
  for (auto& [label, ids] : groups) {
    (void)label;
    std::sort(ids.begin(), ids.end());
    partition.push_back(std::move(ids));
  }
  std::sort(partition.begin(), partition.end());
  return partition;
}

std::vector<double> jacobi_eigenvalues(std::vector<RawVector> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-28) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double phi = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(phi);
        const double s = std::sin(phi);

        const double app = a[p][p];
        const double aqq = a[q][q];
        const double apq = a[p][q];
        a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
        a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
        a[p][q] = 0.0;
        a[q][p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[p][k] = a[k][p];
          a[k][q] = s * akp + c * akq;
          a[q][k] = a[k][q];
        }
      }
    }
  }
  std::vector<double> eigenvalues(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a[i][i];
  return eigenvalues;
}

double oracle_procrustes_distance(const topoproto::drift::FeatureMatrix& h1,
                                  const topoproto::drift::FeatureMatrix& h2) {
  std::map<SampleId, const RawVector*> rows1;
  for (const auto& [sid, v] : h1.rows) rows1[sid] = &v;
  std::map<SampleId, const RawVector*> rows2;
  for (const auto& [sid, v] : h2.rows) rows2[sid] = &v;

  const std::size_t n = rows1.size();
  const std::size_t d = h1.dim();
  std::vector<RawVector> x;
  std::vector<RawVector> y;
  x.reserve(n);
  y.reserve(n);
  for (const auto& [sid, v] : rows1) {
    x.push_back(*v);
    y.push_back(*rows2.at(sid));
  }

  auto center_and_scale = [n, d](std::vector<RawVector>& m) {
    RawVector mean(d, 0.0);
    for (const auto& row : m) {
      for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (auto& v : mean) v /= static_cast<double>(n);
    double frob = 0.0;
    for (auto& row : m) {
      for (std::size_t j = 0; j < d; ++j) {
        row[j] -= mean[j];
        frob += row[j] * row[j];
      }
    }
    frob = std::sqrt(frob);
    for (auto& row : m) {
      for (auto& v : row) v /= frob;
    }
  };
  center_and_scale(x);
  center_and_scale(y);

  // Cross-covariance M = y^T x, then distance from the nuclear norm:
  // ||x - y Q||_F at the optimum is sqrt(2 - 2 sum_i sigma_i(M)).
  std::vector<RawVector> m(d, RawVector(d, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) m[i][j] += y[r][i] * x[r][j];
    }
  }
  std::vector<RawVector> mtm(d, RawVector(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < d; ++k) mtm[i][j] += m[k][i] * m[k][j];
    }
  }

  double nuclear = 0.0;
  for (double lambda : jacobi_eigenvalues(std::move(mtm))) {
    nuclear += std::sqrt(std::max(0.0, lambda));
  }
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * nuclear));
}

}  // namespace oracles
