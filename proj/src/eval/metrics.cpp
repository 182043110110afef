#include "t2mx/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "t2mx/core/error.hpp"
#include "t2mx/core/random.hpp"

namespace t2mx::eval {

namespace {

Eigen::MatrixXd covariance(const Features& x, const Eigen::RowVectorXd& mean) {
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

// Symmetric square root with negative eigenvalues clipped to zero.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m, double& clipped) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < 0.0) {
      clipped += -ev[i];
      ev[i] = 0.0;
    }
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double row_distance(const Features& a, Eigen::Index i, const Features& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).norm();
}

}  // namespace

FidResult fid(const Features& a, const Features& b) {
  require(a.cols() == b.cols(), ErrorCode::kShape, "fid: feature widths differ");
  require(a.rows() >= 2 && b.rows() >= 2, ErrorCode::kNoData, "fid needs at least 2 rows per set");
  const Eigen::RowVectorXd mu_a = a.colwise().mean();
  const Eigen::RowVectorXd mu_b = b.colwise().mean();
  const Eigen::MatrixXd sa = covariance(a, mu_a);
  const Eigen::MatrixXd sb = covariance(b, mu_b);
  FidResult out;
  const Eigen::MatrixXd ra = sqrt_psd(sa, out.clipped);
  const Eigen::MatrixXd cross = sqrt_psd(ra * sb * ra, out.clipped);
  out.value = std::max(0.0, (mu_a - mu_b).squaredNorm() + sa.trace() + sb.trace() - 2.0 * cross.trace());
  return out;
}

PairedMean diversity(const Features& feats, int n_pairs, std::uint64_t seed) {
  require(feats.rows() >= 2, ErrorCode::kNoData, "diversity needs at least 2 rows");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(feats.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  core::Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  PairedMean out;
  out.pairs = std::min<int>(n_pairs, static_cast<int>(feats.rows() / 2));
  double sum = 0.0;
  for (int i = 0; i < out.pairs; ++i) {
    sum += row_distance(feats, order[static_cast<std::size_t>(2 * i)], feats, order[static_cast<std::size_t>(2 * i + 1)]);
  }
  out.value = sum / out.pairs;
  return out;
}

PairedMean multimodality(const std::vector<Features>& groups, int n_pairs, std::uint64_t seed) {
  core::Rng rng(seed);
  PairedMean out;
  double total = 0.0;
  int used = 0;
  for (const Features& g : groups) {
    const Eigen::Index n = g.rows();
    if (n < 2) continue;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    if (static_cast<int>(pairs.size()) > n_pairs) {
      rng.shuffle(pairs.begin(), pairs.end());
      pairs.resize(static_cast<std::size_t>(n_pairs));
    }
    double sum = 0.0;
    for (const auto& [i, j] : pairs) sum += row_distance(g, i, g, j);
    total += sum / static_cast<double>(pairs.size());
    out.pairs += static_cast<int>(pairs.size());
    ++used;
  }
  require(used > 0, ErrorCode::kNoData, "multimodality needs a text with at least 2 generations");
  out.value = total / used;
  return out;
}

double mm_dist(const Features& text, const Features& motion) {
  require(text.rows() == motion.rows() && text.cols() == motion.cols() && text.rows() > 0, ErrorCode::kShape,
          "mm_dist: text and motion features must be aligned");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < text.rows(); ++i) sum += row_distance(text, i, motion, i);
  return sum / static_cast<double>(text.rows());
}

RPrecision r_precision(const Features& text, const Features& motion, int pool, std::uint64_t seed) {
  require(text.rows() == motion.rows() && text.cols() == motion.cols() && text.rows() > 0, ErrorCode::kShape,
          "r_precision: text and motion features must be aligned");
  require(pool >= 1, ErrorCode::kConfig, "r_precision pool must be >= 1");
  const Eigen::Index n = text.rows();
  RPrecision out;
  out.pool = static_cast<int>(std::min<Eigen::Index>(pool, n));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  core::Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  const Eigen::Index pools = n / out.pool;
  std::array<double, 3> hits{};
  for (Eigen::Index p = 0; p < pools; ++p) {
    const auto base = static_cast<std::size_t>(p * out.pool);
    for (int i = 0; i < out.pool; ++i) {
      const Eigen::Index m = order[base + static_cast<std::size_t>(i)];
      const double own = row_distance(motion, m, text, m);
      int closer = 0;
      for (int j = 0; j < out.pool; ++j) {
        if (j == i) continue;
        if (row_distance(motion, m, text, order[base + static_cast<std::size_t>(j)]) < own) ++closer;
      }
      for (int k = 0; k < 3; ++k) hits[static_cast<std::size_t>(k)] += closer < k + 1;
    }
  }
  const double total = static_cast<double>(pools * out.pool);
  for (int k = 0; k < 3; ++k) out.top[static_cast<std::size_t>(k)] = hits[static_cast<std::size_t>(k)] / total;
  return out;
}

MetricValue summarize(const std::vector<double>& values) {
  MetricValue out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.interval = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

}  // namespace t2mx::eval
