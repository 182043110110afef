#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace t2mx::eval {

using Features = Eigen::MatrixXd;  // one feature row per sample

struct FidResult {
  double value = 0.0;
  double clipped = 0.0;  // total magnitude of negative eigenvalues set to zero
};

/// ‖μa − μb‖² + Tr(Σa + Σb − 2 (Σa^½ Σb Σa^½)^½) with unbiased covariances,
/// floored at 0 against round-off.
/// Throws kShape on a width mismatch and kNoData for fewer than 2 rows.
FidResult fid(const Features& a, const Features& b);

struct PairedMean {
  double value = 0.0;
  int pairs = 0;  // pairs actually used
};

/// Mean distance over disjoint random row pairs; the pair count shrinks to
/// rows / 2 when there are too few rows. Throws kNoData for fewer than 2 rows.
PairedMean diversity(const Features& feats, int n_pairs, std::uint64_t seed);

/// Per group, the mean distance over n_pairs distinct within-group pairs (all
/// pairs when there are no more than n_pairs), averaged over groups with at
/// least 2 rows. Throws kNoData when no group qualifies.
PairedMean multimodality(const std::vector<Features>& groups, int n_pairs, std::uint64_t seed);

/// Mean distance between aligned rows. Throws kShape on misalignment.
double mm_dist(const Features& text, const Features& motion);

struct RPrecision {
  std::array<double, 3> top{};  // top-1, top-2, top-3
  int pool = 0;                 // pool size actually used
};

/// The rows are shuffled and cut into pools of `pool` aligned pairs (the
/// remainder is dropped); within a pool each motion ranks every text by
/// distance and scores a hit at k when fewer than k other texts are strictly
/// closer than its own. Pools shrink to the row count when there are fewer rows.
RPrecision r_precision(const Features& text, const Features& motion, int pool, std::uint64_t seed);

struct MetricValue {
  double mean = 0.0;
  double interval = 0.0;  // half-width of the 95% interval over repetitions
};

MetricValue summarize(const std::vector<double>& values);

}  // namespace t2mx::eval
