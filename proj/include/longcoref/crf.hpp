#pragma once

#include <vector>

#include "longcoref/bioes.hpp"
#include "longcoref/nn.hpp"

namespace longcoref::crf {

using nn::Mat;

/// Transition matrices are (kNumTags + 2)^2, indexed [from][to], with two
/// extra states for the sequence boundaries.
inline constexpr std::size_t kStart = kNumTags;
inline constexpr std::size_t kStop = kNumTags + 1;
inline constexpr std::size_t kStates = kNumTags + 2;

bool allowed_transition(std::size_t from, std::size_t to);
/// 0 where a BIOES move is allowed, -inf elsewhere; added to learned scores
/// before decoding.
Mat structural_mask();

/// log(sum(exp(v))) that returns -inf when every entry is -inf.
double log_sum_exp(const double* v, std::size_t n, std::size_t stride = 1);

/// Unnormalized log score of `path` for emissions (n x kNumTags).
double path_score(const Mat& emissions, const Mat& transitions, const std::vector<std::size_t>& path);

struct Path {
  std::vector<std::size_t> labels;
  double score = 0.0;
};

Path viterbi(const Mat& emissions, const Mat& transitions);

struct Posterior {
  double log_partition = 0.0;
  /// n x kNumTags, rows sum to 1.
  Mat marginals;
};

Posterior forward_backward(const Mat& emissions, const Mat& transitions);

struct Loss {
  double value = 0.0;
  Mat d_emissions;
  Mat d_transitions;
};

/// Negative log-likelihood of `gold` and its gradient.
Loss negative_log_likelihood(const Mat& emissions, const Mat& transitions, const std::vector<std::size_t>& gold);

}  // namespace longcoref::crf
