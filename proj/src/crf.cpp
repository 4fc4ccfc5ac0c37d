#include "longcoref/crf.hpp"

#include <cmath>
#include <limits>

#include "longcoref/errors.hpp"

namespace longcoref::crf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_shapes(const Mat& emissions, const Mat& transitions) {
  if (emissions.cols() != static_cast<Eigen::Index>(kNumTags) ||
      transitions.rows() != static_cast<Eigen::Index>(kStates) ||
      transitions.cols() != static_cast<Eigen::Index>(kStates)) {
    throw DimensionError("CRF expects n x " + std::to_string(kNumTags) + " emissions and " +
                         std::to_string(kStates) + "^2 transitions");
  }
}

// alpha(t, j): log total score of prefixes ending in j at t.
Mat forward_table(const Mat& e, const Mat& tr) {
  const Eigen::Index n = e.rows(), k = static_cast<Eigen::Index>(kNumTags);
  Mat alpha(n, k);
  for (Eigen::Index j = 0; j < k; ++j) alpha(0, j) = tr(kStart, j) + e(0, j);
  std::vector<double> buf(static_cast<std::size_t>(k));
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index i = 0; i < k; ++i) buf[static_cast<std::size_t>(i)] = alpha(t - 1, i) + tr(i, j);
      alpha(t, j) = log_sum_exp(buf.data(), buf.size()) + e(t, j);
    }
  }
  return alpha;
}

// beta(t, i): log total score of suffixes after being in i at t.
Mat backward_table(const Mat& e, const Mat& tr) {
  const Eigen::Index n = e.rows(), k = static_cast<Eigen::Index>(kNumTags);
  Mat beta(n, k);
  for (Eigen::Index i = 0; i < k; ++i) beta(n - 1, i) = tr(i, kStop);
  std::vector<double> buf(static_cast<std::size_t>(k));
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) buf[static_cast<std::size_t>(j)] = tr(i, j) + e(t + 1, j) + beta(t + 1, j);
      beta(t, i) = log_sum_exp(buf.data(), buf.size());
    }
  }
  return beta;
}

}  // namespace

bool allowed_transition(std::size_t from, std::size_t to) {
  const auto B = static_cast<std::size_t>(Tag::B), I = static_cast<std::size_t>(Tag::I),
             E = static_cast<std::size_t>(Tag::E);
  if (to == kStart || from == kStop) return false;
  const bool inside = from == B || from == I;
  if (inside) return to == I || to == E;
  // from START, E, S or O: a span must begin before I/E can appear
  return to != I && to != E;
}

Mat structural_mask() {
  Mat m(kStates, kStates);
  for (std::size_t i = 0; i < kStates; ++i)
    for (std::size_t j = 0; j < kStates; ++j) m(i, j) = allowed_transition(i, j) ? 0.0 : kNegInf;
  return m;
}

double log_sum_exp(const double* v, std::size_t n, std::size_t stride) {
  double mx = kNegInf;
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i * stride]);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i * stride] - mx);
  return mx + std::log(s);
}

double path_score(const Mat& e, const Mat& tr, const std::vector<std::size_t>& path) {
  check_shapes(e, tr);
  if (path.size() != static_cast<std::size_t>(e.rows())) throw DimensionError("path length differs from emissions");
  if (path.empty()) return tr(kStart, kStop);
  double s = tr(kStart, path[0]) + e(0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    s += tr(path[t - 1], path[t]) + e(static_cast<Eigen::Index>(t), path[t]);
  }
  return s + tr(path.back(), kStop);
}

Path viterbi(const Mat& e, const Mat& tr) {
  check_shapes(e, tr);
  const Eigen::Index n = e.rows(), k = static_cast<Eigen::Index>(kNumTags);
  Path out;
  if (n == 0) {
    out.score = tr(kStart, kStop);
    return out;
  }
  Mat delta(n, k);
  Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> back(n, k);
  for (Eigen::Index j = 0; j < k; ++j) delta(0, j) = tr(kStart, j) + e(0, j);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double s = delta(t - 1, i) + tr(i, j);
        if (s > best) {
          best = s;
          arg = static_cast<std::size_t>(i);
        }
      }
      delta(t, j) = best + e(t, j);
      back(t, j) = arg;
    }
  }
  double best = kNegInf;
  std::size_t last = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double s = delta(n - 1, j) + tr(j, kStop);
    if (s > best) {
      best = s;
      last = static_cast<std::size_t>(j);
    }
  }
  out.labels.resize(static_cast<std::size_t>(n));
  out.labels.back() = last;
  for (Eigen::Index t = n - 1; t > 0; --t) {
    out.labels[static_cast<std::size_t>(t - 1)] = back(t, out.labels[static_cast<std::size_t>(t)]);
  }
  out.score = best;
  return out;
}

Posterior forward_backward(const Mat& e, const Mat& tr) {
  check_shapes(e, tr);
  const Eigen::Index n = e.rows(), k = static_cast<Eigen::Index>(kNumTags);
  Posterior out;
  out.marginals = Mat::Zero(n, k);
  if (n == 0) {
    out.log_partition = tr(kStart, kStop);
    return out;
  }
  const Mat alpha = forward_table(e, tr);
  const Mat beta = backward_table(e, tr);
  std::vector<double> buf(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) buf[static_cast<std::size_t>(j)] = alpha(n - 1, j) + tr(j, kStop);
  out.log_partition = log_sum_exp(buf.data(), buf.size());
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index j = 0; j < k; ++j) out.marginals(t, j) = std::exp(alpha(t, j) + beta(t, j) - out.log_partition);
  return out;
}

Loss negative_log_likelihood(const Mat& e, const Mat& tr, const std::vector<std::size_t>& gold) {
  check_shapes(e, tr);
  const Eigen::Index n = e.rows(), k = static_cast<Eigen::Index>(kNumTags);
  if (gold.size() != static_cast<std::size_t>(n)) throw DimensionError("gold path length differs from emissions");
  Loss out;
  out.d_emissions = Mat::Zero(n, k);
  out.d_transitions = Mat::Zero(kStates, kStates);
  if (n == 0) return out;

  const Mat alpha = forward_table(e, tr);
  const Mat beta = backward_table(e, tr);
  std::vector<double> buf(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) buf[static_cast<std::size_t>(j)] = alpha(n - 1, j) + tr(j, kStop);
  const double log_z = log_sum_exp(buf.data(), buf.size());
  out.value = log_z - path_score(e, tr, gold);

  // expected counts minus observed counts
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index j = 0; j < k; ++j) out.d_emissions(t, j) = std::exp(alpha(t, j) + beta(t, j) - log_z);
  for (Eigen::Index j = 0; j < k; ++j) {
    out.d_transitions(kStart, j) += out.d_emissions(0, j);
    out.d_transitions(j, kStop) += out.d_emissions(n - 1, j);
  }
  for (Eigen::Index t = 1; t < n; ++t)
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        out.d_transitions(i, j) += std::exp(alpha(t - 1, i) + tr(i, j) + e(t, j) + beta(t, j) - log_z);

  out.d_transitions(kStart, gold[0]) -= 1.0;
  out.d_transitions(gold.back(), kStop) -= 1.0;
  for (Eigen::Index t = 0; t < n; ++t) out.d_emissions(t, gold[static_cast<std::size_t>(t)]) -= 1.0;
  for (std::size_t t = 1; t < gold.size(); ++t) out.d_transitions(gold[t - 1], gold[t]) -= 1.0;
  return out;
}

}  // namespace longcoref::crf
