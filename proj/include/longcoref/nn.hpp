#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace longcoref::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Trainable tensor with its gradient and Adam moments.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat m;
  Mat v;

  Param() = default;
  Param(std::string name, Eigen::Index rows, Eigen::Index cols);
  void zero_grad() { grad.setZero(); }
};

using ParamList = std::vector<Param*>;

/// Glorot-uniform fill using fan_in = cols, fan_out = rows.
void glorot_init(Param& p, Rng& rng);

/// Scratch storage for a forward pass that backward() later reads.
struct Tape {
  std::vector<Mat> mats;
};

/// Affine map over rows: Y = X W^T + b, W is out x in.
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, std::size_t in, std::size_t out, Rng& rng);
  Mat forward(const Mat& x) const;
  /// Accumulates parameter gradients and returns dL/dX.
  Mat backward(const Mat& x, const Mat& dy);
  std::size_t in_dim() const { return static_cast<std::size_t>(w_.value.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(w_.value.rows()); }
  void collect(ParamList& out) { out.push_back(&w_); out.push_back(&b_); }
  Param& weight() { return w_; }
  Param& bias() { return b_; }

 private:
  Param w_;
  Param b_;
};

/// Gated projection: y = g * relu(Wh x) + (1 - g) * (Wc x), g = sigmoid(Wg x).
class Highway {
 public:
  Highway() = default;
  Highway(std::string name, std::size_t in, std::size_t out, Rng& rng);
  Mat forward(const Mat& x, Tape* tape) const;
  Mat backward(const Mat& x, const Tape& tape, const Mat& dy);
  std::size_t out_dim() const { return h_.out_dim(); }
  void collect(ParamList& out);

 private:
  Linear h_, g_, c_;
};

/// Dropout mask shared by every row (time step) of a sequence.
Mat locked_dropout_mask(std::size_t cols, double rate, Rng& rng);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Adam with decoupled weight decay.
struct AdamW {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  long step_count = 0;

  void step(const ParamList& params);
};

/// Halves (by `factor`) the learning rate after `patience` epochs without
/// improvement of a maximized metric.
class PlateauScheduler {
 public:
  PlateauScheduler(double factor = 0.5, int patience = 2, double threshold = 1e-4)
      : factor_(factor), patience_(patience), threshold_(threshold) {}
  /// Returns true when the rate was reduced.
  bool observe(double metric, double& lr);
  double best() const { return best_; }

 private:
  double factor_;
  int patience_;
  double threshold_;
  double best_ = -std::numeric_limits<double>::infinity();
  int bad_ = 0;
};

/// Copies of every parameter value, for best-checkpoint tracking.
std::vector<Mat> snapshot(const ParamList& params);
void restore(const ParamList& params, const std::vector<Mat>& values);
void zero_grads(const ParamList& params);
bool all_finite(const ParamList& params);

/// Shapes then f32 little-endian values, one block per parameter.
void write_params(std::ostream& out, const ParamList& params);
/// Reads into already-shaped parameters; throws ParseError on shape mismatch.
void read_params(std::istream& in, const ParamList& params, const std::string& where);

}  // namespace longcoref::nn
