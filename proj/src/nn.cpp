#include "longcoref/nn.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "longcoref/errors.hpp"
#include "longcoref/io.hpp"

namespace longcoref::nn {

Param::Param(std::string n, Eigen::Index rows, Eigen::Index cols)
    : name(std::move(n)),
      value(Mat::Zero(rows, cols)),
      grad(Mat::Zero(rows, cols)),
      m(Mat::Zero(rows, cols)),
      v(Mat::Zero(rows, cols)) {}

void glorot_init(Param& p, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = u(rng);
}

Linear::Linear(std::string name, std::size_t in, std::size_t out, Rng& rng)
    : w_(name + ".w", static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
      b_(name + ".b", 1, static_cast<Eigen::Index>(out)) {
  glorot_init(w_, rng);
}

Mat Linear::forward(const Mat& x) const {
  Mat y = x * w_.value.transpose();
  y.rowwise() += b_.value.row(0);
  return y;
}

Mat Linear::backward(const Mat& x, const Mat& dy) {
  w_.grad.noalias() += dy.transpose() * x;
  b_.grad.row(0) += dy.colwise().sum();
  return dy * w_.value;
}

Highway::Highway(std::string name, std::size_t in, std::size_t out, Rng& rng)
    : h_(name + ".h", in, out, rng), g_(name + ".g", in, out, rng), c_(name + ".c", in, out, rng) {}

void Highway::collect(ParamList& out) {
  h_.collect(out);
  g_.collect(out);
  c_.collect(out);
}

// tape: [relu(h), gate, carry]
Mat Highway::forward(const Mat& x, Tape* tape) const {
  Mat h = h_.forward(x).cwiseMax(0.0);
  Mat g = g_.forward(x).unaryExpr([](double z) { return sigmoid(z); });
  Mat c = c_.forward(x);
  Mat y = g.cwiseProduct(h) + (Mat::Ones(g.rows(), g.cols()) - g).cwiseProduct(c);
  if (tape) tape->mats = {std::move(h), std::move(g), std::move(c)};
  return y;
}

Mat Highway::backward(const Mat& x, const Tape& tape, const Mat& dy) {
  const Mat& h = tape.mats[0];
  const Mat& g = tape.mats[1];
  const Mat& c = tape.mats[2];
  Mat dh = dy.cwiseProduct(g).cwiseProduct(h.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
  Mat dg = dy.cwiseProduct(h - c).cwiseProduct(g.cwiseProduct(Mat::Ones(g.rows(), g.cols()) - g));
  Mat dc = dy.cwiseProduct(Mat::Ones(g.rows(), g.cols()) - g);
  Mat dx = h_.backward(x, dh);
  dx += g_.backward(x, dg);
  dx += c_.backward(x, dc);
  return dx;
}

Mat locked_dropout_mask(std::size_t cols, double rate, Rng& rng) {
  Mat mask = Mat::Ones(1, static_cast<Eigen::Index>(cols));
  if (rate <= 0.0) return mask;
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(0, j) = keep(rng) ? scale : 0.0;
  return mask;
}

void AdamW::step(const ParamList& params) {
  ++step_count;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (Param* p : params) {
    p->value *= 1.0 - lr * weight_decay;
    p->m = beta1 * p->m + (1.0 - beta1) * p->grad;
    p->v = beta2 * p->v + (1.0 - beta2) * p->grad.cwiseProduct(p->grad);
    p->value.array() -= lr * (p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + eps);
  }
}

bool PlateauScheduler::observe(double metric, double& lr) {
  if (metric > best_ + threshold_ * std::abs(best_) || !std::isfinite(best_)) {
    best_ = metric;
    bad_ = 0;
    return false;
  }
  if (++bad_ > patience_) {
    lr *= factor_;
    bad_ = 0;
    return true;
  }
  return false;
}

std::vector<Mat> snapshot(const ParamList& params) {
  std::vector<Mat> out;
  out.reserve(params.size());
  for (const Param* p : params) out.push_back(p->value);
  return out;
}

void restore(const ParamList& params, const std::vector<Mat>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values.at(i);
}

void zero_grads(const ParamList& params) {
  for (Param* p : params) p->zero_grad();
}

bool all_finite(const ParamList& params) {
  for (const Param* p : params)
    if (!p->value.allFinite()) return false;
  return true;
}

void write_params(std::ostream& out, const ParamList& params) {
  binio::write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    binio::write_string(out, p->name);
    binio::write_u64(out, static_cast<std::uint64_t>(p->value.rows()));
    binio::write_u64(out, static_cast<std::uint64_t>(p->value.cols()));
    for (Eigen::Index c = 0; c < p->value.cols(); ++c)
      for (Eigen::Index r = 0; r < p->value.rows(); ++r) binio::write_f32(out, static_cast<float>(p->value(r, c)));
  }
}

void read_params(std::istream& in, const ParamList& params, const std::string& where) {
  const auto count = binio::read_u32(in);
  if (count != params.size()) {
    throw ParseError(where, "expected " + std::to_string(params.size()) + " parameter blocks, found " +
                                std::to_string(count));
  }
  for (Param* p : params) {
    const auto name = binio::read_string(in);
    const auto rows = binio::read_u64(in);
    const auto cols = binio::read_u64(in);
    if (name != p->name || rows != static_cast<std::uint64_t>(p->value.rows()) ||
        cols != static_cast<std::uint64_t>(p->value.cols())) {
      throw ParseError(where, "parameter '" + name + "' " + std::to_string(rows) + "x" + std::to_string(cols) +
                                  " does not match '" + p->name + "' " + std::to_string(p->value.rows()) + "x" +
                                  std::to_string(p->value.cols()));
    }
    for (Eigen::Index c = 0; c < p->value.cols(); ++c)
      for (Eigen::Index r = 0; r < p->value.rows(); ++r) p->value(r, c) = binio::read_f32(in);
    if (!p->value.allFinite()) throw ParseError(where, "non-finite values in '" + name + "'");
  }
}

}  // namespace longcoref::nn
