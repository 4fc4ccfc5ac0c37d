#include "longcoref/encoder.hpp"

#include <cmath>

#include "longcoref/errors.hpp"

namespace longcoref::nn {

std::string to_string(EncoderKind k) { return k == EncoderKind::bilstm ? "bilstm" : "window"; }

EncoderKind parse_encoder_kind(const std::string& s) {
  if (s == "window" || s == "window_mixer") return EncoderKind::window_mixer;
  if (s == "bilstm" || s == "lstm") return EncoderKind::bilstm;
  throw ValidationError("unknown encoder '" + s + "' (expected window or bilstm)");
}

WindowMixer::WindowMixer(std::size_t in, std::size_t out, std::size_t half_width, Rng& rng)
    : in_(in), out_(out), half_(half_width), mix_("mixer", in * (2 * half_width + 1), out, rng) {}

Mat WindowMixer::unfold(const Mat& x) const {
  const Eigen::Index n = x.rows(), in = static_cast<Eigen::Index>(in_);
  const auto taps = static_cast<Eigen::Index>(2 * half_ + 1);
  Mat u = Mat::Zero(n, in * taps);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index k = 0; k < taps; ++k) {
      const Eigen::Index s = t + k - static_cast<Eigen::Index>(half_);
      if (s >= 0 && s < n) u.block(t, k * in, 1, in) = x.row(s);
    }
  }
  return u;
}

// tape: [unfolded, output]
Mat WindowMixer::forward(const Mat& x, Tape* tape) const {
  if (x.cols() != static_cast<Eigen::Index>(in_)) throw DimensionError("encoder input width mismatch");
  Mat u = unfold(x);
  Mat y = mix_.forward(u).array().tanh().matrix();
  if (tape) tape->mats = {std::move(u), y};
  return y;
}

Mat WindowMixer::backward(const Mat& x, const Tape& tape, const Mat& dy) {
  const Mat& u = tape.mats[0];
  const Mat& y = tape.mats[1];
  Mat dz = dy.cwiseProduct((1.0 - y.array().square()).matrix());
  Mat du = mix_.backward(u, dz);
  const Eigen::Index n = x.rows(), in = static_cast<Eigen::Index>(in_);
  const auto taps = static_cast<Eigen::Index>(2 * half_ + 1);
  Mat dx = Mat::Zero(n, in);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index k = 0; k < taps; ++k) {
      const Eigen::Index s = t + k - static_cast<Eigen::Index>(half_);
      if (s >= 0 && s < n) dx.row(s) += du.block(t, k * in, 1, in);
    }
  }
  return dx;
}

BiLstm::BiLstm(std::size_t in, std::size_t hidden, Rng& rng) : in_(in), hidden_(hidden) {
  const auto h = static_cast<Eigen::Index>(hidden), i = static_cast<Eigen::Index>(in);
  for (auto* d : {&fwd_, &bwd_}) {
    const std::string tag = d == &fwd_ ? "lstm.fwd" : "lstm.bwd";
    d->w = Param(tag + ".w", 4 * h, i);
    d->u = Param(tag + ".u", 4 * h, h);
    d->b = Param(tag + ".b", 1, 4 * h);
    glorot_init(d->w, rng);
    glorot_init(d->u, rng);
    d->b.value.block(0, h, 1, h).setOnes();  // forget gate starts open
  }
}

void BiLstm::collect(ParamList& out) {
  for (auto* d : {&fwd_, &bwd_}) {
    out.push_back(&d->w);
    out.push_back(&d->u);
    out.push_back(&d->b);
  }
}

Mat BiLstm::run(const Direction& d, const Mat& x, bool reverse, Tape* tape) const {
  const Eigen::Index n = x.rows(), h = static_cast<Eigen::Index>(hidden_);
  Mat zx = x * d.w.value.transpose();
  zx.rowwise() += d.b.value.row(0);
  Mat gi(n, h), gf(n, h), gg(n, h), go(n, h), c(n, h), hs(n, h);
  Eigen::RowVectorXd hp = Eigen::RowVectorXd::Zero(h), cp = Eigen::RowVectorXd::Zero(h);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    Eigen::RowVectorXd z = zx.row(t) + hp * d.u.value.transpose();
    for (Eigen::Index j = 0; j < h; ++j) {
      gi(t, j) = sigmoid(z(j));
      gf(t, j) = sigmoid(z(h + j));
      gg(t, j) = std::tanh(z(2 * h + j));
      go(t, j) = sigmoid(z(3 * h + j));
      c(t, j) = gf(t, j) * cp(j) + gi(t, j) * gg(t, j);
      hs(t, j) = go(t, j) * std::tanh(c(t, j));
    }
    hp = hs.row(t);
    cp = c.row(t);
  }
  if (tape) {
    for (Mat* m : {&gi, &gf, &gg, &go, &c}) tape->mats.push_back(*m);
    tape->mats.push_back(hs);
  }
  return hs;
}

Mat BiLstm::back(Direction& d, const Mat& x, bool reverse, const Mat* saved, const Mat& dh_out) {
  const Mat &gi = saved[0], &gf = saved[1], &gg = saved[2], &go = saved[3], &c = saved[4], &hs = saved[5];
  const Eigen::Index n = x.rows(), h = static_cast<Eigen::Index>(hidden_);
  Mat dz(n, 4 * h);
  Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(h), dc_next = Eigen::RowVectorXd::Zero(h);
  for (Eigen::Index s = n - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    const Eigen::Index prev = reverse ? t + 1 : t - 1;
    const bool has_prev = s > 0;
    Eigen::RowVectorXd dh = dh_out.row(t) + dh_next;
    for (Eigen::Index j = 0; j < h; ++j) {
      const double tc = std::tanh(c(t, j));
      const double dc = dh(j) * go(t, j) * (1.0 - tc * tc) + dc_next(j);
      const double cprev = has_prev ? c(prev, j) : 0.0;
      dz(t, j) = dc * gg(t, j) * gi(t, j) * (1.0 - gi(t, j));
      dz(t, h + j) = dc * cprev * gf(t, j) * (1.0 - gf(t, j));
      dz(t, 2 * h + j) = dc * gi(t, j) * (1.0 - gg(t, j) * gg(t, j));
      dz(t, 3 * h + j) = dh(j) * tc * go(t, j) * (1.0 - go(t, j));
      dc_next(j) = dc * gf(t, j);
    }
    dh_next = dz.row(t) * d.u.value;
    if (has_prev) d.u.grad.noalias() += dz.row(t).transpose() * hs.row(prev);
  }
  d.w.grad.noalias() += dz.transpose() * x;
  d.b.grad.row(0) += dz.colwise().sum();
  return dz * d.w.value;
}

// tape: forward direction [i f g o c h], then backward direction [i f g o c h]
Mat BiLstm::forward(const Mat& x, Tape* tape) const {
  if (x.cols() != static_cast<Eigen::Index>(in_)) throw DimensionError("encoder input width mismatch");
  if (tape) tape->mats.clear();
  Mat y(x.rows(), static_cast<Eigen::Index>(2 * hidden_));
  y.leftCols(static_cast<Eigen::Index>(hidden_)) = run(fwd_, x, false, tape);
  y.rightCols(static_cast<Eigen::Index>(hidden_)) = run(bwd_, x, true, tape);
  return y;
}

Mat BiLstm::backward(const Mat& x, const Tape& tape, const Mat& dy) {
  const auto h = static_cast<Eigen::Index>(hidden_);
  Mat dx = back(fwd_, x, false, tape.mats.data(), dy.leftCols(h));
  dx += back(bwd_, x, true, tape.mats.data() + 6, dy.rightCols(h));
  return dx;
}

std::unique_ptr<SequenceEncoder> make_encoder(EncoderKind kind, std::size_t in, std::size_t hidden,
                                              std::size_t half_width, Rng& rng) {
  if (kind == EncoderKind::bilstm) return std::make_unique<BiLstm>(in, hidden, rng);
  return std::make_unique<WindowMixer>(in, 2 * hidden, half_width, rng);
}

}  // namespace longcoref::nn
