#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "longcoref/hungarian.hpp"
#include "longcoref/metrics.hpp"
#include "oracles.hpp"

using namespace longcoref;

namespace {

const MentionKey a = span_key(0, 0), b = span_key(1, 1), c = span_key(2, 2), d = span_key(3, 3);

Partition relabel(Partition p, std::mt19937_64& rng) {
  for (auto& cell : p) std::shuffle(cell.begin(), cell.end(), rng);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("worked example: gold {abc}{d}, pred {ab}{cd}") {
  const Partition gold{{a, b, c}, {d}}, pred{{a, b}, {c, d}};
  const auto r = evaluate(gold, pred);
  CHECK(r.muc.recall == doctest::Approx(0.5));
  CHECK(r.muc.precision == doctest::Approx(0.5));
  CHECK(r.muc.f1 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.b_cubed.recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.b_cubed.precision == doctest::Approx(0.75));
  CHECK(r.b_cubed.f1 == doctest::Approx(0.70588).epsilon(1e-5));
  CHECK(r.ceaf_e.precision == doctest::Approx(0.73333).epsilon(1e-5));
  CHECK(r.ceaf_e.recall == doctest::Approx(0.73333).epsilon(1e-5));
  CHECK(r.conll_f1 == doctest::Approx(0.64640).epsilon(1e-5));
  CHECK(conll_f1(0.5, 0.70588, 0.73333) == doctest::Approx(0.64640).epsilon(1e-5));
}

TEST_CASE("identical partitions score 1 everywhere") {
  const Partition p{{a, b}, {c}, {d}};
  const auto r = evaluate(p, p);
  CHECK(r.muc.f1 == doctest::Approx(1.0));
  CHECK(r.b_cubed.f1 == doctest::Approx(1.0));
  CHECK(r.ceaf_e.f1 == doctest::Approx(1.0));
  CHECK(r.conll_f1 == doctest::Approx(1.0));
}

TEST_CASE("MUC has no links to score on all-singleton partitions") {
  const Partition s{{a}, {b}, {c}};
  const auto r = muc(s, s);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
}

TEST_CASE("B3 of all singletons against one four-mention chain") {
  const Partition gold{{a, b, c, d}}, pred{{a}, {b}, {c}, {d}};
  const auto r = b_cubed(gold, pred);
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(0.25));
}

TEST_CASE("twinless mentions are scored as singletons on the other side") {
  const Partition gold{{a, b}}, pred{{a, c}};
  const auto r = evaluate(gold, pred);
  CHECK(r.twinless_gold == 1);
  CHECK(r.twinless_pred == 1);
  CHECK(r.muc.f1 == 0.0);
  CHECK(r.b_cubed.precision == doctest::Approx(0.5 * 2 / 3.0 + 1 / 3.0 * 1.0));
}

TEST_CASE("empty partitions") {
  const auto r = evaluate({}, {});
  CHECK(r.conll_f1 == 0.0);
}

TEST_CASE("swapping gold and prediction swaps precision and recall") {
  std::mt19937_64 rng(7);
  std::vector<MentionKey> u(8);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = span_key(i, i);
  for (int t = 0; t < 300; ++t) {
    const auto g = oracles::random_partition(u, 4, 0.9, rng);
    const auto p = oracles::random_partition(u, 4, 0.9, rng);
    const auto x = evaluate(g, p), y = evaluate(p, g);
    CHECK(x.muc.precision == doctest::Approx(y.muc.recall));
    CHECK(x.b_cubed.precision == doctest::Approx(y.b_cubed.recall));
    CHECK(x.ceaf_e.precision == doctest::Approx(y.ceaf_e.recall));
    CHECK(x.conll_f1 == doctest::Approx(y.conll_f1));
  }
}

TEST_CASE("scores do not depend on cell or member order") {
  std::mt19937_64 rng(11);
  std::vector<MentionKey> u(8);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = span_key(i, i + 1);
  for (int t = 0; t < 300; ++t) {
    const auto g = oracles::random_partition(u, 5, 0.8, rng);
    const auto p = oracles::random_partition(u, 5, 0.8, rng);
    const auto x = evaluate(g, p), y = evaluate(relabel(g, rng), relabel(p, rng));
    CHECK(x.muc.f1 == doctest::Approx(y.muc.f1).epsilon(1e-12));
    CHECK(x.b_cubed.f1 == doctest::Approx(y.b_cubed.f1).epsilon(1e-12));
    CHECK(x.ceaf_e.f1 == doctest::Approx(y.ceaf_e.f1).epsilon(1e-12));
  }
}

TEST_CASE("library scorers agree with brute-force references") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(1, 8);
  for (int t = 0; t < 2000; ++t) {
    std::vector<MentionKey> u(size(rng));
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = span_key(i, i);
    const auto g = oracles::random_partition(u, 3, 0.85, rng);
    const auto p = oracles::random_partition(u, 3, 0.85, rng);
    const auto m = muc(g, p);
    const auto om = oracles::muc(g, p);
    CHECK(std::abs(m.precision - om.p) < 1e-9);
    CHECK(std::abs(m.recall - om.r) < 1e-9);
    const auto bc = b_cubed(g, p);
    const auto ob = oracles::b_cubed(g, p);
    CHECK(std::abs(bc.precision - ob.p) < 1e-9);
    CHECK(std::abs(bc.recall - ob.r) < 1e-9);
    const auto ce = ceaf_e(g, p);
    const auto oc = oracles::ceaf_e(g, p);
    CHECK(std::abs(ce.precision - oc.p) < 1e-9);
    CHECK(std::abs(ce.recall - oc.r) < 1e-9);
  }
}

TEST_CASE("assignment solver matches permutation search") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(-3.0, 3.0);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = dim(rng), m = dim(rng);
    std::vector<std::vector<double>> cost(n, std::vector<double>(m));
    for (auto& row : cost)
      for (auto& x : row) x = w(rng);
    const auto sol = solve_assignment(cost);
    double got = 0;
    std::size_t assigned = 0;
    std::vector<bool> used(m, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (sol[i] >= m) continue;
      CHECK_FALSE(used[sol[i]]);
      used[sol[i]] = true;
      got += cost[i][sol[i]];
      ++assigned;
    }
    CHECK(assigned == std::min(n, m));
    // brute force over injections of the smaller side
    double best = 1e300;
    const bool wide = n <= m;
    std::vector<std::size_t> perm(wide ? m : n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double s = 0;
      for (std::size_t i = 0; i < std::min(n, m); ++i) s += wide ? cost[i][perm[i]] : cost[perm[i]][i];
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("averaging reports") {
  MetricReport x, y;
  x.muc = make_prf(1.0, 0.5);
  y.muc = make_prf(0.0, 0.0);
  x.conll_f1 = 0.6;
  y.conll_f1 = 0.2;
  const auto m = average({x, y});
  CHECK(m.muc.precision == doctest::Approx(0.5));
  CHECK(m.conll_f1 == doctest::Approx(0.4));
  CHECK(average({}).conll_f1 == 0.0);
}
