#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace laplax;

namespace {

WeightedMultigraph weighted_random(std::size_t n, std::size_t extra, std::uint64_t seed) {
  return gen::with_uniform_weights(gen::random_connected(n, extra, seed), 1.0, 10.0, seed + 1);
}

StretchSubgraph subgraph_for(const WeightedMultigraph& g, std::uint64_t seed) {
  return ls_subgraph(reciprocal_weights(g), AkpwParams{}, seed);
}

std::vector<EdgeId> all_ids(const WeightedMultigraph& g) {
  std::vector<EdgeId> ids;
  for (const auto& e : g.edges()) ids.push_back(e.id);
  return ids;
}

}  // namespace

TEST(Sparsify, WholeGraphAsSubgraphNeedsNoSamples) {
  const auto g = weighted_random(40, 60, 3);
  SparsifyParams p;
  p.kappa = 10.0;
  const auto ids = all_ids(g);
  const Sparsifier s = incremental_sparsify(g, ids, p);
  EXPECT_EQ(s.audit.q, 0u);
  EXPECT_DOUBLE_EQ(s.audit.stretch_sum, 0.0);
  EXPECT_DOUBLE_EQ(s.audit.scale, 5.0);
  ASSERT_TRUE(s.audit.verified);
  EXPECT_NEAR(*s.audit.lambda_min, 5.0, 1e-9);
  EXPECT_NEAR(*s.audit.lambda_max, 5.0, 1e-9);
  EXPECT_EQ(s.graph.num_edges(), g.num_edges());
}

TEST(Sparsify, CycleOverPathSamplesTheClosingEdge) {
  const std::size_t n = 20;
  const auto g = gen::cycle(n);
  std::vector<EdgeId> path;
  EdgeId closing = 0;
  for (const auto& e : g.edges()) {
    if ((e.u == 0 && e.v == n - 1) || (e.v == 0 && e.u == n - 1))
      closing = e.id;
    else
      path.push_back(e.id);
  }
  ASSERT_EQ(path.size(), n - 1);
  SparsifyParams p;
  p.kappa = 10.0;
  p.c_is = 1.0;
  const Sparsifier s = incremental_sparsify(g, path, p);
  // S = n - 1, log n = 5, log xi = 1
  EXPECT_DOUBLE_EQ(s.audit.stretch_sum, 19.0);
  EXPECT_EQ(s.audit.q, 10u);
  EXPECT_DOUBLE_EQ(s.audit.scale, 4.75);
  ASSERT_EQ(s.graph.num_edges(), n);
  for (const auto& e : s.graph.edges()) {
    if (e.id == closing)
      EXPECT_DOUBLE_EQ(e.w, 1.0);
    else
      EXPECT_DOUBLE_EQ(e.w, 4.75);
  }
  EXPECT_TRUE(s.audit.verified);
  EXPECT_TRUE(s.audit.first_attempt_pass);
}

TEST(Sparsify, SandwichHoldsOnRandomQuadraticForms) {
  const auto g = weighted_random(150, 300, 11);
  SparsifyParams p;
  p.kappa = 10.0;
  p.seed = 5;
  const auto sub = subgraph_for(g, 5);
  const Sparsifier s = incremental_sparsify(g, sub, p);
  ASSERT_TRUE(s.audit.verified);
  EXPECT_GE(*s.audit.lambda_min, 1.0 - 1e-9);
  EXPECT_LE(*s.audit.lambda_max, 10.0 * (1.0 + 1e-9));

  const CsrMatrix LG = Laplacian::from_graph(g).matrix();
  const CsrMatrix LH = Laplacian::from_graph(s.graph).matrix();
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const Vector x = laplax::testing::random_mean_zero(g, 1000 + k);
    const double r = oracle::rayleigh(LH, LG, x);
    EXPECT_GE(r, 1.0 - 1e-9);
    EXPECT_LE(r, 10.0 * (1.0 + 1e-9));
  }
}

TEST(Sparsify, EdgeBudget) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = weighted_random(120, 400, seed);
    const auto sub = subgraph_for(g, seed);
    SparsifyParams p;
    p.kappa = 20.0;
    p.c_is = 0.3;
    p.seed = seed;
    p.checked = false;
    const Sparsifier s = incremental_sparsify(g, sub, p);
    EXPECT_LE(s.graph.num_edges(), sub.edge_count() + s.audit.q);
    const double logn = static_cast<double>(log2_ceil(g.num_vertices()));
    EXPECT_EQ(s.audit.q, static_cast<std::size_t>(std::ceil(0.3 * s.audit.stretch_sum * logn / 20.0)));
  }
}

TEST(Sparsify, SamplingMatchesItsDistribution) {
  const std::vector<double> w{3.0, 1.0, 0.0, 7.5, 2.0, 0.25, 4.0, 9.0, 1.5, 5.0, 6.0};
  const std::size_t draws = 100000;
  const auto counts = sample_proportional(w, draws, 42);
  double total = 0.0;
  for (double x : w) total += x;
  double chi2 = 0.0;
  std::size_t sum = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sum += counts[i];
    if (w[i] == 0.0) {
      EXPECT_EQ(counts[i], 0u);
      continue;
    }
    const double p = w[i] / total;
    const double expect = p * static_cast<double>(draws);
    const double sigma = std::sqrt(expect * (1.0 - p));
    EXPECT_LE(std::abs(static_cast<double>(counts[i]) - expect), 3.0 * sigma) << "bin " << i;
    chi2 += (static_cast<double>(counts[i]) - expect) * (static_cast<double>(counts[i]) - expect) / expect;
  }
  EXPECT_EQ(sum, draws);
  // 10 nonzero bins, 9 degrees of freedom, upper 0.001 quantile
  EXPECT_LT(chi2, 27.88);
}

TEST(Sparsify, SamplingEdgeCases) {
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_EQ(sample_proportional(zeros, 10, 1), (std::vector<std::size_t>{0, 0}));
  const std::vector<double> w{1.0, 2.0};
  EXPECT_EQ(sample_proportional(w, 0, 1), (std::vector<std::size_t>{0, 0}));
  const std::vector<double> bad{1.0, -1.0};
  EXPECT_THROW(sample_proportional(bad, 5, 1), InputError);
}

TEST(Sparsify, SameResultForAnyThreadCount) {
  const auto g = weighted_random(200, 900, 9);
  const auto sub = subgraph_for(g, 9);
  SparsifyParams p;
  p.kappa = 4.0;
  p.seed = 77;
  p.checked = false;
  std::string ref;
  for (int t : {1, 2, 8}) {
    ThreadScope scope(t);
    const auto fp = laplax::testing::fingerprint(incremental_sparsify(g, sub, p).graph);
    if (ref.empty())
      ref = fp;
    else
      EXPECT_EQ(fp, ref) << t << " threads";
  }
}

TEST(Sparsify, UncheckedModeSkipsVerification) {
  const auto g = weighted_random(60, 100, 2);
  SparsifyParams p;
  p.checked = false;
  const Sparsifier s = incremental_sparsify(g, subgraph_for(g, 2), p);
  EXPECT_FALSE(s.audit.verified);
  EXPECT_FALSE(s.audit.lambda_min.has_value());
  EXPECT_EQ(s.audit.attempts, 1u);
}

TEST(Sparsify, Rejects) {
  const auto g = gen::cycle(6);
  const auto ids = all_ids(g);
  SparsifyParams p;
  p.kappa = 1.0;
  EXPECT_THROW(incremental_sparsify(g, ids, p), InputError);
  p.kappa = 4.0;
  p.xi = 1.5;
  EXPECT_THROW(incremental_sparsify(g, ids, p), InputError);
  p.xi = 2.0;
  const std::vector<EdgeId> partial(ids.begin(), ids.begin() + 3);
  EXPECT_THROW(incremental_sparsify(g, partial, p), InputError);
  const std::vector<EdgeId> unknown{999};
  EXPECT_THROW(incremental_sparsify(g, unknown, p), InputError);
}

TEST(Sparsify, TinyBudgetStillYieldsSandwich) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = weighted_random(150, 300, 100 + seed);
    SparsifyParams p;
    p.kappa = 10.0;
    p.c_is = 0.002;
    p.seed = seed;
    const Sparsifier s = incremental_sparsify(g, subgraph_for(g, seed), p);
    ASSERT_TRUE(s.audit.verified);
    const auto b = oracle::pencil_bounds(Laplacian::from_graph(s.graph).matrix(), Laplacian::from_graph(g).matrix());
    EXPECT_GE(b.lambda_min, 1.0 - 1e-9);
    EXPECT_LE(b.lambda_max, 10.0 * (1.0 + 1e-9));
    EXPECT_NEAR(b.lambda_min, *s.audit.lambda_min, 1e-8);
  }
}

TEST(Sparsify, StretchOfSubgraphEdgesIsAtMostOne) {
  const auto g = weighted_random(50, 80, 4);
  const auto sub = subgraph_for(g, 4);
  const auto ids = sub.all_eids();
  const auto st = conductance_stretch(g, ids);
  for (EdgeId id : ids) EXPECT_LE(st[*g.index_of(id)], 1.0 + 1e-12);
}
