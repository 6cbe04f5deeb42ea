#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace laplax;

namespace {

SolveOptions quick(double eps = 1e-8) {
  SolveOptions o;
  o.epsilon = eps;
  o.deterministic = true;
  return o;
}

WeightedMultigraph tree_like(std::size_t n, std::size_t extra, std::uint64_t seed) {
  return gen::with_uniform_weights(gen::random_connected(n, extra, seed), 1.0, 10.0, seed + 3);
}

SddMatrix random_sdd(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Triplet> t;
  std::vector<double> diag(n, 0.0);
  const auto g = gen::random_connected(n, 2 * n, seed);
  for (const auto& e : g.edges()) {
    const double w = 0.5 + rng.unit();
    const double sign = rng.below(2) ? 1.0 : -1.0;
    t.push_back({e.u, e.v, sign * w});
    t.push_back({e.v, e.u, sign * w});
    diag[e.u] += w;
    diag[e.v] += w;
  }
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, diag[i] + (i % 5 == 0 ? 0.1 : 0.0)});
  return SddMatrix::from_triplets(n, std::move(t));
}

}  // namespace

TEST(KappaSchedule, ParseAndDescribe) {
  for (const std::string s : {"uniform:25", "geometric:16,0.5,4", "explicit:25,16,9"}) {
    const auto k = KappaSchedule::parse(s);
    EXPECT_EQ(KappaSchedule::parse(k.describe()).describe(), k.describe());
  }
  EXPECT_DOUBLE_EQ(KappaSchedule::parse("uniform:25").at(7, 1000), 25.0);
  const auto e = KappaSchedule::parse("explicit:25,16,9");
  EXPECT_DOUBLE_EQ(e.at(1, 10), 25.0);
  EXPECT_DOUBLE_EQ(e.at(3, 10), 9.0);
  EXPECT_DOUBLE_EQ(e.at(9, 10), 9.0);
  EXPECT_THROW(KappaSchedule::parse("uniform:1"), InputError);
  EXPECT_THROW(KappaSchedule::parse("uniform:x"), InputError);
  EXPECT_THROW(KappaSchedule::parse("spiral:3"), InputError);
  EXPECT_THROW(KappaSchedule::parse("explicit:4,0.5"), InputError);
}

TEST(KappaSchedule, GeometricGrowthSaturates) {
  const auto g = KappaSchedule::geometric(2.0, 0.75, 3);
  const std::size_t n = 1 << 10;
  const double loglog = std::log(10.0);
  EXPECT_NEAR(g.at(1, n), std::exp(4.0 * loglog), 1e-9 * g.at(1, n));
  EXPECT_NEAR(g.at(2, n), std::exp(1.5 * 4.0 * loglog), 1e-9 * g.at(2, n));
  EXPECT_DOUBLE_EQ(g.at(5, n), g.at(3, n));
  const auto big = KappaSchedule::geometric(16.0);
  EXPECT_EQ(big.at(1, std::size_t{1} << 60), std::numeric_limits<double>::max());
  EXPECT_LT(big.at(1, n), std::numeric_limits<double>::max());
  EXPECT_TRUE(std::isfinite(KappaSchedule::theory_uniform(16.0, n).kappa));
}

TEST(Solver, TwoByTwoSdd) {
  const SddMatrix A = SddMatrix::from_triplets(2, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
  const Vector b{1.0, 0.0};
  const SolveResult r = sdd_solve(A, b, quick());
  EXPECT_TRUE(r.report.lifted);
  EXPECT_NEAR(r.x[0], 2.0 / 3.0, 1e-7);
  EXPECT_NEAR(r.x[1], 1.0 / 3.0, 1e-7);
}

TEST(Solver, FourCycle) {
  const auto g = gen::cycle(4);
  const Vector b{1.0, -1.0, 1.0, -1.0};
  const SolveResult r = laplacian_solve(g, b, quick(1e-6));
  const CsrMatrix L = Laplacian::from_graph(g).matrix();
  const Vector xs = oracle::dense_pinv_solve(L, b);
  EXPECT_LE(laplax::testing::relative_a_error(L, r.x, xs), 1e-6);
  EXPECT_NEAR(r.x[0], 0.25, 1e-6);
  EXPECT_EQ(r.report.levels.size(), 1u);
}

TEST(Solver, TwoVertices) {
  const WeightedMultigraph g(2, {{0, 1, 1.0, 0}});
  const SolveResult r = laplacian_solve(g, Vector{1.0, -1.0}, quick());
  EXPECT_NEAR(r.x[0], 0.5, 1e-9);
  EXPECT_NEAR(r.x[1], -0.5, 1e-9);
  const SolveResult z = laplacian_solve(g, Vector{1.0, 1.0}, quick());
  EXPECT_EQ(z.x, (Vector{0.0, 0.0}));
  EXPECT_EQ(z.report.outer_iters, 0u);
}

TEST(Solver, PathChainEndsAtASingleVertex) {
  const auto g = gen::path(500);
  const SolveResult r = laplacian_solve(g, laplax::testing::random_mean_zero(g, 1), quick());
  ASSERT_GE(r.report.levels.size(), 2u);
  EXPECT_LE(r.report.levels.back().n, 1u);
  const CsrMatrix L = Laplacian::from_graph(g).matrix();
  const Vector xs = oracle::dense_pinv_solve(L, laplax::testing::random_mean_zero(g, 1));
  EXPECT_LE(laplax::testing::relative_a_error(L, r.x, xs), 1e-8);
}

TEST(Solver, GridMatchesDenseOracle) {
  const auto g = gen::grid(30, 30);
  const Vector b = laplax::testing::random_mean_zero(g, 4);
  const CsrMatrix L = Laplacian::from_graph(g).matrix();
  const Vector xs = oracle::dense_pinv_solve(L, b);
  for (double eps : {1e-4, 1e-8}) {
    const SolveResult r = laplacian_solve(g, b, quick(eps));
    EXPECT_LE(laplax::testing::relative_a_error(L, r.x, xs), eps);
    EXPECT_GE(r.report.outer_iters, 1u);
  }
}

TEST(Solver, RefinementOuterLoop) {
  const auto g = tree_like(250, 120, 6);
  const Vector b = laplax::testing::random_mean_zero(g, 6);
  SolveOptions o = quick(1e-8);
  o.outer = OuterMethod::Refinement;
  const SolveResult r = laplacian_solve(g, b, o);
  const CsrMatrix L = Laplacian::from_graph(g).matrix();
  EXPECT_LE(laplax::testing::relative_a_error(L, r.x, oracle::dense_pinv_solve(L, b)), 1e-8);
}

TEST(Solver, DisconnectedInputProjectsPerComponent) {
  const WeightedMultigraph g(5, {{0, 1, 1.0, 0}, {1, 2, 2.0, 1}, {3, 4, 1.0, 2}});
  const Vector b{1.0, 1.0, 1.0, 2.0, 0.0};  // not mean zero per component
  const SolveResult r = laplacian_solve(g, b, quick());
  const Vector xs = oracle::dense_pinv_solve(Laplacian::from_graph(g).matrix(), b);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.x[i], xs[i], 1e-8);
}

TEST(Solver, GeneralSddThroughLift) {
  const SddMatrix A = random_sdd(80, 13);
  ASSERT_FALSE(A.is_laplacian());
  const Vector b = laplax::testing::random_vector(80, 13);
  const SolveResult r = sdd_solve(A, b, quick(1e-8));
  EXPECT_TRUE(r.report.lifted);
  const Vector xs = oracle::dense_psd_pinv_solve(A.matrix(), b);
  EXPECT_LE(laplax::testing::relative_a_error(A.matrix(), r.x, xs), 1e-8);
}

TEST(Solver, HalvingEpsilonAddsFewIterations) {
  const auto g = gen::grid(30, 30);
  const Vector b = laplax::testing::random_mean_zero(g, 9);
  // CG gains a roughly fixed factor per iteration; single halvings jitter,
  // so bound each step loosely and the seven-step mean tightly.
  std::size_t previous = 0, first = 0;
  for (int k = 0; k < 8; ++k) {
    const double eps = 1e-4 * std::pow(0.5, k);
    const std::size_t it = laplacian_solve(g, b, quick(eps)).report.outer_iters;
    if (k == 0) first = it;
    if (k > 0) {
      EXPECT_GE(it, previous);
      EXPECT_LE(it, previous + 8) << "eps " << eps;
    }
    previous = it;
  }
  EXPECT_LE(previous - first, 7u * 4u);
}

TEST(Solver, Rejects) {
  const auto g = gen::cycle(10);
  EXPECT_THROW(laplacian_solve(g, Vector(9, 0.0), quick()), InputError);
  SolveOptions o = quick();
  o.epsilon = 0.0;
  EXPECT_THROW(laplacian_solve(g, Vector(10, 0.0), o), InputError);
  EXPECT_THROW(SddMatrix::from_triplets(2, {{0, 0, 1.0}, {0, 1, -2.0}, {1, 0, -2.0}, {1, 1, 2.0}}), InputError);
  EXPECT_THROW(SddMatrix::from_triplets(2, {{0, 0, 3.0}, {0, 1, -1.0}, {1, 0, -2.0}, {1, 1, 3.0}}), InputError);
}

TEST(Solver, IterationCapReportsHistory) {
  const auto g = gen::grid(20, 20);
  SolveOptions o = quick(1e-12);
  o.max_outer_iterations = 1;
  o.bottom_floor = 8;
  try {
    laplacian_solve(g, laplax::testing::random_mean_zero(g, 2), o);
    FAIL() << "expected the cap to trip";
  } catch (const AlgorithmError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration cap 1"), std::string::npos);
  }
}

TEST(Solver, OversizedKappaIsRefused) {
  const auto g = gen::grid(20, 20);
  SolveOptions o = quick();
  o.schedule = KappaSchedule::geometric(16.0);
  EXPECT_THROW(build_chain(g, o), AlgorithmError);
}

TEST(Solver, SameAnswerForAnyThreadCount) {
  const auto g = gen::with_uniform_weights(gen::erdos_renyi_degree(700, 6, 3), 1.0, 5.0, 3);
  const Vector b = laplax::testing::random_vector(g.num_vertices(), 3);
  std::string ref;
  for (int t : {1, 2, 8}) {
    ThreadScope scope(t);
    const auto fp = laplax::testing::fingerprint(laplacian_solve(g, b, quick()).x);
    if (ref.empty())
      ref = fp;
    else
      EXPECT_EQ(fp, ref) << t << " threads";
  }
}

class ChainLevels : public ::testing::Test {
protected:
  void SetUp() override {
    g = tree_like(300, 60, 21);
    SolveOptions o = quick();
    o.bottom_floor = 16;
    chain = build_chain(g, o);
  }
  WeightedMultigraph g;
  PreconditionerChain chain;
};

TEST_F(ChainLevels, LevelsShrink) {
  ASSERT_GE(chain.depth(), 2u);
  for (std::size_t i = 0; i + 1 < chain.depth(); ++i) {
    EXPECT_LT(chain.levels[i + 1].m, chain.levels[i].m);
    EXPECT_TRUE(chain.levels[i].sparsify.verified);
    EXPECT_TRUE(chain.levels[i].interval_exact);
    EXPECT_EQ(chain.levels[i].degree, 5u);
  }
}

TEST_F(ChainLevels, TopLevelContracts) {
  ASSERT_GE(chain.depth(), 2u);
  const ChainLevel& top = chain.levels[0];
  EXPECT_LE(top.contraction, 0.9);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Vector b = laplax::testing::random_mean_zero(g, 300 + s);
    const Vector x = level_solve(chain, 0, b);
    const Vector xs = oracle::dense_pinv_solve(top.LA, b);
    const double err = laplax::testing::relative_a_error(top.LA, x, xs);
    EXPECT_LE(err, 0.9);
    EXPECT_LE(err, top.contraction * (1.0 + 1e-6) + 1e-12);
  }
}

TEST_F(ChainLevels, LevelSolveIsLinearAndFixed) {
  const Vector x = laplax::testing::random_mean_zero(g, 1);
  const Vector y = laplax::testing::random_mean_zero(g, 2);
  const double a = 0.75, b = -2.5;
  Vector mix(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) mix[k] = a * x[k] + b * y[k];
  const Vector fx = level_solve(chain, 0, x), fy = level_solve(chain, 0, y), fm = level_solve(chain, 0, mix);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    num = std::max(num, std::abs(fm[k] - (a * fx[k] + b * fy[k])));
    den = std::max(den, std::abs(fm[k]));
  }
  EXPECT_LE(num, 1e-10 * den);
  EXPECT_EQ(laplax::testing::fingerprint(level_solve(chain, 0, x)), laplax::testing::fingerprint(fx));
}

TEST_F(ChainLevels, WorkAccounting) {
  WorkCounters w;
  level_solve(chain, 0, laplax::testing::random_mean_zero(g, 5), &w);
  // Level i runs k_i - 1 multiplies per call and is called prod_{j<i} k_j times.
  std::size_t expect = 0, calls = 1;
  for (std::size_t i = 0; i + 1 < chain.depth(); ++i) {
    const auto& L = chain.levels[i];
    EXPECT_EQ(w.levels.at(i).calls, calls);
    EXPECT_EQ(w.levels.at(i).preconditioner_applies, calls * L.degree);
    expect += calls * (L.degree - 1) * L.m;
    calls *= L.degree;
  }
  EXPECT_EQ(w.bottom_solves, calls);
  EXPECT_EQ(w.total_work(), expect);
}

TEST_F(ChainLevels, RejectsBadLevel) {
  EXPECT_THROW(level_solve(chain, chain.depth(), Vector(1, 0.0)), InputError);
  EXPECT_THROW(level_solve(chain, 0, Vector(g.num_vertices() + 1, 0.0)), InputError);
}
