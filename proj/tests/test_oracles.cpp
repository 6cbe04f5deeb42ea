#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace laplax;

TEST(DensePinv, TwoVertices) {
  const WeightedMultigraph g(2, {{0, 1, 2.0, 0}});
  const Vector x = oracle::dense_pinv_solve(Laplacian::from_graph(g).matrix(), Vector{1.0, -1.0});
  EXPECT_NEAR(x[0], 0.25, 1e-14);
  EXPECT_NEAR(x[1], -0.25, 1e-14);
}

TEST(DensePinv, ConstantVectorMapsToZero) {
  const auto g = gen::cycle(7);
  const Vector x = oracle::dense_pinv_solve(Laplacian::from_graph(g).matrix(), Vector(7, 3.0));
  for (double v : x) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(DensePinv, ResidualOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = gen::with_uniform_weights(gen::erdos_renyi(120, 0.05, seed), 0.1, 10.0, seed);
    const CsrMatrix L = Laplacian::from_graph(g).matrix();
    const Vector b = laplax::testing::random_mean_zero(g, seed);
    const Vector x = oracle::dense_pinv_solve(L, b);
    const Vector r = L * x;
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(r[i] - b[i]));
    EXPECT_LE(worst, 1e-10);
    // x is orthogonal to each component's constant vector
    std::size_t count = 0;
    const auto label = components(g, &count);
    std::vector<double> sum(count, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) sum[label[i]] += x[i];
    for (double s : sum) EXPECT_NEAR(s, 0.0, 1e-10);
  }
}

TEST(DensePinv, PsdVersionAgreesOnLaplacians) {
  const auto g = gen::with_uniform_weights(gen::grid(6, 7), 1.0, 3.0, 2);
  const CsrMatrix L = Laplacian::from_graph(g).matrix();
  const Vector b = laplax::testing::random_mean_zero(g, 2);
  const Vector a = oracle::dense_pinv_solve(L, b);
  const Vector c = oracle::dense_psd_pinv_solve(L, b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], c[i], 1e-10);
}

TEST(DensePinv, CeilingIsEnforced) {
  const auto g = gen::path(20);
  const CsrMatrix L = Laplacian::from_graph(g).matrix();
  EXPECT_THROW(oracle::dense_pinv_solve(L, Vector(20, 0.0), 10), InputError);
  EXPECT_THROW(oracle::pencil_bounds(L, L, 10), InputError);
}

TEST(Pencil, ScaledCopies) {
  const auto g = gen::with_uniform_weights(gen::random_connected(40, 50, 1), 1.0, 4.0, 1);
  std::vector<Edge> doubled(g.edges().begin(), g.edges().end());
  for (auto& e : doubled) e.w *= 2.0;
  const CsrMatrix LG = Laplacian::from_graph(g).matrix();
  const CsrMatrix LH = Laplacian::from_graph(WeightedMultigraph(40, doubled)).matrix();
  const auto same = oracle::pencil_bounds(LG, LG);
  EXPECT_NEAR(same.lambda_min, 1.0, 1e-10);
  EXPECT_NEAR(same.lambda_max, 1.0, 1e-10);
  const auto twice = oracle::pencil_bounds(LH, LG);
  EXPECT_NEAR(twice.lambda_min, 2.0, 1e-10);
  EXPECT_NEAR(twice.lambda_max, 2.0, 1e-10);
}

TEST(Pencil, RayleighQuotientsStayInside) {
  const auto g = gen::with_uniform_weights(gen::random_connected(60, 100, 4), 1.0, 4.0, 4);
  const auto sub = ls_subgraph(reciprocal_weights(g), AkpwParams{}, 4);
  const WeightedMultigraph h = g.edge_subgraph(sub.all_eids());
  const CsrMatrix LG = Laplacian::from_graph(g).matrix();
  const CsrMatrix LH = Laplacian::from_graph(h).matrix();
  const auto b = oracle::pencil_bounds(LH, LG);
  EXPECT_GT(b.lambda_min, 0.0);
  EXPECT_LE(b.lambda_max, 1.0 + 1e-10);  // H is a subgraph of G
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const Vector x = laplax::testing::random_mean_zero(g, s);
    const double r = oracle::rayleigh(LH, LG, x);
    EXPECT_GE(r, b.lambda_min * (1.0 - 1e-9));
    EXPECT_LE(r, b.lambda_max * (1.0 + 1e-9));
  }
}

TEST(Pencil, Rejects) {
  const CsrMatrix a = Laplacian::from_graph(gen::path(4)).matrix();
  const CsrMatrix b = Laplacian::from_graph(gen::path(5)).matrix();
  EXPECT_THROW(oracle::pencil_bounds(a, b), InputError);
  const CsrMatrix split = Laplacian::from_graph(WeightedMultigraph(4, {{0, 1, 1.0, 0}, {2, 3, 1.0, 1}})).matrix();
  EXPECT_THROW(oracle::pencil_bounds(split, a), InputError);
}

TEST(ShortestPaths, SmallWeightedGraph) {
  const WeightedMultigraph g(4, {{0, 1, 1.0, 0}, {1, 2, 2.0, 1}, {0, 2, 5.0, 2}, {2, 3, 1.0, 3}});
  const auto d = oracle::all_pairs_shortest_paths(g);
  EXPECT_DOUBLE_EQ(d[0][2], 3.0);
  EXPECT_DOUBLE_EQ(d[0][3], 4.0);
  EXPECT_DOUBLE_EQ(d[3][1], 3.0);
  // stretch of the triangle over the path 0-1-2-3
  const WeightedMultigraph h(4, {{0, 1, 1.0, 0}, {1, 2, 2.0, 1}, {2, 3, 1.0, 3}});
  EXPECT_DOUBLE_EQ(oracle::brute_total_stretch(g, h), 1.0 + 1.0 + 3.0 / 5.0 + 1.0);
}

TEST(ReferenceSplit, TrivialGraphs) {
  SplitParams p;
  p.rho = 4;
  p.seed = 1;
  const auto one = oracle::reference_split_graph(WeightedMultigraph(1, {}), p);
  EXPECT_EQ(one.assignment, (std::vector<Vertex>{0}));
  const WeightedMultigraph two(2, {{0, 1, 1.0, 0}});
  const auto d = oracle::reference_split_graph(two, p);
  const auto fast = split_graph(two, p);
  EXPECT_EQ(d.assignment, fast.assignment);
  EXPECT_EQ(d.centers, fast.centers);
}

TEST(ReplayElimination, PathSchur) {
  const auto g = gen::path(4);
  const Elimination el = greedy_elimination(g, 0);
  const Eigen::MatrixXd S = oracle::replay_elimination(g, el.record);
  ASSERT_EQ(S.rows(), 1);
  EXPECT_NEAR(S(0, 0), 0.0, 1e-15);
}
