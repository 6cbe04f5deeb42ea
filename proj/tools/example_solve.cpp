// Library walk-through: build a weighted grid Laplacian, solve it, and check
// the answer against the dense pseudoinverse.

#include <iostream>

#include <laplax/laplax.hpp>

int main() {
  using namespace laplax;
  const WeightedMultigraph g = gen::with_uniform_weights(gen::grid(30, 30), 1.0, 100.0, 7);

  Rng rng(11);
  Vector b(g.num_vertices());
  for (auto& v : b) v = rng.unit() - 0.5;

  SolveOptions opt;
  opt.epsilon = 1e-8;
  opt.seed = 3;
  const SolveResult r = laplacian_solve(g, b, opt);

  const CsrMatrix L = Laplacian::from_graph(g).matrix();
  Vector projected = b;
  std::size_t count = 0;
  const auto comp = components(g, &count);
  project_mean_zero(projected, comp, count);
  const Vector exact = oracle::dense_pinv_solve(L, projected);
  Vector err(exact.size());
  for (std::size_t i = 0; i < err.size(); ++i) err[i] = r.x[i] - exact[i];

  std::cout << "levels:";
  for (const auto& l : r.report.levels) std::cout << ' ' << l.n << '/' << l.m;
  std::cout << "\nouter iterations: " << r.report.outer_iters << "\nrelative A-norm error: "
            << a_norm(L, err) / a_norm(L, exact) << '\n';
}
