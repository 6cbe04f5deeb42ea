#pragma once

// Preconditioner chain and recursive Chebyshev solver for SDD systems.
//
// Level i holds a Laplacian A_i, a sparsifier B_i of it and the elimination
// record that turns B_i into A_{i+1}. Solving with A_i runs a fixed number of
// preconditioned Chebyshev steps (degree ceil(sqrt(kappa_i))), where each
// preconditioner application reduces through record_i, solves level i+1 and
// back-substitutes. The last level is factored densely.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eliminate.hpp"
#include "error.hpp"
#include "gremban.hpp"
#include "graph.hpp"
#include "lowstretch.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "sparse.hpp"
#include "sparsify.hpp"

namespace laplax {

// kappa_i per level. Theory schedules overflow quickly; values saturate at
// the largest finite double.
struct KappaSchedule {
  enum class Kind { Uniform, Geometric, Explicit };
  Kind kind = Kind::Uniform;
  double kappa = 25.0;
  double lambda = 16.0;
  double c4 = 7.0 / 13.0;
  std::size_t L = 3;  // geometric growth up to level L, uniform at kappa_L afterwards
  std::vector<double> list;

  static KappaSchedule uniform(double kappa) {
    KappaSchedule s;
    s.kappa = kappa;
    return s;
  }
  static KappaSchedule geometric(double lambda, double c4 = 7.0 / 13.0, std::size_t L = 3) {
    KappaSchedule s;
    s.kind = Kind::Geometric;
    s.lambda = lambda;
    s.c4 = c4;
    s.L = L;
    return s;
  }
  static KappaSchedule explicit_list(std::vector<double> values) {
    KappaSchedule s;
    s.kind = Kind::Explicit;
    s.list = std::move(values);
    return s;
  }
  // Uniform log^{lambda^2} n.
  static KappaSchedule theory_uniform(double lambda, std::size_t n) {
    return uniform(saturate(lambda * lambda * std::log(std::log2(std::max<double>(static_cast<double>(n), 4.0)))));
  }

  // level is 1-based
  double at(std::size_t level, std::size_t n) const {
    switch (kind) {
      case Kind::Uniform:
        return kappa;
      case Kind::Explicit:
        return list.empty() ? 25.0 : list[std::min(level, list.size()) - 1];
      case Kind::Geometric: {
        const std::size_t i = std::min(level, std::max<std::size_t>(L, 1));
        const double exponent = std::pow(2.0 * c4, static_cast<double>(i - 1)) * lambda * lambda;
        return saturate(exponent * std::log(std::log2(std::max<double>(static_cast<double>(n), 4.0))));
      }
    }
    return kappa;
  }

  void validate() const {
    if (kind == Kind::Uniform) require(kappa > 1.0, "kappa must exceed 1");
    if (kind == Kind::Explicit) {
      require(!list.empty(), "explicit schedule needs at least one kappa");
      for (double k : list) require(k > 1.0, "kappa entries must exceed 1");
    }
    if (kind == Kind::Geometric) require(lambda > 0.0 && c4 > 0.0 && L >= 1, "geometric schedule needs positive parameters");
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::Uniform:
        os << "uniform:" << kappa;
        break;
      case Kind::Geometric:
        os << "geometric:" << lambda << "," << c4 << "," << L;
        break;
      case Kind::Explicit:
        os << "explicit:";
        for (std::size_t i = 0; i < list.size(); ++i) os << (i ? "," : "") << list[i];
        break;
    }
    return os.str();
  }

  // "uniform:25", "geometric:16[,c4[,L]]", "explicit:25,16,16"
  static KappaSchedule parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::vector<double> values;
    if (colon != std::string::npos) {
      std::stringstream ss(text.substr(colon + 1));
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used = 0;
          values.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          throw InputError("bad number '" + item + "' in schedule '" + text + "'");
        }
      }
    }
    KappaSchedule s;
    if (kind == "uniform" && values.size() == 1) {
      s = uniform(values[0]);
    } else if (kind == "geometric" && !values.empty() && values.size() <= 3) {
      s = geometric(values[0], values.size() > 1 ? values[1] : 7.0 / 13.0,
                    values.size() > 2 ? static_cast<std::size_t>(values[2]) : 3);
    } else if (kind == "explicit" && !values.empty()) {
      s = explicit_list(values);
    } else {
      throw InputError("unknown schedule '" + text + "' (expected uniform:K, geometric:LAMBDA[,C4[,L]] or explicit:K1,K2,...)");
    }
    s.validate();
    return s;
  }

private:
  static double saturate(double log_value) {
    return log_value >= std::log(std::numeric_limits<double>::max()) ? std::numeric_limits<double>::max()
                                                                      : std::exp(log_value);
  }
};

enum class OuterMethod { Cg, Refinement };

// Low-stretch settings inside the chain: lambda = 16 keeps the carried-over
// edge set small enough for elimination to shrink each level.
inline AkpwParams chain_low_stretch_defaults() {
  AkpwParams p;
  p.lambda = 16;
  return p;
}
enum class IntervalPolicy { Measured, Nominal };

struct SolveOptions {
  double epsilon = 1e-8;
  KappaSchedule schedule = KappaSchedule::uniform(25.0);
  std::size_t bottom_floor = 64;
  double delta = 0.0;  // stop once m_d <= max(bottom_floor, ceil(m^{1/3 - delta}))
  std::size_t max_levels = 16;
  std::uint64_t seed = 0;
  bool checked = true;
  std::size_t dense_ceiling = 300;
  double c_is = 0.002;
  double xi = 2.0;
  AkpwParams low_stretch = chain_low_stretch_defaults();
  OuterMethod outer = OuterMethod::Cg;
  IntervalPolicy interval = IntervalPolicy::Measured;
  std::size_t lanczos_steps = 40;
  std::size_t max_outer_iterations = 2000;
  std::size_t max_degree = 4096;  // refuse Chebyshev degrees beyond this
  bool deterministic = false;

  void validate() const {
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0, 1)");
    schedule.validate();
    require(max_levels >= 1, "chain needs at least one level");
    require(c_is > 0.0, "c_IS must be positive");
    require(xi >= 2.0, "xi must be at least 2");
  }
};

struct ChainLevel {
  WeightedMultigraph A;  // conductances, parallel edges merged
  CsrMatrix LA;
  std::vector<Vertex> component;
  std::size_t component_count = 0;
  std::size_t n = 0, m = 0;
  // The rest is empty on the bottom level.
  double kappa = 0.0;
  std::size_t degree = 0;
  WeightedMultigraph B;
  EliminationRecord record;
  SparsifyAudit sparsify;
  std::size_t tree_edges = 0, extra_edges = 0;
  std::size_t rounds = 0;  // low-stretch rounds plus elimination rounds
  double lo = 1.0, hi = 1.0;  // Chebyshev interval for the preconditioned operator
  bool interval_exact = false;
  double contraction = 0.0;   // 1 / T_k((hi + lo) / (hi - lo))
};

// Cholesky of A with the first vertex of each component grounded.
class GroundedCholesky {
public:
  GroundedCholesky() = default;

  GroundedCholesky(const CsrMatrix& A, std::span<const Vertex> component, std::size_t count) : n_(A.dim()) {
    slot_.assign(n_, kNone);
    std::vector<char> seen(count, 0);
    for (std::size_t v = 0; v < n_; ++v) {
      if (!seen[component[v]]) {
        seen[component[v]] = 1;
        continue;
      }
      slot_[v] = r_++;
    }
    component_.assign(component.begin(), component.end());
    count_ = count;
    double trace = 0.0;
    for (std::size_t v = 0; v < n_; ++v) trace += A.at(v, v);
    if (!factor(A, 0.0)) {
      jitter_ = 1e-12 * trace / static_cast<double>(std::max<std::size_t>(n_, 1));
      if (!factor(A, jitter_)) throw AlgorithmError("bottom-level factorization failed even with diagonal jitter");
    }
  }

  Vector solve(std::span<const double> b) const {
    Vector y(r_, 0.0);
    for (std::size_t v = 0; v < n_; ++v)
      if (slot_[v] != kNone) y[slot_[v]] = b[v];
    for (std::size_t i = 0; i < r_; ++i) {
      double s = y[i];
      for (std::size_t k = 0; k < i; ++k) s -= L_[i * r_ + k] * y[k];
      y[i] = s / L_[i * r_ + i];
    }
    for (std::size_t i = r_; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = i + 1; k < r_; ++k) s -= L_[k * r_ + i] * y[k];
      y[i] = s / L_[i * r_ + i];
    }
    Vector x(n_, 0.0);
    for (std::size_t v = 0; v < n_; ++v)
      if (slot_[v] != kNone) x[v] = y[slot_[v]];
    project_mean_zero(x, component_, count_);
    return x;
  }

  std::size_t dim() const { return n_; }
  double jitter() const { return jitter_; }

private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  bool factor(const CsrMatrix& A, double jitter) {
    L_.assign(r_ * r_, 0.0);
    for (std::size_t v = 0; v < n_; ++v) {
      if (slot_[v] == kNone) continue;
      auto cols = A.row_cols(v);
      auto vals = A.row_values(v);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (slot_[cols[k]] != kNone && slot_[cols[k]] <= slot_[v]) L_[slot_[v] * r_ + slot_[cols[k]]] = vals[k];
      L_[slot_[v] * r_ + slot_[v]] += jitter;
    }
    for (std::size_t j = 0; j < r_; ++j) {
      double d = L_[j * r_ + j];
      for (std::size_t k = 0; k < j; ++k) d -= L_[j * r_ + k] * L_[j * r_ + k];
      if (!(d > 0.0) || !std::isfinite(d)) return false;
      d = std::sqrt(d);
      L_[j * r_ + j] = d;
      for (std::size_t i = j + 1; i < r_; ++i) {
        double s = L_[i * r_ + j];
        for (std::size_t k = 0; k < j; ++k) s -= L_[i * r_ + k] * L_[j * r_ + k];
        L_[i * r_ + j] = s / d;
      }
    }
    return true;
  }

  std::size_t n_ = 0, r_ = 0, count_ = 0;
  std::vector<std::size_t> slot_;
  std::vector<Vertex> component_;
  std::vector<double> L_;
  double jitter_ = 0.0;
};

struct PreconditionerChain {
  std::vector<ChainLevel> levels;  // levels.back() is factored densely
  GroundedCholesky bottom;
  std::string schedule;
  std::vector<std::string> warnings;

  std::size_t depth() const { return levels.size(); }
  std::size_t rounds() const {
    std::size_t r = 0;
    for (const auto& l : levels) r += l.rounds;
    return r;
  }
};

struct LevelCounters {
  std::size_t calls = 0;
  std::size_t matvecs = 0;
  std::size_t matvec_work = 0;  // edges touched, m_i per multiply
  std::size_t preconditioner_applies = 0;
};

struct WorkCounters {
  std::vector<LevelCounters> levels;
  std::size_t bottom_solves = 0;

  std::size_t total_matvecs() const {
    std::size_t s = 0;
    for (const auto& l : levels) s += l.matvecs;
    return s;
  }
  std::size_t total_work() const {
    std::size_t s = 0;
    for (const auto& l : levels) s += l.matvec_work;
    return s;
  }
};

namespace detail {

inline WeightedMultigraph merged(const WeightedMultigraph& g) { return Laplacian::from_graph(g).to_graph(); }

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline LevelCounters* counters_for(WorkCounters* w, std::size_t i) {
  if (!w) return nullptr;
  if (w->levels.size() <= i) w->levels.resize(i + 1);
  return &w->levels[i];
}

inline Vector multiply(const ChainLevel& L, std::span<const double> x, LevelCounters* c) {
  if (c) {
    ++c->matvecs;
    c->matvec_work += L.m;
  }
  return L.LA * x;
}

inline double chebyshev_contraction(std::size_t k, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const double sigma = (hi + lo) / (hi - lo);
  return 1.0 / std::cosh(static_cast<double>(k) * std::acosh(sigma));
}

}  // namespace detail

inline Vector level_solve(const PreconditionerChain& chain, std::size_t i, std::span<const double> b,
                          WorkCounters* work = nullptr);

namespace detail {

// solve_{B_i}: reduce through record_i, solve level i + 1, back-substitute.
inline Vector apply_preconditioner(const PreconditionerChain& chain, std::size_t i, std::span<const double> r,
                                   WorkCounters* work) {
  const ChainLevel& L = chain.levels[i];
  if (auto* c = counters_for(work, i)) ++c->preconditioner_applies;
  const Vector reduced = reduce_rhs(L.record, r);
  const Vector y = level_solve(chain, i + 1, reduced, work);
  return eliminate_solve(L.record, y, r);
}

}  // namespace detail

// Approximate A_i^+ b. Level 0 is the input system; the last level is exact.
inline Vector level_solve(const PreconditionerChain& chain, std::size_t i, std::span<const double> b, WorkCounters* work) {
  if (i >= chain.levels.size()) throw InputError("chain has no level " + std::to_string(i));
  const ChainLevel& L = chain.levels[i];
  if (b.size() != L.n)
    throw InputError("level " + std::to_string(i) + " expects " + std::to_string(L.n) + " entries, got " +
                     std::to_string(b.size()));
  Vector rhs(b.begin(), b.end());
  project_mean_zero(rhs, L.component, L.component_count);
  // Sized once up front; nested levels must not reallocate under c.
  if (work && work->levels.size() < chain.levels.size()) work->levels.resize(chain.levels.size());
  auto* c = detail::counters_for(work, i);
  if (c) ++c->calls;
  if (i + 1 == chain.levels.size()) {
    if (work) ++work->bottom_solves;
    return chain.bottom.solve(rhs);
  }
  // Preconditioned Chebyshev on [lo, hi] with x0 = 0.
  const double theta = 0.5 * (L.hi + L.lo);
  const double delta = std::max(0.5 * (L.hi - L.lo), 1e-12 * theta);
  const double sigma = theta / delta;
  double rho = 1.0 / sigma;
  Vector x(L.n, 0.0), r = rhs;
  Vector d = detail::apply_preconditioner(chain, i, r, work);
  for (auto& v : d) v /= theta;
  for (std::size_t step = 1; step <= L.degree; ++step) {
    detail::axpy(1.0, d, x);
    if (step == L.degree) break;
    const Vector Ad = detail::multiply(L, d, c);
    detail::axpy(-1.0, Ad, r);
    const double rho_next = 1.0 / (2.0 * sigma - rho);
    const Vector z = detail::apply_preconditioner(chain, i, r, work);
    const double keep = rho_next * rho, push = 2.0 * rho_next / delta;
    for (std::size_t k = 0; k < L.n; ++k) d[k] = keep * d[k] + push * z[k];
    rho = rho_next;
  }
  project_mean_zero(x, L.component, L.component_count);
  return x;
}

namespace detail {

// Extreme eigenvalues of Z A on the range of A, Z the preconditioner of
// level i, from dense matrices.
inline std::pair<double, double> dense_preconditioned_spectrum(const PreconditionerChain& chain, std::size_t i) {
  const ChainLevel& L = chain.levels[i];
  const std::size_t n = L.n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& t : L.LA.triplets()) A(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(A);
  const double top = ea.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < ea.eigenvalues().size(); ++k)
    if (ea.eigenvalues()(k) > 1e-10 * std::max(top, 1e-300)) keep.push_back(k);
  const auto r = static_cast<Eigen::Index>(keep.size());
  if (r == 0) return {1.0, 1.0};
  Eigen::MatrixXd Q(static_cast<Eigen::Index>(n), r);
  for (Eigen::Index k = 0; k < r; ++k)
    Q.col(k) = ea.eigenvectors().col(keep[static_cast<std::size_t>(k)]) * std::sqrt(ea.eigenvalues()(keep[static_cast<std::size_t>(k)]));
  // S = Q^T Z Q, Q = A^{1/2} restricted to the range
  Eigen::MatrixXd ZQ(static_cast<Eigen::Index>(n), r);
  for (Eigen::Index k = 0; k < r; ++k) {
    Vector col(n);
    for (std::size_t v = 0; v < n; ++v) col[v] = Q(static_cast<Eigen::Index>(v), k);
    const Vector z = apply_preconditioner(chain, i, col, nullptr);
    for (std::size_t v = 0; v < n; ++v) ZQ(static_cast<Eigen::Index>(v), k) = z[v];
  }
  Eigen::MatrixXd S = Q.transpose() * ZQ;
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

// Ritz values of Z A from a short preconditioned CG run.
inline std::pair<double, double> lanczos_preconditioned_spectrum(const PreconditionerChain& chain, std::size_t i,
                                                                 std::size_t steps, std::uint64_t seed) {
  const ChainLevel& L = chain.levels[i];
  Rng rng(seed);
  Vector b(L.n);
  for (auto& v : b) v = rng.unit() - 0.5;
  project_mean_zero(b, L.component, L.component_count);
  Vector x(L.n, 0.0), r = b;
  Vector z = apply_preconditioner(chain, i, r, nullptr);
  Vector p = z;
  double rz = dot(r, z);
  const double rz0 = rz;
  std::vector<double> alphas, betas;
  for (std::size_t s = 0; s < steps && rz > 1e-28 * rz0 && rz > 0.0; ++s) {
    const Vector Ap = L.LA * p;
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rz / pAp;
    axpy(-alpha, Ap, r);
    z = apply_preconditioner(chain, i, r, nullptr);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    alphas.push_back(alpha);
    betas.push_back(beta);
    for (std::size_t k = 0; k < L.n; ++k) p[k] = z[k] + beta * p[k];
    rz = rz_next;
  }
  const auto k = static_cast<Eigen::Index>(alphas.size());
  if (k == 0) return {1.0, 1.0};
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto u = static_cast<std::size_t>(j);
    T(j, j) = 1.0 / alphas[u] + (j > 0 ? betas[u - 1] / alphas[u - 1] : 0.0);
    if (j + 1 < k) T(j, j + 1) = T(j + 1, j) = std::sqrt(std::max(0.0, betas[u])) / alphas[u];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace detail

// Builds the chain for the Laplacian of g (conductances).
inline PreconditionerChain build_chain(const WeightedMultigraph& g, const SolveOptions& opt) {
  opt.validate();
  PreconditionerChain chain;
  chain.schedule = opt.schedule.describe();
  const double m_top = static_cast<double>(std::max<std::size_t>(g.num_edges(), 1));
  const auto threshold = std::max<std::size_t>(
      opt.bottom_floor, static_cast<std::size_t>(std::ceil(std::pow(m_top, 1.0 / 3.0 - opt.delta))));

  auto make_level = [](WeightedMultigraph a) {
    ChainLevel L;
    L.A = detail::merged(a);
    L.LA = Laplacian::from_graph(L.A).matrix();
    L.component = components(L.A, &L.component_count);
    L.n = L.A.num_vertices();
    L.m = L.A.num_edges();
    return L;
  };

  chain.levels.push_back(make_level(g));
  for (std::size_t i = 0;; ++i) {
    ChainLevel& L = chain.levels.back();
    if (L.n <= opt.bottom_floor || L.m <= threshold || i + 1 >= opt.max_levels) break;
    const std::uint64_t level_seed = derive_seed(opt.seed, i);
    const double kappa = opt.schedule.at(i + 1, g.num_vertices());
    const double degree = std::ceil(std::sqrt(kappa));
    if (degree > static_cast<double>(opt.max_degree))
      throw AlgorithmError("kappa " + std::to_string(kappa) + " at level " + std::to_string(i + 1) +
                           " needs Chebyshev degree beyond the cap of " + std::to_string(opt.max_degree));

    StretchSubgraph sub = ls_subgraph(reciprocal_weights(L.A), opt.low_stretch, derive_seed(level_seed, 1));
    SparsifyParams sp;
    sp.kappa = kappa > 10.0 ? kappa / 10.0 : kappa;
    sp.xi = opt.xi;
    sp.c_is = opt.c_is;
    sp.seed = derive_seed(level_seed, 2);
    sp.checked = opt.checked;
    sp.dense_ceiling = opt.dense_ceiling;
    Sparsifier B = incremental_sparsify(L.A, sub, sp);
    Elimination el = greedy_elimination(B.graph, derive_seed(level_seed, 3));
    ChainLevel next = make_level(std::move(el.reduced));
    if (next.m >= L.m) {
      chain.warnings.push_back("chain stalled at level " + std::to_string(i + 1) + " (" + std::to_string(L.m) +
                               " edges -> " + std::to_string(next.m) + "); factoring it densely");
      break;
    }
    L.kappa = kappa;
    L.degree = static_cast<std::size_t>(degree);
    L.B = std::move(B.graph);
    L.sparsify = B.audit;
    L.record = std::move(el.record);
    L.tree_edges = sub.tree_eids.size();
    L.extra_edges = sub.extra_eids.size() + sub.removed_eids.size();
    L.rounds = sub.stats.rounds + L.record.rounds();
    chain.levels.push_back(std::move(next));
  }

  const ChainLevel& bottom = chain.levels.back();
  chain.bottom = GroundedCholesky(bottom.LA, bottom.component, bottom.component_count);
  if (chain.bottom.jitter() > 0.0)
    chain.warnings.push_back("bottom factorization used diagonal jitter " + std::to_string(chain.bottom.jitter()));

  // Intervals bottom-up: each level's preconditioner is fixed once the levels
  // below it are.
  for (std::size_t i = chain.levels.size() - 1; i-- > 0;) {
    ChainLevel& L = chain.levels[i];
    const double inner = chain.levels[i + 1].contraction;
    if (opt.interval == IntervalPolicy::Nominal) {
      const double target = L.kappa > 10.0 ? L.kappa / 10.0 : L.kappa;
      L.lo = (1.0 - inner) / target;
      L.hi = 1.0 + inner;
    } else if (opt.checked && L.n <= opt.dense_ceiling) {
      const auto [lo, hi] = detail::dense_preconditioned_spectrum(chain, i);
      L.lo = lo * (1.0 - 1e-9);
      L.hi = hi * (1.0 + 1e-9);
      L.interval_exact = true;
    } else {
      const auto [lo, hi] = detail::lanczos_preconditioned_spectrum(
          chain, i, std::min(opt.lanczos_steps, L.n), derive_seed(derive_seed(opt.seed, i), 4));
      L.lo = lo / 1.5;
      L.hi = hi * 1.1;
    }
    if (!(L.lo > 0.0) || !(L.hi > L.lo)) {
      L.lo = std::max(L.lo, 1e-12);
      L.hi = std::max(L.hi, 2.0 * L.lo);
    }
    L.contraction = detail::chebyshev_contraction(L.degree, L.lo, L.hi);
  }
  return chain;
}

struct LevelReport {
  std::size_t n = 0, m = 0;
  std::optional<double> kappa;
  std::optional<double> lambda_min, lambda_max;  // sparsifier pencil (B_i, A_i) when verified
  std::size_t degree = 0;
  double lo = 0.0, hi = 0.0, contraction = 0.0;
  bool interval_exact = false;
  std::size_t q = 0, tree_edges = 0, extra_edges = 0;
  bool rescaled = false, fallback = false;
};

struct SolveReport {
  std::vector<LevelReport> levels;
  std::string schedule;
  std::size_t outer_iters = 0;
  std::size_t matvecs = 0;      // multiplies at every level, outer loop included
  std::size_t matvec_work = 0;  // edges touched by them
  double wall_ms = 0.0;
  std::size_t rounds = 0;
  bool lifted = false;          // solved through the 2n Laplacian lift
  double bottom_jitter = 0.0;
  std::vector<double> residual_history;  // sqrt(r^T z / b^T z) per outer iteration
  std::vector<std::string> warnings;
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

inline std::vector<LevelReport> chain_profile(const PreconditionerChain& chain) {
  std::vector<LevelReport> out;
  for (std::size_t i = 0; i < chain.levels.size(); ++i) {
    const auto& L = chain.levels[i];
    LevelReport r;
    r.n = L.n;
    r.m = L.m;
    if (i + 1 < chain.levels.size()) {
      r.kappa = L.kappa;
      r.lambda_min = L.sparsify.lambda_min;
      r.lambda_max = L.sparsify.lambda_max;
      r.degree = L.degree;
      r.lo = L.lo;
      r.hi = L.hi;
      r.contraction = L.contraction;
      r.interval_exact = L.interval_exact;
      r.q = L.sparsify.q;
      r.tree_edges = L.tree_edges;
      r.extra_edges = L.extra_edges;
      r.rescaled = L.sparsify.rescaled;
      r.fallback = L.sparsify.fallback;
    }
    out.push_back(r);
  }
  return out;
}

// Solves L_g x = b (b projected per component) to relative A-norm error epsilon.
inline SolveResult laplacian_solve(const WeightedMultigraph& g, std::span<const double> b, const SolveOptions& opt) {
  opt.validate();
  require(b.size() == g.num_vertices(), "right-hand side length " + std::to_string(b.size()) +
                                            " does not match dimension " + std::to_string(g.num_vertices()));
  const auto start = std::chrono::steady_clock::now();
  const PreconditionerChain chain = build_chain(g, opt);
  const ChainLevel& top = chain.levels.front();
  SolveResult out;
  SolveReport& rep = out.report;
  rep.levels = chain_profile(chain);
  rep.schedule = chain.schedule;
  rep.rounds = chain.rounds();
  rep.bottom_jitter = chain.bottom.jitter();
  rep.warnings = chain.warnings;

  WorkCounters work;
  Vector rhs(b.begin(), b.end());
  project_mean_zero(rhs, top.component, top.component_count);
  Vector x(top.n, 0.0), r = rhs;
  Vector z = level_solve(chain, 0, r, &work);
  const double rz0 = dot(r, z);
  const double eps1 = std::min(top.contraction, 0.95);
  const double tol2 = opt.epsilon * opt.epsilon * (1.0 - eps1) / (1.0 + eps1) * 0.25;
  LevelCounters outer;
  if (rz0 > 0.0) {
    Vector p = z;
    double rz = rz0;
    for (;;) {
      if (rep.outer_iters >= opt.max_outer_iterations) {
        std::ostringstream msg;
        msg << "outer iteration cap " << opt.max_outer_iterations << " reached; last residual ratios:";
        const std::size_t from = rep.residual_history.size() > 5 ? rep.residual_history.size() - 5 : 0;
        for (std::size_t k = from; k < rep.residual_history.size(); ++k) msg << " " << rep.residual_history[k];
        throw AlgorithmError(msg.str());
      }
      ++rep.outer_iters;
      if (opt.outer == OuterMethod::Cg) {
        const Vector Ap = detail::multiply(top, p, &outer);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) break;
        const double alpha = rz / pAp;
        detail::axpy(alpha, p, x);
        detail::axpy(-alpha, Ap, r);
        z = level_solve(chain, 0, r, &work);
        const double rz_next = dot(r, z);
        rep.residual_history.push_back(std::sqrt(std::max(0.0, rz_next / rz0)));
        if (rz_next <= tol2 * rz0) break;
        const double beta = rz_next / rz;
        for (std::size_t k = 0; k < top.n; ++k) p[k] = z[k] + beta * p[k];
        rz = rz_next;
      } else {
        detail::axpy(1.0, z, x);
        const Vector Ax = detail::multiply(top, x, &outer);
        for (std::size_t k = 0; k < top.n; ++k) r[k] = rhs[k] - Ax[k];
        z = level_solve(chain, 0, r, &work);
        const double rz_next = dot(r, z);
        rep.residual_history.push_back(std::sqrt(std::max(0.0, rz_next / rz0)));
        if (rz_next <= tol2 * rz0) break;
      }
    }
  }
  project_mean_zero(x, top.component, top.component_count);
  out.x = std::move(x);
  rep.matvecs = work.total_matvecs() + outer.matvecs;
  rep.matvec_work = work.total_work() + outer.matvec_work;
  rep.wall_ms = opt.deterministic
                    ? 0.0
                    : std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// Solves A x = b for SDD A: Laplacians directly, anything else through the
// 2n lift.
inline SolveResult sdd_solve(const SddMatrix& A, std::span<const double> b, const SolveOptions& opt) {
  require(b.size() == A.dim(), "right-hand side length " + std::to_string(b.size()) + " does not match dimension " +
                                   std::to_string(A.dim()));
  if (A.is_laplacian()) return laplacian_solve(A.laplacian_graph(), b, opt);
  const auto start = std::chrono::steady_clock::now();
  const GrembanLift lift = sdd_to_laplacian(A, b);
  SolveResult inner = laplacian_solve(lift.graph, lift.rhs, opt);
  SolveResult out;
  out.x = lift.back(inner.x);
  out.report = std::move(inner.report);
  out.report.lifted = true;
  out.report.wall_ms = opt.deterministic
                           ? 0.0
                           : std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace laplax
