#pragma once

// The laplax command line: partition, lowstretch, solve, verify, bench.
// Exit codes: 0 success, 1 bad input or usage, 2 algorithmic failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <laplax/laplax.hpp>

namespace laplax::cli {

using Json = nlohmann::ordered_json;

struct PartitionArgs {
  std::string input;
  std::size_t rho = 0;
  std::uint64_t seed = 0;
  std::string classes = "2";
  double c1 = 272.0;
  std::size_t max_retries = 64;
  std::string output, report;
};

struct LowStretchArgs {
  std::string input;
  std::string mode = "subgraph";
  std::size_t lambda = 2;
  std::optional<double> beta;
  double z = 32.0;
  std::size_t tau = 3;
  std::uint64_t seed = 0;
  std::string output, report;
};

struct SolveArgs {
  std::string matrix, rhs;
  double eps = 1e-8;
  std::string schedule = "uniform:25";
  std::uint64_t seed = 0;
  std::string outer = "cg";
  bool unchecked = false;
  double c_is = 0.002;
  std::size_t lambda = 16;
  std::size_t max_levels = 16;
  std::size_t bottom_floor = 64;
  std::string output, report;
};

struct VerifyArgs {
  std::string input, other, matrix, rhs;
  double kappa = 10.0;
  double eps = 1e-8;
  std::string schedule = "uniform:25";
  std::uint64_t seed = 0;
  std::string report;
};

struct BenchArgs {
  std::string family = "grid";
  std::vector<std::size_t> sizes{100};
  std::vector<std::size_t> rhos{8};
  std::vector<std::size_t> jitters;  // R values; empty = schedule default
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::size_t lambda = 2;
  std::optional<double> beta;
  std::optional<double> kappa;  // adds a chain profile column
  std::string output;
};

namespace detail {

// Output stream for a path, or the fallback when the path is empty.
class Sink {
public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError("cannot write " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

inline void emit(const Json& j, const std::string& path, std::ostream& out) {
  Sink s(path, out);
  *s << j.dump(2) << '\n';
}

inline Json class_map(const std::map<int, std::size_t>& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

inline Json class_map(const std::map<int, double>& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

// A number gives z; anything else is a file with one class index per edge
// (0 puts the edge in the generic bucket).
inline EdgeClassedGraph load_classes(const WeightedMultigraph& g, const std::string& spec) {
  std::size_t used = 0;
  double z = 0.0;
  bool numeric = false;
  try {
    z = std::stod(spec, &used);
    numeric = used == spec.size();
  } catch (const std::exception&) {
  }
  if (numeric) return weight_classes(g, z);
  std::ifstream in(spec);
  if (!in) throw InputError("cannot open " + spec);
  EdgeClassedGraph cg;
  cg.base = g;
  cg.z = 0.0;
  long long cls = 0;
  std::size_t k = 0;
  while (in >> cls) {
    if (k >= g.num_edges()) throw InputError(spec + ": more class entries than edges");
    if (cls < 0) throw InputError(spec + ": negative class index");
    if (cls == 0)
      cg.generic.push_back(g.edge(k).id);
    else
      cg.classes[static_cast<int>(cls)].push_back(g.edge(k).id);
    ++k;
  }
  if (!in.eof()) throw InputError(spec + ": expected integer class indices");
  if (k != g.num_edges())
    throw InputError(spec + ": " + std::to_string(k) + " class entries for " + std::to_string(g.num_edges()) + " edges");
  return cg;
}

inline Json report_json(const SolveReport& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    Json j;
    j["n"] = l.n;
    j["m"] = l.m;
    j["kappa"] = l.kappa ? Json(*l.kappa) : Json(nullptr);
    if (l.lambda_min) j["lambda_min"] = *l.lambda_min;
    if (l.lambda_max) j["lambda_max"] = *l.lambda_max;
    if (l.kappa) {
      j["degree"] = l.degree;
      j["interval"] = {l.lo, l.hi};
      j["interval_exact"] = l.interval_exact;
      j["contraction"] = l.contraction;
      j["q"] = l.q;
      j["tree_edges"] = l.tree_edges;
      j["extra_edges"] = l.extra_edges;
      j["rescaled"] = l.rescaled;
      j["fallback"] = l.fallback;
    }
    levels.push_back(std::move(j));
  }
  Json j;
  j["levels"] = std::move(levels);
  j["outer_iters"] = r.outer_iters;
  j["matvecs"] = r.matvecs;
  j["matvec_work"] = r.matvec_work;
  j["wall_ms"] = r.wall_ms;
  j["rounds"] = r.rounds;
  j["schedule"] = r.schedule;
  j["lifted"] = r.lifted;
  j["bottom_jitter"] = r.bottom_jitter;
  j["residual_history"] = r.residual_history;
  j["warnings"] = r.warnings;
  return j;
}

inline SolveOptions solve_options(const SolveArgs& a, bool deterministic) {
  SolveOptions o;
  o.epsilon = a.eps;
  o.schedule = KappaSchedule::parse(a.schedule);
  o.seed = a.seed;
  o.checked = !a.unchecked;
  o.c_is = a.c_is;
  o.low_stretch.lambda = a.lambda;
  o.max_levels = a.max_levels;
  o.bottom_floor = a.bottom_floor;
  if (a.outer == "cg")
    o.outer = OuterMethod::Cg;
  else if (a.outer == "refinement")
    o.outer = OuterMethod::Refinement;
  else
    throw InputError("--outer must be cg or refinement");
  o.deterministic = deterministic;
  return o;
}

inline WeightedMultigraph bench_instance(const std::string& family, std::size_t n, std::uint64_t seed) {
  if (family == "grid") {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    return gen::grid(std::max<std::size_t>(side, 1), std::max<std::size_t>(side, 1));
  }
  if (family == "random") return gen::random_connected(std::max<std::size_t>(n, 1), n, seed);
  if (family == "geometric")
    return gen::geometric(n, std::sqrt(8.0 / (3.14159265358979 * static_cast<double>(std::max<std::size_t>(n, 1)))), seed);
  if (family == "cycle") return n >= 3 ? gen::cycle(n) : gen::path(n);
  throw InputError("unknown family '" + family + "' (grid, random, geometric, cycle)");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph decomposition, low-stretch subgraphs and SDD solves"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_config("--config", "", "TOML file with option values (command-line flags win)");
  std::string write_config;
  app.add_option("--write-config", write_config, "Write the options that were set (flags and config file) as TOML to this path")
      ->configurable(false);
  int threads = 0;
  bool deterministic = false;
  app.add_option("--threads", threads, "Worker threads (default: LAPLAX_THREADS or 1)")->check(CLI::NonNegativeNumber);
  app.add_flag("--deterministic", deterministic, "Reproducible output: fixed reduction order, wall_ms reported as 0");

  PartitionArgs pa;
  auto* part = app.add_subcommand("partition", "Low-diameter decomposition of an edge list");
  part->add_option("--input", pa.input, "Edge list 'u v w'")->required();
  part->add_option("--rho", pa.rho, "Strong radius bound")->required();
  part->add_option("--seed", pa.seed, "Random seed");
  part->add_option("--classes", pa.classes, "Weight-class base z, or a file with one class per edge");
  part->add_option("--c1", pa.c1, "Cut audit constant");
  part->add_option("--max-retries", pa.max_retries, "Restarts before giving up");
  part->add_option("--output", pa.output, "Component id per vertex (default stdout)");
  part->add_option("--report", pa.report, "Audit JSON (default stdout)");

  LowStretchArgs la;
  auto* low = app.add_subcommand("lowstretch", "Low-stretch spanning tree or ultra-sparse subgraph");
  low->add_option("--input", la.input, "Edge list 'u v w' (weights are lengths)")->required();
  low->add_option("--mode", la.mode, "tree | sparse | subgraph")->check(CLI::IsMember({"tree", "sparse", "subgraph"}));
  low->add_option("--lambda", la.lambda, "Iterations an edge class may stay uncontracted");
  low->add_option("--beta", la.beta, "Sparsity parameter (default 2 log^3 n)");
  low->add_option("--z", la.z, "Weight-class base");
  low->add_option("--tau", la.tau, "Class window");
  low->add_option("--seed", la.seed, "Random seed");
  low->add_option("--output", la.output, "Subgraph edge list (default stdout)");
  low->add_option("--report", la.report, "Stretch JSON (default stdout)");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve A x = b for symmetric diagonally dominant A");
  solve->add_option("--matrix", sa.matrix, "Matrix Market file")->required();
  solve->add_option("--rhs", sa.rhs, "Right-hand side, one value per line")->required();
  solve->add_option("--eps", sa.eps, "Relative A-norm error target");
  solve->add_option("--schedule", sa.schedule, "uniform:K | geometric:LAMBDA[,C4[,L]] | explicit:K1,K2,...");
  solve->add_option("--seed", sa.seed, "Random seed");
  solve->add_option("--outer", sa.outer, "cg | refinement")->check(CLI::IsMember({"cg", "refinement"}));
  solve->add_flag("--unchecked", sa.unchecked, "Skip dense verification of small levels");
  solve->add_option("--c-is", sa.c_is, "Sampling constant inside the chain");
  solve->add_option("--lambda", sa.lambda, "Low-stretch lambda inside the chain");
  solve->add_option("--max-levels", sa.max_levels, "Chain length cap");
  solve->add_option("--bottom-floor", sa.bottom_floor, "Factor densely at or below this size");
  solve->add_option("--output", sa.output, "Solution vector path");
  solve->add_option("--report", sa.report, "Report JSON (default stdout)");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check a result against the dense oracles");
  verify->require_subcommand(1);
  auto* v_sandwich = verify->add_subcommand("sandwich", "Pencil bounds of (H, G); builds H when --other is absent");
  v_sandwich->add_option("--input", va.input, "Edge list of G (conductances)")->required();
  v_sandwich->add_option("--other", va.other, "Edge list of H");
  v_sandwich->add_option("--kappa", va.kappa, "Upper bound to check");
  v_sandwich->add_option("--seed", va.seed, "Seed when building H");
  v_sandwich->add_option("--report", va.report, "JSON output (default stdout)");
  auto* v_stretch = verify->add_subcommand("stretch", "Total stretch against all-pairs shortest paths");
  v_stretch->add_option("--input", va.input, "Edge list of G (lengths)")->required();
  v_stretch->add_option("--other", va.other, "Subgraph edge list; a low-stretch tree is built when absent");
  v_stretch->add_option("--seed", va.seed, "Seed when building the tree");
  v_stretch->add_option("--report", va.report, "JSON output (default stdout)");
  auto* v_solve = verify->add_subcommand("solve", "Solver error against the dense pseudoinverse");
  v_solve->add_option("--input,--matrix", va.matrix, "Matrix Market file")->required();
  v_solve->add_option("--rhs", va.rhs, "Right-hand side")->required();
  v_solve->add_option("--eps", va.eps, "Relative A-norm error target");
  v_solve->add_option("--schedule", va.schedule, "Kappa schedule");
  v_solve->add_option("--seed", va.seed, "Random seed");
  v_solve->add_option("--report", va.report, "JSON output (default stdout)");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Parameter sweep, one CSV row per instance and seed");
  bench->add_option("--family", ba.family, "grid | random | geometric | cycle")
      ->check(CLI::IsMember({"grid", "random", "geometric", "cycle"}));
  bench->add_option("--n", ba.sizes, "Vertex counts")->delimiter(',');
  bench->add_option("--rho", ba.rhos, "Radius bounds")->delimiter(',');
  bench->add_option("--R", ba.jitters, "Jitter ranges for the fixed-density cut experiment")->delimiter(',');
  bench->add_option("--seeds", ba.seeds, "Seeds per instance");
  bench->add_option("--seed", ba.seed, "Base seed");
  bench->add_option("--lambda", ba.lambda, "Low-stretch lambda");
  bench->add_option("--beta", ba.beta, "Low-stretch beta");
  bench->add_option("--kappa", ba.kappa, "Also build a Uniform{kappa} chain and profile it");
  bench->add_option("--output", ba.output, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return 1;
  }

  try {
    ThreadScope scope(threads > 0 ? threads : num_threads());
    if (!write_config.empty()) {
      detail::Sink s(write_config, out);
      *s << app.config_to_str(false, false);
    }

    if (*part) {
      require(pa.rho >= 1, "--rho must be at least 1");
      const WeightedMultigraph g = read_edge_list(pa.input);
      const EdgeClassedGraph cg = detail::load_classes(g, pa.classes);
      SplitParams sp;
      sp.rho = pa.rho;
      sp.seed = pa.seed;
      sp.c1 = pa.c1;
      PartitionOptions po;
      po.c1 = pa.c1;
      po.max_retries = pa.max_retries;
      const Decomposition d = partition(cg, sp, po);
      {
        detail::Sink s(pa.output, out);
        for (Vertex c : d.assignment) *s << c << '\n';
      }
      Json j;
      j["per_class_cut"] = detail::class_map(d.per_class_cut);
      j["per_class_allowed"] = detail::class_map(d.per_class_allowed);
      j["retries"] = d.retries;
      j["rounds"] = d.rounds;
      j["bfs_levels"] = d.bfs_levels;
      j["components"] = d.centers.size();
      detail::emit(j, pa.report, out);
      return 0;
    }

    if (*low) {
      const WeightedMultigraph g = read_edge_list(la.input);
      AkpwParams p;
      p.lambda = la.lambda;
      p.beta = la.beta;
      p.z = la.z;
      p.tau = la.tau;
      StretchSubgraph s = la.mode == "tree"     ? akpw(g, p, la.seed)
                          : la.mode == "sparse" ? sparse_akpw(g, p, la.seed)
                                                : ls_subgraph(g, p, la.seed);
      const StretchReport rep = audit_stretch(g, s);
      {
        detail::Sink o(la.output, out);
        write_edge_list(*o, materialize(g, s));
      }
      Json j;
      j["total_stretch"] = rep.total;
      j["tree_edges"] = s.tree_eids.size();
      j["extra_edges"] = s.extra_eids.size();
      j["removed_edges"] = s.removed_eids.size();
      j["per_class_stretch"] = detail::class_map(s.stats.per_class_stretch);
      j["iterations"] = s.stats.iterations;
      j["rounds"] = s.stats.rounds;
      j["retries"] = s.stats.retries;
      j["spread"] = s.stats.spread;
      j["deviations"] = s.stats.deviations;
      detail::emit(j, la.report, out);
      return 0;
    }

    if (*solve) {
      const SddMatrix A = read_matrix_market(sa.matrix);
      const Vector b = read_vector(sa.rhs);
      const SolveResult r = sdd_solve(A, b, detail::solve_options(sa, deterministic));
      if (!sa.output.empty()) {
        detail::Sink o(sa.output, out);
        write_vector(*o, r.x);
      }
      detail::emit(detail::report_json(r.report), sa.report, out);
      return 0;
    }

    if (*verify) {
      if (*v_sandwich) {
        const WeightedMultigraph g = read_edge_list(va.input);
        WeightedMultigraph h;
        if (!va.other.empty()) {
          std::ifstream in(va.other);
          if (!in) throw InputError("cannot open " + va.other);
          h = parse_edge_list(in, g.num_vertices());
        } else {
          const auto sub = ls_subgraph(reciprocal_weights(g), AkpwParams{}, va.seed);
          SparsifyParams sp;
          sp.kappa = va.kappa;
          sp.seed = va.seed;
          sp.checked = false;
          h = incremental_sparsify(g, sub, sp).graph;
        }
        require(h.num_vertices() == g.num_vertices(), "H and G have different vertex counts");
        const auto bounds =
            oracle::pencil_bounds(Laplacian::from_graph(h).matrix(), Laplacian::from_graph(g).matrix());
        const bool holds = bounds.lambda_min >= 1.0 - 1e-9 && bounds.lambda_max <= va.kappa * (1.0 + 1e-9);
        Json j;
        j["lambda_min"] = bounds.lambda_min;
        j["lambda_max"] = bounds.lambda_max;
        j["kappa"] = va.kappa;
        j["holds"] = holds;
        detail::emit(j, va.report, out);
        return holds ? 0 : 2;
      }
      if (*v_stretch) {
        const WeightedMultigraph g = read_edge_list(va.input);
        WeightedMultigraph h;
        if (!va.other.empty()) {
          std::ifstream in(va.other);
          if (!in) throw InputError("cannot open " + va.other);
          h = parse_edge_list(in, g.num_vertices());
        } else {
          h = materialize(g, akpw(g, AkpwParams{}, va.seed));
        }
        require(h.num_vertices() == g.num_vertices(), "subgraph has more vertices than the graph");
        const double fast = total_stretch(g, h).total;
        const double brute = oracle::brute_total_stretch(g, h);
        const double rel = std::abs(fast - brute) / std::max(1.0, std::abs(brute));
        Json j;
        j["total_stretch"] = fast;
        j["oracle"] = brute;
        j["relative_difference"] = rel;
        j["holds"] = rel <= 1e-9;
        detail::emit(j, va.report, out);
        return rel <= 1e-9 ? 0 : 2;
      }
      if (*v_solve) {
        const SddMatrix A = read_matrix_market(va.matrix);
        const Vector b = read_vector(va.rhs);
        SolveArgs tmp;
        tmp.eps = va.eps;
        tmp.schedule = va.schedule;
        tmp.seed = va.seed;
        const SolveResult r = sdd_solve(A, b, detail::solve_options(tmp, deterministic));
        const Vector xs = A.is_laplacian() ? oracle::dense_pinv_solve(A.matrix(), b)
                                           : oracle::dense_psd_pinv_solve(A.matrix(), b);
        Vector e(xs.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = r.x[i] - xs[i];
        const double ref = a_norm(A.matrix(), xs);
        const double rel = ref > 0.0 ? a_norm(A.matrix(), e) / ref : a_norm(A.matrix(), e);
        Json j;
        j["relative_error"] = rel;
        j["eps"] = va.eps;
        j["holds"] = rel <= va.eps;
        j["outer_iters"] = r.report.outer_iters;
        detail::emit(j, va.report, out);
        return rel <= va.eps ? 0 : 2;
      }
    }

    if (*bench) {
      detail::Sink o(ba.output, out);
      std::ostream& csv = *o;
      csv.precision(10);
      csv << "family,n,m,rho,R,beta,lambda,kappa,seed,cut_fraction_per_class,jitter_cut_fraction,radius_audit,"
             "total_stretch,rounds,retries,chain_profile\n";
      const std::vector<std::size_t> jitters = ba.jitters.empty() ? std::vector<std::size_t>{0} : ba.jitters;
      for (std::size_t n : ba.sizes)
        for (std::size_t rho : ba.rhos)
          for (std::size_t R : jitters)
            for (std::size_t k = 0; k < ba.seeds; ++k) {
              require(rho >= 1, "--rho values must be at least 1");
              const std::uint64_t seed = derive_seed(ba.seed, k);
              const WeightedMultigraph g = detail::bench_instance(ba.family, n, seed);
              const EdgeClassedGraph cg = weight_classes(g, 2.0);
              SplitParams sp;
              sp.rho = rho;
              sp.seed = seed;
              if (R > 0) {
                sp.R = std::min(R, rho);
                sp.T = std::max<std::size_t>(1, rho / *sp.R);
              }
              const Decomposition d = partition(cg, sp);
              std::string fractions;
              for (const auto& [cls, cut] : d.per_class_cut) {
                const std::size_t size = cls == 0 ? cg.generic.size() : cg.classes.at(cls).size();
                std::ostringstream f;
                f.precision(6);
                f << cls << ':' << (size ? static_cast<double>(cut) / static_cast<double>(size) : 0.0);
                fractions += (fractions.empty() ? "" : "|") + f.str();
              }
              const auto radii = oracle::strong_radii(g, d);
              const bool radius_ok = std::all_of(radii.begin(), radii.end(), [&](std::size_t r) { return r <= rho; });
              const double jitter_cut =
                  R > 0 && g.num_vertices() > 0
                      ? sample_jittered_cut_fraction(g, R, std::max<std::size_t>(1, g.num_vertices() / (2 * R)), seed)
                      : 0.0;
              AkpwParams ap;
              ap.lambda = ba.lambda;
              ap.beta = ba.beta;
              StretchSubgraph tree = akpw(g, ap, seed);
              const double stretch = audit_stretch(g, tree).total;
              std::string profile;
              if (ba.kappa) {
                SolveOptions so;
                so.schedule = KappaSchedule::uniform(*ba.kappa);
                so.seed = seed;
                const PreconditionerChain chain = build_chain(g, so);
                for (const auto& L : chain.levels)
                  profile += (profile.empty() ? "" : "/") + std::to_string(L.n) + ":" + std::to_string(L.m);
              }
              csv << ba.family << ',' << g.num_vertices() << ',' << g.num_edges() << ',' << rho << ',' << R << ','
                  << (ba.beta ? *ba.beta : 0.0) << ',' << ba.lambda << ',' << (ba.kappa ? *ba.kappa : 0.0) << ','
                  << seed << ',' << fractions << ',' << jitter_cut << ',' << (radius_ok ? "pass" : "fail") << ','
                  << stretch << ',' << d.rounds + tree.stats.rounds << ',' << d.retries + tree.stats.retries << ','
                  << profile << '\n';
            }
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

// Same as above for an argument list without the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"laplax"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace laplax::cli
