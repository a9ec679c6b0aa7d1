// Command-line front end: node generation, assembly, consistency and
// stability reports, certificates, and one-command reproduction of the
// canonical experiment tables.
//
// Exit codes: 0 success, 2 input error, 3 numerical failure.  Timings go to
// stderr so stdout stays byte-diffable.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "meshcert/certify.hpp"
#include "meshcert/consistency.hpp"
#include "meshcert/error.hpp"
#include "meshcert/functionals.hpp"
#include "meshcert/geometry.hpp"
#include "meshcert/kernels.hpp"
#include "meshcert/linalg.hpp"
#include "meshcert/stability.hpp"
#include "meshcert/stencils.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::size_t default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<std::size_t>(hc);
}

// Commands accept either a node CSV (--nodes) or an inline uniform grid
// (--h); exactly one of the two.
meshcert::NodeSet load_nodes(const std::string& path, double h) {
  if (!path.empty() && h > 0.0) {
    meshcert::fail(meshcert::errc::bad_input,
                   "give --nodes or --h, not both");
  }
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) {
      meshcert::fail(meshcert::errc::bad_input,
                     "cannot open node file: " + path);
    }
    return meshcert::read_nodes_csv(in);
  }
  if (h > 0.0) return meshcert::gen_grid(h);
  meshcert::fail(meshcert::errc::bad_input,
                 "need a node source: --nodes <csv> or --h <spacing>");
}

// stdout unless --out names a file.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) {
      meshcert::fail(meshcert::errc::bad_input,
                     "cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct SystemOptions {
  std::string nodes_path;
  double h = 0.0;
  std::string kernel;
  std::string method;
  std::size_t threads = default_threads();
  std::string out_path;
};

void add_system_options(CLI::App* cmd, SystemOptions* opt) {
  cmd->add_option("--nodes", opt->nodes_path,
                  "node set CSV (see `nodes gen`)");
  cmd->add_option("--h", opt->h, "spacing for an inline uniform grid");
  cmd->add_option("--kernel", opt->kernel,
                  "kernel spec: wm:m=<v>,d=<v> | ph:m=<v>,d=<v>")
      ->required();
  cmd->add_option("--method", opt->method,
                  "stencil method: fivepoint | optimal:n=<v> | basic:n=<v> | "
                  "greedy:n=<v>")
      ->required();
  cmd->add_option("--threads", opt->threads, "assembly threads")
      ->capture_default_str();
  cmd->add_option("--out", opt->out_path, "output file (default stdout)");
}

std::pair<meshcert::StiffnessSystem, meshcert::Kernel> build_system(
    const SystemOptions& opt, const char* tag) {
  const meshcert::Kernel kernel = meshcert::parse_kernel_spec(opt.kernel);
  const meshcert::MethodSpec method = meshcert::parse_method_spec(opt.method);
  const meshcert::NodeSet nodes = load_nodes(opt.nodes_path, opt.h);
  const auto t0 = clock_type::now();
  meshcert::StiffnessSystem sys =
      meshcert::assemble(nodes, kernel, method, opt.threads);
  std::fprintf(stderr, "[%s] assembled M=%zu nnz=%zu in %.2fs\n", tag,
               sys.nodes.size(), sys.A.nnz(), seconds_since(t0));
  return {std::move(sys), kernel};
}

void emit_table_row(std::ostream& out, std::size_t M, double h, double cs,
                    double c_inf) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%.8e,%.8e,%.8e,%.8e\n", M, h, cs, c_inf,
                cs * c_inf);
  out << buf;
}

struct LevelStats {
  std::size_t M = 0;
  double cs = 0.0;
  double c_inf = 0.0;
};

// One table row: assemble, take the consistency sup-norm, estimate the
// stability constant (of A, or of the interior Dirichlet block B).
LevelStats run_level(const meshcert::NodeSet& nodes, const meshcert::Kernel& K,
                     const meshcert::MethodSpec& method, bool interior_block,
                     std::size_t threads, const std::string& tag,
                     double level) {
  const auto t0 = clock_type::now();
  const meshcert::StiffnessSystem sys =
      meshcert::assemble(nodes, K, method, threads);
  const double t_asm = seconds_since(t0);

  const auto t1 = clock_type::now();
  const meshcert::ConsistencyVector c =
      meshcert::consistency_vector(K, sys.stencils);
  const double t_con = seconds_since(t1);

  const auto t2 = clock_type::now();
  const double cs =
      interior_block
          ? meshcert::stability_condest(meshcert::dirichlet_split(sys).B).value
          : meshcert::stability_condest(sys.A).value;
  const double t_stab = seconds_since(t2);

  double support = 0.0;
  std::size_t interior = 0;
  for (std::size_t i = 0; i < sys.stencils.size(); ++i) {
    if (sys.nodes.boundary[i]) continue;
    support += static_cast<double>(sys.stencils[i].points.size());
    ++interior;
  }
  std::fprintf(stderr,
               "[reproduce %s] level=%g M=%zu assemble=%.2fs "
               "consistency=%.2fs stability=%.2fs avg_support=%.1f\n",
               tag.c_str(), level, nodes.size(), t_asm, t_con, t_stab,
               interior == 0 ? 0.0 : support / static_cast<double>(interior));

  return {nodes.size(), cs, meshcert::norm_inf(c.values)};
}

void reproduce_corner(std::ostream& out) {
  const meshcert::Kernel ph42 = meshcert::ph_kernel(4, 2);
  out << "label,nodes,c_value\n";
  char buf[96];

  const meshcert::Stencil star = meshcert::five_point_star(1.0);
  const double q_star =
      std::sqrt(meshcert::quadratic_form(ph42, star.functional, star));
  std::snprintf(buf, sizeof buf, "fivepoint,%zu,%.8e\n", star.points.size(),
                q_star);
  out << buf;

  // Boxes {-1..K}^2 around an anchor one layer inside the corner of a unit
  // lattice; the optimal stencil may use every node of the box.
  const meshcert::Functional lap{{0.0, 0.0}, meshcert::Operator::laplacian};
  for (int box : {3, 5, 7, 9, 11, 13}) {
    std::vector<meshcert::Point> nodes;
    for (int j = -1; j <= box; ++j) {
      for (int i = -1; i <= box; ++i) {
        nodes.push_back(
            {static_cast<double>(i), static_cast<double>(j)});
      }
    }
    const auto t0 = clock_type::now();
    const meshcert::Stencil s = meshcert::optimal_weights(ph42, lap, nodes);
    const double q = std::sqrt(meshcert::quadratic_form(ph42, lap, s));
    std::fprintf(stderr, "[reproduce corner] box=%d nodes=%zu solve=%.2fs\n",
                 box, nodes.size(), seconds_since(t0));
    std::snprintf(buf, sizeof buf, "box-%d,%zu,%.8e\n", box, nodes.size(), q);
    out << buf;
  }
}

void reproduce_worstcase(std::size_t threads, std::ostream& out) {
  const double h = 0.0625;
  const double K_target = 2.0;
  const meshcert::Kernel wm42 = meshcert::wm_kernel(4, 2);
  const auto t0 = clock_type::now();
  const meshcert::StiffnessSystem sys =
      meshcert::assemble(meshcert::gen_grid(h), wm42,
                         {meshcert::MethodSpec::Kind::fivepoint, 0}, threads);
  const meshcert::WorstCase wc = meshcert::worst_case(sys, wm42, K_target);
  std::fprintf(stderr, "[reproduce worstcase] M=%zu total=%.2fs\n",
               sys.nodes.size(), seconds_since(t0));
  out << "M,h,K,error,upper,rel_error,rel_upper\n";
  char buf[224];
  std::snprintf(buf, sizeof buf, "%zu,%.8e,%.8e,%.8e,%.8e,%.8e,%.8e\n",
                sys.nodes.size(), h, K_target, wc.error, wc.upper,
                wc.error / wc.u_star_native_norm,
                wc.upper / wc.u_star_native_norm);
  out << buf;
}

void reproduce_table(const std::string& id, std::uint64_t seed,
                     std::size_t threads, std::ostream& out) {
  using Kind = meshcert::MethodSpec::Kind;

  if (id == "fivepoint-full" || id == "fivepoint-interior") {
    const meshcert::Kernel wm42 = meshcert::wm_kernel(4, 2);
    out << "M,h,C_S,c_inf,product\n";
    for (double h : {0.5, 0.25, 0.125, 0.0625}) {
      const LevelStats r =
          run_level(meshcert::gen_grid(h), wm42, {Kind::fivepoint, 0},
                    id == "fivepoint-interior", threads, id, h);
      emit_table_row(out, r.M, h, r.cs, r.c_inf);
    }
    return;
  }

  if (id == "ph30" || id == "ph25" || id == "basic25" || id == "greedy30") {
    const meshcert::Kernel ph62 = meshcert::ph_kernel(6, 2);
    meshcert::MethodSpec method{Kind::optimal, 30};
    if (id == "ph25") method = {Kind::optimal, 25};
    if (id == "basic25") method = {Kind::basic, 25};
    if (id == "greedy30") method = {Kind::greedy, 30};
    // These tables report the stability constant of the interior Dirichlet
    // block B, one refinement level deeper than the five-point tables.
    out << "M,h,C_S,c_inf,product\n";
    for (double h : {0.25, 0.125, 0.0625, 0.03125}) {
      const meshcert::NodeSet nodes =
          meshcert::gen_perturbed_grid(h, h / 4.0, seed);
      const LevelStats r = run_level(nodes, ph62, method, true, threads, id, h);
      emit_table_row(out, r.M, h, r.cs, r.c_inf);
    }
    return;
  }

  if (id == "chebyshev") {
    const meshcert::Kernel ph62 = meshcert::ph_kernel(6, 2);
    out << "M,h,C_S,c_inf,product\n";
    for (std::size_t n : {std::size_t{9}, std::size_t{17}, std::size_t{33},
                          std::size_t{65}}) {
      const meshcert::NodeSet nodes = meshcert::gen_chebyshev(n, 0.01, seed);
      const LevelStats r =
          run_level(nodes, ph62, {Kind::greedy, 30}, true, threads, id,
                    static_cast<double>(n));
      emit_table_row(out, r.M, 2.0 / static_cast<double>(n - 1), r.cs,
                     r.c_inf);
    }
    return;
  }

  if (id == "worstcase") {
    reproduce_worstcase(threads, out);
    return;
  }
  if (id == "corner") {
    reproduce_corner(out);
    return;
  }

  meshcert::fail(meshcert::errc::bad_input,
                 "unknown table id: " + id +
                     " (expected fivepoint-full, fivepoint-interior, ph30, "
                     "ph25, basic25, greedy30, chebyshev, worstcase, corner)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"worst-case error certification for nodal meshless "
               "discretizations"};
  // The default help flag claims "-h", which collides with the --h spacing
  // option; subcommands inherit whatever is set here.
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  // nodes gen
  CLI::App* nodes_cmd = app.add_subcommand("nodes", "node set utilities");
  nodes_cmd->require_subcommand(1);
  CLI::App* gen = nodes_cmd->add_subcommand("gen", "generate a node set CSV");
  std::string gen_kind = "uniform";
  double gen_h = 0.0;
  double gen_amp = -1.0;
  double gen_noise = 0.01;
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 20150814;
  std::string gen_out;
  gen->add_option("--kind", gen_kind, "uniform | perturbed | chebyshev")
      ->check(CLI::IsMember({"uniform", "perturbed", "chebyshev"}))
      ->capture_default_str();
  gen->add_option("--h", gen_h, "grid spacing (uniform, perturbed)");
  gen->add_option("--amp", gen_amp,
                  "perturbation amplitude (perturbed; default h/4)");
  gen->add_option("--n", gen_n, "nodes per side (chebyshev)");
  gen->add_option("--noise", gen_noise, "jitter amplitude (chebyshev)")
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output file (default stdout)");
  gen->callback([&] {
    meshcert::NodeSet nodes;
    if (gen_kind == "uniform") {
      if (gen_h <= 0.0) {
        meshcert::fail(meshcert::errc::bad_input, "uniform grid needs --h");
      }
      nodes = meshcert::gen_grid(gen_h);
    } else if (gen_kind == "perturbed") {
      if (gen_h <= 0.0) {
        meshcert::fail(meshcert::errc::bad_input, "perturbed grid needs --h");
      }
      nodes = meshcert::gen_perturbed_grid(
          gen_h, gen_amp < 0.0 ? gen_h / 4.0 : gen_amp, gen_seed);
    } else {
      if (gen_n == 0) {
        meshcert::fail(meshcert::errc::bad_input, "chebyshev grid needs --n");
      }
      nodes = meshcert::gen_chebyshev(gen_n, gen_noise, gen_seed);
    }
    Output out(gen_out);
    meshcert::write_nodes_csv(nodes, out.stream());
  });

  // assemble
  CLI::App* assemble_cmd = app.add_subcommand(
      "assemble", "assemble the stiffness matrix (MatrixMarket)");
  SystemOptions assemble_opt;
  add_system_options(assemble_cmd, &assemble_opt);
  assemble_cmd->callback([&] {
    auto [sys, kernel] = build_system(assemble_opt, "assemble");
    (void)kernel;
    Output out(assemble_opt.out_path);
    meshcert::write_matrix_market(sys.A, out.stream());
  });

  // consistency
  CLI::App* consistency_cmd = app.add_subcommand(
      "consistency", "per-node consistency errors (CSV heatmap data)");
  SystemOptions consistency_opt;
  add_system_options(consistency_cmd, &consistency_opt);
  consistency_cmd->callback([&] {
    auto [sys, kernel] = build_system(consistency_opt, "consistency");
    const auto t0 = clock_type::now();
    const meshcert::ConsistencyVector c =
        meshcert::consistency_vector(kernel, sys.stencils);
    std::fprintf(stderr, "[consistency] %zu values in %.2fs\n",
                 c.values.size(), seconds_since(t0));
    std::vector<std::size_t> anchors(sys.nodes.size());
    std::iota(anchors.begin(), anchors.end(), std::size_t{0});
    Output out(consistency_opt.out_path);
    meshcert::write_consistency_field_csv(sys.nodes, anchors, c.values,
                                          out.stream());
  });

  // stability
  CLI::App* stability_cmd =
      app.add_subcommand("stability", "stability constant (JSON)");
  SystemOptions stability_opt;
  std::string stability_norm = "inf";
  bool stability_split = false;
  add_system_options(stability_cmd, &stability_opt);
  stability_cmd->add_option("--norm", stability_norm, "norm pair: inf | 2")
      ->check(CLI::IsMember({"inf", "2"}))
      ->capture_default_str();
  stability_cmd->add_flag("--split", stability_split,
                          "estimate the interior Dirichlet block B");
  stability_cmd->callback([&] {
    auto [sys, kernel] = build_system(stability_opt, "stability");
    (void)kernel;
    const meshcert::SparseMatrix& target =
        stability_split ? meshcert::dirichlet_split(sys).B : sys.A;
    const auto t0 = clock_type::now();
    const meshcert::StabilityEstimate est =
        stability_norm == "2" ? meshcert::stability_svd(target.to_dense())
                              : meshcert::stability_condest(target);
    std::fprintf(stderr, "[stability] %s in %.2fs\n", est.method.c_str(),
                 seconds_since(t0));
    nlohmann::json doc;
    doc["method"] = est.method;
    doc["norm"]["p"] = est.norm_p;
    doc["norm"]["q"] = est.norm_q;
    doc["value"] = est.value;
    Output out(stability_opt.out_path);
    out.stream() << doc.dump(2) << '\n';
  });

  // certify
  CLI::App* certify_cmd =
      app.add_subcommand("certify", "full error-bound certificate (JSON)");
  SystemOptions certify_opt;
  std::string certify_norm = "inf";
  double certify_K = 0.0;
  std::uint64_t certify_seed = 20150814;
  add_system_options(certify_cmd, &certify_opt);
  certify_cmd->add_option("--norm", certify_norm, "norm pair: inf | 2")
      ->check(CLI::IsMember({"inf", "2"}))
      ->capture_default_str();
  certify_cmd->add_option("--K", certify_K, "admissibility constant K >= 0")
      ->capture_default_str();
  certify_cmd->add_option("--seed", certify_seed, "seed recorded in the report")
      ->capture_default_str();
  certify_cmd->callback([&] {
    auto [sys, kernel] = build_system(certify_opt, "certify");
    const auto t0 = clock_type::now();
    meshcert::Certificate cert = meshcert::certify(
        sys, kernel, certify_K, certify_norm == "2" ? 2 : 0);
    cert.seed = certify_seed;
    std::fprintf(stderr, "[certify] bound=%g in %.2fs\n", cert.bound,
                 seconds_since(t0));
    Output out(certify_opt.out_path);
    meshcert::write_certificate_json(cert, out.stream());
  });

  // worstcase
  CLI::App* worst_cmd = app.add_subcommand(
      "worstcase", "sharp worst-case construction for K-admissible solvers");
  SystemOptions worst_opt;
  double worst_K = 2.0;
  add_system_options(worst_cmd, &worst_opt);
  worst_cmd->add_option("--K", worst_K, "admissibility constant K > 1")
      ->capture_default_str();
  worst_cmd->callback([&] {
    auto [sys, kernel] = build_system(worst_opt, "worstcase");
    const auto t0 = clock_type::now();
    const meshcert::WorstCase wc = meshcert::worst_case(sys, kernel, worst_K);
    std::fprintf(stderr, "[worstcase] error=%g in %.2fs\n", wc.error,
                 seconds_since(t0));
    nlohmann::json doc;
    doc["achieved_K"] = wc.achieved_K;
    doc["c_norm"] = wc.c_norm;
    doc["error"] = wc.error;
    doc["lower"] = wc.lower;
    doc["rel_error"] = wc.error / wc.u_star_native_norm;
    doc["rel_upper"] = wc.upper / wc.u_star_native_norm;
    doc["stability"] = wc.stability;
    doc["u_star_norm"] = wc.u_star_native_norm;
    doc["upper"] = wc.upper;
    doc["worst_row"] = wc.worst_row;
    Output out(worst_opt.out_path);
    out.stream() << doc.dump(2) << '\n';
  });

  // reproduce
  CLI::App* reproduce_cmd = app.add_subcommand(
      "reproduce", "emit a canonical experiment table as CSV");
  std::string table_id;
  std::uint64_t reproduce_seed = 20150814;
  std::size_t reproduce_threads = default_threads();
  std::string reproduce_out;
  reproduce_cmd
      ->add_option("table", table_id,
                   "fivepoint-full | fivepoint-interior | ph30 | ph25 | "
                   "basic25 | greedy30 | chebyshev | worstcase | corner")
      ->required();
  reproduce_cmd->add_option("--seed", reproduce_seed, "RNG seed")
      ->capture_default_str();
  reproduce_cmd->add_option("--threads", reproduce_threads, "assembly threads")
      ->capture_default_str();
  reproduce_cmd->add_option("--out", reproduce_out,
                            "output file (default stdout)");
  reproduce_cmd->callback([&] {
    Output out(reproduce_out);
    reproduce_table(table_id, reproduce_seed, reproduce_threads, out.stream());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const meshcert::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return meshcert::is_input_error(e.code()) ? 2 : 3;
  }
  return 0;
}
