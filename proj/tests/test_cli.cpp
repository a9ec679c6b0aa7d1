// End-to-end tests of the command-line binary: spawns the real executable,
// checks exit codes, CSV shapes, JSON determinism, and cross-checks values
// against the library.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "meshcert/consistency.hpp"
#include "meshcert/geometry.hpp"
#include "meshcert/kernels.hpp"
#include "meshcert/stability.hpp"
#include "meshcert/stencils.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd =
      std::string(MESHCERT_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) {
    result.output.append(buf, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

TEST_CASE("reproduce fivepoint-full matches the published table") {
  const RunResult r = run_cli("reproduce fivepoint-full");
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(r.output);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "M,h,C_S,c_inf,product");

  const std::size_t want_M[] = {25, 81, 289, 1089};
  const double want_cs[] = {1.281250, 1.291131, 1.293783, 1.294459};
  const double want_c[] = {9.904477051143e-02, 5.176641938722e-02,
                           2.630267026166e-02, 1.322248276583e-02};
  const double want_prod[] = {0.126901, 0.066837, 0.034030, 0.017116};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto f = split_fields(lines[i + 1]);
    REQUIRE(f.size() == 5);
    CHECK(std::stoul(f[0]) == want_M[i]);
    CHECK(std::stod(f[1]) == doctest::Approx(0.5 / (1 << i)).epsilon(1e-12));
    CHECK(std::stod(f[2]) == doctest::Approx(want_cs[i]).epsilon(1e-6));
    CHECK(std::stod(f[3]) == doctest::Approx(want_c[i]).epsilon(1e-8));
    CHECK(std::stod(f[4]) == doctest::Approx(want_prod[i]).epsilon(1e-4));
    CHECK(std::stod(f[4]) ==
          doctest::Approx(std::stod(f[2]) * std::stod(f[3])).epsilon(1e-9));
  }
}

TEST_CASE("reproduce fivepoint-interior shifts the constant down by one") {
  const RunResult full = run_cli("reproduce fivepoint-full");
  const RunResult part = run_cli("reproduce fivepoint-interior");
  REQUIRE(full.exit_code == 0);
  REQUIRE(part.exit_code == 0);
  const auto full_lines = split_lines(full.output);
  const auto part_lines = split_lines(part.output);
  REQUIRE(part_lines.size() == 5);

  const double want_prod[] = {0.027856, 0.015071, 0.007727, 0.003893};
  for (std::size_t i = 1; i <= 4; ++i) {
    const auto fa = split_fields(full_lines[i]);
    const auto fb = split_fields(part_lines[i]);
    // The CSV carries nine significant digits, so the exact -1 identity
    // survives parsing only to ~1e-8.
    CHECK(std::stod(fb[2]) ==
          doctest::Approx(std::stod(fa[2]) - 1.0).epsilon(1e-7));
    CHECK(std::stod(fb[3]) == doctest::Approx(std::stod(fa[3])).epsilon(1e-12));
    CHECK(std::stod(fb[4]) == doctest::Approx(want_prod[i - 1]).epsilon(2e-4));
  }
}

TEST_CASE("certify emits a deterministic certificate with the known bound") {
  const std::string args =
      "certify --h 0.5 --kernel wm:m=4,d=2 --method fivepoint";
  const RunResult first = run_cli(args);
  const RunResult second = run_cli(args);
  REQUIRE(first.exit_code == 0);
  CHECK(first.output == second.output);

  const nlohmann::json doc = nlohmann::json::parse(first.output);
  CHECK(doc.at("bound").get<double>() == doctest::Approx(0.126901).epsilon(1e-5));
  CHECK(doc.at("kernel").get<std::string>() == "wm:m=4,d=2");
  CHECK(doc.at("method").get<std::string>() == "fivepoint");
  CHECK(doc.at("admissibility_K").get<double>() == 0.0);
  CHECK(doc.at("seed").get<std::uint64_t>() == 20150814);
  CHECK(doc.at("stability").at("value").get<double>() ==
        doctest::Approx(1.281250).epsilon(1e-9));

  // A node file round-trips into the identical certificate.
  const auto tmp = std::filesystem::temp_directory_path() /
                   "meshcert_cli_nodes_roundtrip.csv";
  const RunResult gen =
      run_cli("nodes gen --h 0.5 --out " + tmp.string());
  REQUIRE(gen.exit_code == 0);
  const RunResult via_file =
      run_cli("certify --nodes " + tmp.string() +
              " --kernel wm:m=4,d=2 --method fivepoint");
  CHECK(via_file.exit_code == 0);
  CHECK(via_file.output == first.output);
  std::filesystem::remove(tmp);
}

TEST_CASE("nodes gen emits the documented CSV") {
  const RunResult r = run_cli("nodes gen --h 0.5");
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(r.output);
  REQUIRE(lines.size() == 26);
  CHECK(lines[0] == "x,y,is_boundary");
  std::size_t boundary = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    REQUIRE(f.size() == 3);
    boundary += (f[2] == "1");
  }
  CHECK(boundary == 16);

  CHECK(run_cli("nodes gen --kind chebyshev --n 5").exit_code == 0);
  CHECK(run_cli("nodes gen --kind perturbed").exit_code == 2);
}

TEST_CASE("consistency output equals the library values") {
  const RunResult r =
      run_cli("consistency --h 0.5 --kernel wm:m=4,d=2 --method fivepoint");
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(r.output);
  REQUIRE(lines.size() == 26);
  CHECK(lines[0] == "node_index,x,y,c_value");

  const meshcert::Kernel wm42 = meshcert::wm_kernel(4, 2);
  const meshcert::StiffnessSystem sys =
      meshcert::assemble(meshcert::gen_grid(0.5), wm42,
                         {meshcert::MethodSpec::Kind::fivepoint, 0});
  const meshcert::ConsistencyVector c =
      meshcert::consistency_vector(wm42, sys.stencils);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    REQUIRE(f.size() == 4);
    const std::size_t idx = std::stoul(f[0]);
    REQUIRE(idx < c.values.size());
    if (c.values[idx] == 0.0) {
      CHECK(std::stod(f[3]) == 0.0);
    } else {
      CHECK(std::stod(f[3]) ==
            doctest::Approx(c.values[idx]).epsilon(1e-8));
    }
  }
}

TEST_CASE("stability subcommand reports both estimators") {
  const RunResult split = run_cli(
      "stability --h 0.25 --kernel wm:m=4,d=2 --method fivepoint --split");
  REQUIRE(split.exit_code == 0);
  const nlohmann::json split_doc = nlohmann::json::parse(split.output);
  CHECK(split_doc.at("method").get<std::string>() == "condest_inf");
  CHECK(split_doc.at("value").get<double>() ==
        doctest::Approx(0.291131).epsilon(1e-6));

  const RunResult svd = run_cli(
      "stability --h 0.5 --kernel wm:m=4,d=2 --method fivepoint --norm 2");
  REQUIRE(svd.exit_code == 0);
  const nlohmann::json svd_doc = nlohmann::json::parse(svd.output);
  CHECK(svd_doc.at("method").get<std::string>() == "svd2");
  CHECK(svd_doc.at("norm").at("p").get<std::string>() == "2");
  CHECK(svd_doc.at("value").get<double>() > 0.0);
}

TEST_CASE("worstcase subcommand exposes the sharpness data") {
  const RunResult r = run_cli(
      "worstcase --h 0.125 --kernel wm:m=4,d=2 --method fivepoint --K 2");
  REQUIRE(r.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.output);
  CHECK(doc.at("achieved_K").get<double>() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(doc.at("error").get<double>() ==
        doctest::Approx(doc.at("lower").get<double>()).epsilon(1e-6));
  CHECK(doc.at("error").get<double>() <=
        doc.at("upper").get<double>() * (1.0 + 1e-6));
  CHECK(doc.at("rel_error").get<double>() ==
        doctest::Approx(doc.at("error").get<double>() /
                        doc.at("u_star_norm").get<double>())
            .epsilon(1e-12));
}

TEST_CASE("assemble writes MatrixMarket, to stdout or a file") {
  const RunResult r =
      run_cli("assemble --h 1.0 --kernel wm:m=4,d=2 --method fivepoint");
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(r.output);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "%%MatrixMarket matrix coordinate real general");
  CHECK(lines[1] == "9 9 13");

  const auto tmp =
      std::filesystem::temp_directory_path() / "meshcert_cli_mm_test.mtx";
  const RunResult to_file =
      run_cli("assemble --h 1.0 --kernel wm:m=4,d=2 --method fivepoint --out " +
              tmp.string());
  REQUIRE(to_file.exit_code == 0);
  CHECK(to_file.output.empty());
  std::ifstream in(tmp);
  std::stringstream content;
  content << in.rdbuf();
  CHECK(content.str() == r.output);
  std::filesystem::remove(tmp);
}

TEST_CASE("exit codes distinguish input errors from numerical failures") {
  CHECK(run_cli("reproduce nosuch-table").exit_code == 2);
  CHECK(run_cli("certify --h 0.5 --method fivepoint").exit_code == 2);
  CHECK(run_cli("certify --h 0.5 --kernel wm:m=0.5,d=2 --method fivepoint")
            .exit_code == 2);
  CHECK(run_cli("consistency --kernel wm:m=4,d=2 --method fivepoint")
            .exit_code == 2);
  // Exact lattices are not unisolvent for the degree-5 exactness of
  // ph(6,2) optimal stencils: a numerical geometry failure, not bad input.
  CHECK(run_cli("assemble --h 0.25 --kernel ph:m=6,d=2 --method optimal:n=30")
            .exit_code == 3);
}
