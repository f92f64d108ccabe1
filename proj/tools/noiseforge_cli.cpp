// Copyright 2026 The NoiseForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. JSON in, JSON/CSV out; all randomness is seeded
// (default 42, overridable by NOISE_FORGE_SEED or --seed), so identical
// invocations produce byte-identical output files.
//
// Exit codes: 0 success, 1 input or usage error, 2 design infeasible (with
// diagnostics).

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noiseforge/noiseforge.hpp"

namespace nf = noiseforge;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw nf::SerializationError("cannot open \"" + path + "\" for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw nf::SerializationError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out) throw nf::SerializationError("short write to \"" + path + "\"");
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1)
    throw nf::InvalidArgumentError("grid steps must be at least 1");
  if (!(lo > 0.0))
    throw nf::InvalidArgumentError("grid minimum must be positive");
  if (hi < lo)
    throw nf::InvalidArgumentError("grid maximum must not be below the minimum");
  if (steps == 1) return {lo};
  std::vector<double> grid(steps);
  for (int i = 0; i < steps; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
  return grid;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("NOISE_FORGE_SEED")) {
    try {
      std::size_t used = 0;
      std::uint64_t v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw nf::InvalidArgumentError(
          "NOISE_FORGE_SEED must be a nonnegative integer, got \"" +
          std::string(env) + "\"");
    }
  }
  return 42;
}

int run_design(const std::string& spec_path, const std::string& out_path,
               bool literal) {
  nf::ProblemSpec spec = nf::problem_spec_from_json(read_file(spec_path));
  nf::DesignOptions opts;
  opts.corollary_literal = literal;
  if (spec.alpha == 0.0)
    std::cerr << "warning: alpha = 0 disables the security constraint; the "
                 "design only enforces the quality budget\n";
  nf::DesignResult result = nf::design(spec, opts);
  write_file(out_path, nf::to_json(result) + "\n");
  if (!result.feasible) {
    std::cerr << "infeasible: " << result.diagnostics << "\n";
    return 2;
  }
  return 0;
}

int run_evaluate(const std::string& design_path, const std::string& w_path,
                 const std::string& f_path, const std::string& out_path) {
  nf::DesignResult design = nf::design_result_from_json(read_file(design_path));
  nlohmann::json jw =
      nf::serialize_detail::parse_document(read_file(w_path), "W");
  nf::SymMatrix W = nf::serialize_detail::parse_sym(jw, "W");
  const int m = nf::dim(design.mechanism);
  nf::RectMatrix F = nf::RectMatrix::identity(m);
  if (!f_path.empty()) {
    nlohmann::json jf =
        nf::serialize_detail::parse_document(read_file(f_path), "F");
    F = nf::serialize_detail::parse_matrix(jf, "F");
  }
  nf::MeasureTriple t{nf::privacy(design.mechanism, W),
                      nf::quality(design.mechanism),
                      nf::security(design.mechanism, F)};
  write_file(out_path, nf::to_json(t) + "\n");
  return 0;
}

int run_tradeoff(const std::string& spec_path, double alpha_min,
                 double alpha_max, int alpha_steps, std::vector<double> etas,
                 const std::string& out_path, bool literal) {
  nf::ProblemSpec spec = nf::problem_spec_from_json(read_file(spec_path));
  if (etas.empty())
    throw nf::InvalidArgumentError("tradeoff: at least one eta is required");
  for (double e : etas)
    if (!(e > 0.0))
      throw nf::InvalidArgumentError("tradeoff: eta values must be positive");
  std::sort(etas.begin(), etas.end());
  nf::DesignOptions opts;
  opts.corollary_literal = literal;
  auto rows = nf::tradeoff_sweep(spec, linspace(alpha_min, alpha_max, alpha_steps),
                                 etas, opts);
  write_file(out_path, nf::tradeoff_csv(rows));
  return 0;
}

int run_dp(double delta, double eps_min, double eps_max, int eps_steps,
           const std::string& out_path) {
  auto rows = nf::dp_tradeoff_sweep(linspace(eps_min, eps_max, eps_steps), delta);
  write_file(out_path, nf::dp_csv(rows));
  return 0;
}

int run_simulate(const std::string& design_path, std::vector<double> bias,
                 long N, long trials, double fpr, std::uint64_t seed,
                 const std::string& out_path) {
  nf::DesignResult design = nf::design_result_from_json(read_file(design_path));
  const int m = nf::dim(design.mechanism);
  if (bias.size() == 1 && m > 1) bias.assign(m, bias[0]);
  if (static_cast<int>(bias.size()) != m)
    throw nf::InvalidArgumentError(
        "simulate: --bias needs one value (broadcast) or one per noise "
        "dimension (" +
        std::to_string(m) + ")");
  // The statistic depends on the responses only through y - Cx, so the
  // canonical protocol (identity query, zero data, identity bias channel)
  // is fully general for a given F d.
  nf::RectMatrix C = nf::RectMatrix::identity(m);
  nf::Vec x(m, 0.0);
  nf::DetectionReport rep = nf::likelihood_ratio_detect(
      design.mechanism, C, x, nf::RectMatrix::identity(m), bias, N, trials,
      fpr, seed);
  write_file(out_path, nf::to_json(rep) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "noiseforge: design and evaluate noise mechanisms balancing privacy, "
      "response quality, and bias-injection security"};
  app.require_subcommand(1);

  std::string spec_path, design_path, w_path, f_path, out_path;
  bool literal = false;
  double alpha_min = 0.05, alpha_max = 2.0;
  int alpha_steps = 40;
  std::vector<double> etas;
  double delta = 1.0, eps_min = 0.1, eps_max = 4.0;
  int eps_steps = 40;
  std::vector<double> bias;
  long N = 1, trials = 10000;
  double fpr = 0.05;
  std::uint64_t seed = 0;

  CLI::App* design = app.add_subcommand(
      "design", "solve one spec and write the design result JSON");
  design->add_option("--spec", spec_path, "ProblemSpec JSON path")->required();
  design->add_option("--out", out_path, "output path")->required();
  design->add_flag("--corollary-literal", literal,
                   "use the printed scalar corollary branch (V = 1/alpha)");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "re-measure a designed mechanism under a weight matrix");
  evaluate->add_option("--design", design_path, "DesignResult JSON path")
      ->required();
  evaluate->add_option("--W", w_path, "weight matrix JSON path")->required();
  evaluate->add_option("--F", f_path,
                       "attack channel JSON path (default: identity)");
  evaluate->add_option("--out", out_path, "output path")->required();

  CLI::App* tradeoff = app.add_subcommand(
      "tradeoff", "sweep (eta, alpha) grids and write the tradeoff CSV");
  tradeoff->add_option("--spec", spec_path, "ProblemSpec JSON path")->required();
  tradeoff->add_option("--alpha-min", alpha_min, "grid minimum")->required();
  tradeoff->add_option("--alpha-max", alpha_max, "grid maximum")->required();
  tradeoff->add_option("--alpha-steps", alpha_steps, "grid size")->required();
  tradeoff->add_option("--eta", etas, "quality budgets, comma separated")
      ->required()
      ->delimiter(',');
  tradeoff->add_option("--out", out_path, "output path")->required();
  tradeoff->add_flag("--corollary-literal", literal,
                     "use the printed scalar corollary branch");

  CLI::App* dp = app.add_subcommand(
      "dp", "sweep epsilon for the differentially private design CSV");
  dp->add_option("--delta", delta, "query sensitivity")->required();
  dp->add_option("--eps-min", eps_min, "grid minimum")->required();
  dp->add_option("--eps-max", eps_max, "grid maximum")->required();
  dp->add_option("--eps-steps", eps_steps, "grid size")->required();
  dp->add_option("--out", out_path, "output path")->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the likelihood-ratio detection experiment");
  simulate->add_option("--design", design_path, "DesignResult JSON path")
      ->required();
  simulate
      ->add_option("--bias", bias,
                   "injected bias components, comma separated (one value "
                   "broadcasts)")
      ->required()
      ->delimiter(',');
  simulate->add_option("--N", N, "responses pooled per detection decision")
      ->required();
  simulate->add_option("--trials", trials, "Monte Carlo trials")->required();
  simulate->add_option("--fpr", fpr, "false positive rate target")
      ->capture_default_str();
  CLI::Option* seed_opt =
      simulate->add_option("--seed", seed, "RNG seed (default 42, or "
                                           "NOISE_FORGE_SEED)");
  simulate->add_option("--out", out_path, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (design->parsed()) return run_design(spec_path, out_path, literal);
    if (evaluate->parsed())
      return run_evaluate(design_path, w_path, f_path, out_path);
    if (tradeoff->parsed())
      return run_tradeoff(spec_path, alpha_min, alpha_max, alpha_steps, etas,
                          out_path, literal);
    if (dp->parsed()) return run_dp(delta, eps_min, eps_max, eps_steps, out_path);
    if (simulate->parsed()) {
      if (seed_opt->count() == 0) seed = default_seed();
      return run_simulate(design_path, bias, N, trials, fpr, seed, out_path);
    }
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const nf::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
