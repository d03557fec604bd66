// Copyright 2026 The privexp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// privexp command-line tool.
//
// Exit codes: 0 ok, 2 input error, 3 infeasible, 4 resource cap,
// 5 non-convergence.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "privexp/privexp.hpp"

namespace {

using privexp::io::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNonConvergence = 5;

struct Common {
  int threads = 1;
  std::string out;
  bool bits = false;
  bool allow_nonconverged = false;
  double gap_tolerance = 1e-8;
  int max_iterations = 50000;
};

// Writes to --out or stdout. Files are opened in binary mode so line
// endings are '\n' on every platform.
void Emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw privexp::InvalidInput("cannot write '" + c.out + "'");
  f << text;
}

std::string Dump(const Json& j) { return j.dump(2) + "\n"; }

privexp::SolverOptions Solver(const Common& c) {
  privexp::SolverOptions o;
  o.gap_tolerance = c.gap_tolerance;
  o.max_iterations = c.max_iterations;
  return o;
}

// "a:b:step" (inclusive, integer or real) or "v1,v2,...".
std::vector<double> ParseGrid(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw privexp::InvalidInput("'" + s + "' is not a number");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw privexp::InvalidInput("range must look like start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || b < a) throw privexp::InvalidInput("range needs start <= stop, step > 0");
    const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 1000000) throw privexp::InvalidInput("range has too many points");
    for (long long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ',')) out.push_back(number(p));
  if (out.empty()) throw privexp::InvalidInput("empty list");
  return out;
}

// Evenly spaced grid lo..hi with `points` entries.
std::vector<double> Linspace(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw privexp::InvalidInput("--range needs lo < hi and >= 2 points");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
  return v;
}

privexp::Hypothesis ParseHypothesis(const std::string& s) {
  if (s == "h0") return privexp::Hypothesis::kH0;
  if (s == "h1") return privexp::Hypothesis::kH1;
  throw privexp::InvalidInput("hypothesis must be h0 or h1");
}

constexpr double kNatsPerBit = 0.69314718055994530942;

void AddBits(Json& j, const char* nats_key, bool bits) {
  if (bits && j.contains(nats_key) && j[nats_key].is_number()) {
    j[std::string(nats_key).replace(std::string(nats_key).find("nats"), 4, "bits")] =
        j[nats_key].get<double>() / kNatsPerBit;
  }
}

int ConvergenceExit(bool converged, const Common& c) {
  if (converged || c.allow_nonconverged) return kExitOk;
  std::cerr << "privexp: solver did not certify convergence (use --allow-nonconverged)\n";
  return kExitNonConvergence;
}

// ---------------------------------------------------------------------------
// exponent

struct ExponentArgs {
  std::string kind = "phi";
  std::string model;
  std::optional<double> s, s_bar, s_tilde;
  double tau = 0.5;
};

int RunExponent(const ExponentArgs& a, const Common& c) {
  const auto m = privexp::io::LoadModelFile(a.model);
  const double s_bar = a.s_bar.value_or(a.s.value_or(NAN));
  const double s_tilde = a.s_tilde.value_or(a.s.value_or(NAN));
  if (std::isnan(s_bar) || std::isnan(s_tilde)) {
    throw privexp::InvalidInput("give --s or both --s-bar and --s-tilde");
  }
  const privexp::ConstraintSet cons(m.distortion, s_bar, s_tilde);
  const auto src = m.source();
  privexp::ExponentResult r;
  if (a.kind == "phi") {
    r = privexp::SolvePhi(src, cons, Solver(c));
  } else if (a.kind == "nu") {
    r = privexp::SolveNu(src, cons, Solver(c));
  } else {
    r = privexp::SolveNuTau(src, cons, a.tau, Solver(c));
  }
  Json j = privexp::io::ToJson(r, a.kind, s_bar, s_tilde);
  if (a.kind == "nu-tau") j["tau"] = a.tau;
  AddBits(j, "value_nats", c.bits);
  Emit(c, Dump(j));
  return ConvergenceExit(r.converged, c);
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string kind = "phi";
  std::string model;
  std::string grid;
  std::vector<double> range;  // lo hi points
  bool no_warm_start = false;
};

int RunSweep(const SweepArgs& a, const Common& c) {
  const auto m = privexp::io::LoadModelFile(a.model);
  std::vector<double> s_values;
  if (!a.grid.empty()) {
    s_values = ParseGrid(a.grid);
  } else if (a.range.size() == 3) {
    s_values = Linspace(a.range[0], a.range[1], static_cast<int>(a.range[2]));
  } else {
    throw privexp::InvalidInput("give --s-grid or --range lo hi points");
  }
  privexp::SweepOptions so;
  so.solver = Solver(c);
  so.warm_start = !a.no_warm_start;
  so.threads = c.threads;
  const auto table = privexp::SweepExponent(
      m.source(), m.distortion, s_values,
      a.kind == "phi" ? privexp::ExponentKind::kPhi : privexp::ExponentKind::kNu, so);
  std::ostringstream out;
  privexp::io::WriteSweepCsv(out, table);
  Emit(c, out.str());
  bool all_converged = true;
  bool any_error = false;
  for (const auto& row : table.rows) {
    if (row.error) {
      std::cerr << "privexp: s=" << privexp::io::FormatNumber(row.s) << ": " << *row.error
                << "\n";
      any_error = true;
    }
    all_converged = all_converged && (row.converged || row.error);
  }
  if (!table.monotone_non_increasing) std::cerr << "privexp: audit: sweep is not monotone\n";
  if (!table.midpoint_convex) std::cerr << "privexp: audit: sweep is not midpoint convex\n";
  if (any_error) return kExitInfeasible;
  return ConvergenceExit(all_converged, c);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string mode;
  std::string model;
  std::string spec;
  std::string observe = "source";
  std::optional<double> s;
  std::string n;
  double epsilon = 0.99;
  double delta_prime = 1.0;
  std::string test = "bayes";
  std::optional<std::uint64_t> seed;
  // twophase
  std::string config;
  std::optional<double> delta, omega, xi, epsilon_prime;
  std::string variant = "bayes";
  std::size_t replicas = 10000;
  std::string trace_out;
  std::string hypothesis = "h0";
  double log_base = std::exp(1.0);
};

// Per-slot observation pmfs: the raw source, or the marginals induced by
// the phi / nu optimizer at budget s.
std::pair<privexp::Pmf, privexp::Pmf> ObservationLaws(const SimulateArgs& a, const Common& c,
                                                      const privexp::io::ModelFile& m) {
  const auto src = m.source();
  if (a.observe == "source") return {src.p_x_h0(), src.p_x_h1()};
  if (!a.s) throw privexp::InvalidInput("--observe phi|nu needs --s");
  const privexp::ConstraintSet cons(m.distortion, *a.s, *a.s);
  const auto r = a.observe == "phi" ? privexp::SolvePhi(src, cons, Solver(c))
                                    : privexp::SolveNu(src, cons, Solver(c));
  if (!r.converged && !c.allow_nonconverged) {
    throw privexp::Error(privexp::ErrorKind::kNonConvergence,
                         "solver did not certify convergence (use --allow-nonconverged)");
  }
  return {r.marginal_h0, r.marginal_h1};
}

int SingleHorizon(const std::string& n) {
  const auto v = ParseGrid(n);
  if (v.size() != 1 || v[0] < 1 || v[0] != std::floor(v[0]) || v[0] > 1e9) {
    throw privexp::InvalidInput("--n must be one positive integer");
  }
  return static_cast<int>(v[0]);
}

privexp::TestSpec OracleSpec(const SimulateArgs& a, const Common& c, double* prior_h0) {
  if (!a.spec.empty()) {
    if (!a.model.empty()) throw privexp::InvalidInput("give either --spec or --model");
    *prior_h0 = 0.5;
    return privexp::io::TestSpecFromJson(privexp::io::ReadJsonFile(a.spec));
  }
  if (a.model.empty()) throw privexp::InvalidInput("give --model or --spec");
  const auto m = privexp::io::LoadModelFile(a.model);
  *prior_h0 = m.prior_h0;
  auto laws = ObservationLaws(a, c, m);
  return privexp::TestSpec::Iid(std::move(laws.first), std::move(laws.second),
                                SingleHorizon(a.n));
}

std::uint64_t RequireSeed(const SimulateArgs& a) {
  if (!a.seed) throw privexp::InvalidInput("--seed is required for stochastic modes");
  return *a.seed;
}

int RunOracle(const SimulateArgs& a, const Common& c) {
  double prior_h0 = 0.5;
  privexp::TestSpec spec = OracleSpec(a, c, &prior_h0);
  privexp::TestResult r;
  if (a.mode == "np-exact") {
    r = privexp::NpExact(spec.NeymanPearson(a.epsilon));
  } else if (a.mode == "np-threshold") {
    if (!(a.delta_prime > 0.0)) throw privexp::InvalidInput("--delta-prime must be positive");
    r = privexp::NpThresholdTest(spec.NeymanPearson(a.epsilon), a.delta_prime);
  } else {
    r = privexp::BayesExact(spec.Bayes(), prior_h0, 1.0 - prior_h0);
  }
  Json j = privexp::io::ToJson(r);
  j["n"] = spec.n();
  if (a.mode != "bayes-exact") j["epsilon"] = a.epsilon;
  Emit(c, Dump(j));
  return kExitOk;
}

int RunTrend(const SimulateArgs& a, const Common& c) {
  if (a.model.empty()) throw privexp::InvalidInput("trend needs --model");
  const auto m = privexp::io::LoadModelFile(a.model);
  const auto laws = ObservationLaws(a, c, m);
  std::vector<int> ns;
  for (double v : ParseGrid(a.n)) {
    if (v < 1 || v != std::floor(v) || v > 1e9) {
      throw privexp::InvalidInput("horizons must be positive integers");
    }
    ns.push_back(static_cast<int>(v));
  }
  privexp::TrendOptions to;
  if (a.test == "np") {
    to.mode = privexp::TestMode::kNeymanPearson;
  } else if (a.test != "bayes") {
    throw privexp::InvalidInput("--test must be np or bayes");
  }
  to.epsilon = a.epsilon;
  to.prior_h0 = m.prior_h0;
  to.threads = c.threads;
  const auto rows = privexp::ExponentTrend(laws.first, laws.second, ns, to);
  std::ostringstream out;
  privexp::io::WriteTrendCsv(out, rows);
  Emit(c, out.str());
  return kExitOk;
}

int RunTwoPhase(const SimulateArgs& a, const Common& c) {
  if (a.model.empty()) throw privexp::InvalidInput("twophase needs --model");
  if (!a.s) throw privexp::InvalidInput("twophase needs --s");
  const std::uint64_t seed = RequireSeed(a);
  const auto m = privexp::io::LoadModelFile(a.model);
  privexp::TwoPhaseConfig cfg;
  if (!a.config.empty()) {
    cfg = privexp::io::TwoPhaseConfigFromJson(privexp::io::ReadJsonFile(a.config));
  } else {
    cfg.n = static_cast<std::size_t>(SingleHorizon(a.n));
    cfg.delta = a.delta.value_or(0.1 * *a.s);
    cfg.omega = a.omega.value_or(0.1 * *a.s);
    if (a.variant == "np") {
      cfg.variant = privexp::TwoPhaseVariant::kNpRhoP;
    } else if (a.variant != "bayes") {
      throw privexp::InvalidInput("--variant must be np or bayes");
    }
    cfg.xi = a.xi;
    cfg.epsilon_prime = a.epsilon_prime;
    cfg.log_base = a.log_base;
    // Without an explicit band, use half the admissible width
    // min(D, delta / d_max).
    if (!cfg.xi && !cfg.epsilon_prime) {
      const double d_max = m.distortion.d_max();
      const double divergence = m.source().Divergence();
      const double cap = d_max > 0.0 ? std::min(divergence, cfg.delta / d_max) : divergence;
      if (cfg.variant == privexp::TwoPhaseVariant::kNpRhoP) {
        cfg.epsilon_prime = 1.0 - 0.5 * cap;
      } else {
        cfg.xi = 0.5 * cap;
      }
    }
  }
  const auto policy =
      privexp::TwoPhasePolicy::Build(cfg, m.source(), m.distortion, *a.s, nullptr, Solver(c));
  if (!policy.phase2().converged && !c.allow_nonconverged) {
    throw privexp::Error(privexp::ErrorKind::kNonConvergence,
                         "phase-2 solver did not certify convergence");
  }
  const auto audit = privexp::AuditTwoPhase(policy, a.replicas, seed, c.threads);
  Json j = privexp::io::ToJson(audit);
  j["seed"] = seed;
  j["config"] = privexp::io::ToJson(cfg);
  j["ledger"] = privexp::io::ToJson(policy.ledger());
  j["phase2_value_nats"] = privexp::io::NumberOrNull(policy.phase2().value);
  AddBits(j, "phase2_value_nats", c.bits);
  Emit(c, Dump(j));
  if (!a.trace_out.empty()) {
    const auto trace = policy.Simulate(ParseHypothesis(a.hypothesis), seed);
    std::ofstream f(a.trace_out, std::ios::binary);
    if (!f) throw privexp::InvalidInput("cannot write '" + a.trace_out + "'");
    privexp::io::WriteTraceCsv(f, trace);
  }
  if (!audit.pass) std::cerr << "privexp: two-phase audit FAILED\n";
  return kExitOk;
}

// Runs the memoryless optimizer on i.i.d. demand and compares the empirical
// observation law with the solver's marginal.
int RunMonteCarlo(const SimulateArgs& a, const Common& c) {
  if (a.model.empty() || !a.s) throw privexp::InvalidInput("montecarlo needs --model and --s");
  const std::uint64_t seed = RequireSeed(a);
  const auto m = privexp::io::LoadModelFile(a.model);
  const privexp::ConstraintSet cons(m.distortion, *a.s, *a.s);
  const auto src = m.source();
  const bool use_nu = a.observe == "nu";
  const auto r = use_nu ? privexp::SolveNu(src, cons, Solver(c))
                        : privexp::SolvePhi(src, cons, Solver(c));
  const privexp::Hypothesis h = ParseHypothesis(a.hypothesis);
  const auto slots = static_cast<std::size_t>(SingleHorizon(a.n));
  // Demand and policy use separate streams derived from the same seed.
  const auto x = privexp::SampleSequence(src[h], slots, seed);
  const auto y = privexp::MemorylessPolicyApply(r.policy, h, x, seed ^ 0x9e3779b97f4a7c15ULL);
  const auto& ya = m.distortion.y_alphabet();
  std::vector<double> counts(ya.size(), 0.0);
  double distortion = 0.0;
  for (std::size_t i = 0; i < slots; ++i) {
    const std::size_t yi = *ya.IndexOf(y[i]);
    counts[yi] += 1.0;
    distortion += m.distortion.d(*src.x_alphabet().IndexOf(x[i]), yi);
  }
  const privexp::Pmf& target = h == privexp::Hypothesis::kH0 ? r.marginal_h0 : r.marginal_h1;
  double max_z = 0.0;
  double tv = 0.0;
  Json empirical = Json::array();
  const double n = static_cast<double>(slots);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double f = counts[k] / n;
    empirical.push_back(f);
    tv += 0.5 * std::abs(f - target[k]);
    const double sd = std::sqrt(target[k] * (1.0 - target[k]) / n);
    if (sd > 0.0) {
      max_z = std::max(max_z, std::abs(f - target[k]) / sd);
    } else if (f != target[k]) {
      max_z = INFINITY;
    }
  }
  Json j{{"schema", privexp::io::kSchema},
         {"type", "memoryless_montecarlo"},
         {"kind", use_nu ? "nu" : "phi"},
         {"s", *a.s},
         {"hypothesis", a.hypothesis},
         {"slots", slots},
         {"seed", seed},
         {"empirical_marginal", empirical},
         {"solver_marginal", privexp::io::ToJson(target)["probs"]},
         {"total_variation", tv},
         {"max_z_score", privexp::io::NumberOrNull(max_z)},
         {"within_3_sigma", max_z <= 3.0},
         {"average_distortion", distortion / n},
         {"budget", *a.s}};
  Emit(c, Dump(j));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// trace

struct TraceArgs {
  std::string model;
  double s = 0.0;
  std::string kind = "phi";
  std::string hypothesis = "h0";
  std::string demand;
  std::size_t length = 0;
  std::optional<std::uint64_t> seed;
  std::string audit_out;
};

int RunTrace(const TraceArgs& a, const Common& c) {
  if (!a.seed) throw privexp::InvalidInput("--seed is required");
  const auto m = privexp::io::LoadModelFile(a.model);
  const privexp::Hypothesis h = ParseHypothesis(a.hypothesis);
  std::vector<double> demand;
  if (!a.demand.empty()) {
    demand = privexp::io::ReadDemandCsvFile(a.demand);
  } else if (a.length > 0) {
    // Synthetic i.i.d. demand from the model, on a stream separate from the
    // policy's.
    demand = privexp::SampleSequence(m.source()[h], a.length, *a.seed ^ 0x5bf03635f0b8e5c3ULL);
  } else {
    throw privexp::InvalidInput("give --demand FILE or --length N");
  }
  const auto t = privexp::ApplyToTrace(
      m.model, a.s, demand,
      a.kind == "phi" ? privexp::ExponentKind::kPhi : privexp::ExponentKind::kNu, h, *a.seed,
      Solver(c));
  std::ostringstream out;
  privexp::io::WriteSupplyTraceCsv(out, t);
  Emit(c, out.str());
  Json audit{{"schema", privexp::io::kSchema},
             {"type", "supply_audit"},
             {"slots", t.demand.size()},
             {"average_renewable_w", t.average_renewable},
             {"renewable_std_error_w", t.renewable_std_error},
             {"budget_w", t.budget},
             {"within_budget", t.within_budget},
             {"supply_above_demand", t.supply_above_demand}};
  if (t.solution) {
    audit["value_nats"] = privexp::io::NumberOrNull(t.solution->value);
    audit["converged"] = t.solution->converged;
  }
  if (!a.audit_out.empty()) {
    std::ofstream f(a.audit_out, std::ios::binary);
    if (!f) throw privexp::InvalidInput("cannot write '" + a.audit_out + "'");
    f << Dump(audit);
  } else {
    std::cerr << audit.dump() << "\n";
  }
  return ConvergenceExit(!t.solution || t.solution->converged, c);
}

void AddCommon(CLI::App* app, Common& c, bool solver) {
  app->add_option("-o,--out", c.out, "Output file (default stdout)");
  if (solver) {
    app->add_flag("--allow-nonconverged", c.allow_nonconverged,
                  "Exit 0 even if the solver could not certify its duality gap");
    app->add_option("--gap-tol", c.gap_tolerance, "Frank-Wolfe duality-gap tolerance")
        ->check(CLI::PositiveNumber);
    app->add_option("--max-iter", c.max_iterations, "Frank-Wolfe iteration cap")
        ->check(CLI::PositiveNumber);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "privexp: hypothesis-testing privacy exponents for distortion-constrained data "
      "release, their optimal policies, and exact adversary oracles"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (output order is fixed)")
      ->envname("PRIVEXP_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_flag("--bits", common.bits, "Also report exponents in bits (display only)");

  ExponentArgs ex;
  auto* exponent = app.add_subcommand(
      "exponent",
      "Single-letter exponents over the distortion-constrained policy polytope: phi(s_bar, "
      "s_tilde) = min KL(p_Y|h0 || p_Y|h1), nu = max_tau min C_tau (Chernoff), or nu_tau at "
      "a fixed tau. Writes an ExponentResult JSON with the optimal policy pair.");
  exponent->add_option("kind", ex.kind, "phi | nu | nu-tau")
      ->required()
      ->check(CLI::IsMember({"phi", "nu", "nu-tau"}));
  exponent->add_option("--model", ex.model, "Model JSON")->required();
  exponent->add_option("--s", ex.s, "Budget for both hypotheses");
  exponent->add_option("--s-bar", ex.s_bar, "Distortion budget under h0");
  exponent->add_option("--s-tilde", ex.s_tilde, "Distortion budget under h1");
  exponent->add_option("--tau", ex.tau, "Chernoff order for nu-tau")->check(CLI::Range(0.0, 1.0));
  AddCommon(exponent, common, true);

  SweepArgs sw;
  auto* sweep = app.add_subcommand(
      "sweep",
      "Sweep phi(s, s) or nu(s, s) over budgets s with warm starts, auditing monotone "
      "non-increase and convexity in s. CSV: s,value_nats,tau_star,dist_h0,dist_h1,converged");
  sweep->add_option("kind", sw.kind, "phi | nu")->required()->check(CLI::IsMember({"phi", "nu"}));
  sweep->add_option("--model", sw.model, "Model JSON")->required();
  sweep->add_option("--s-grid", sw.grid, "Budgets: start:stop:step or v1,v2,...");
  sweep->add_option("--range", sw.range, "Evenly spaced budgets: lo hi points")->expected(3);
  sweep->add_flag("--no-warm-start", sw.no_warm_start,
                  "Solve rows independently (parallel with --threads)");
  AddCommon(sweep, common, true);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate",
      "Exact finite-horizon adversary oracles and Monte Carlo checks. np-exact: randomized "
      "Neyman-Pearson test (minimal type-II error beta at type-I budget epsilon); "
      "np-threshold: deterministic log-likelihood-ratio threshold test with the "
      "type2 <= exp(-n t(n)) bound; bayes-exact: Bayes-optimal likelihood-ratio test (minimal "
      "error alpha); trend: -(1/n) log error over horizons; twophase: hypothesis-unaware "
      "learn-then-protect policy with a Monte Carlo distortion and learning audit; "
      "montecarlo: memoryless optimal policy on i.i.d. demand versus the solver marginals.");
  simulate->add_option("oracle", sim.mode, "np-exact | np-threshold | bayes-exact | trend | "
                                         "twophase | montecarlo")
      ->required()
      ->check(CLI::IsMember(
          {"np-exact", "np-threshold", "bayes-exact", "trend", "twophase", "montecarlo"}));
  simulate->add_option("--model", sim.model, "Model JSON");
  simulate->add_option("--spec", sim.spec, "Observation-model JSON for the exact oracles");
  simulate->add_option("--observe", sim.observe,
                       "Observation laws: source (raw demand), phi or nu (optimal policy "
                       "marginals at --s)")
      ->check(CLI::IsMember({"source", "phi", "nu"}));
  simulate->add_option("--s", sim.s, "Distortion budget");
  simulate->add_option("--n", sim.n, "Horizon; for trend a range start:stop:step or list");
  simulate->add_option("--epsilon", sim.epsilon, "Type-I error budget in (0,1)");
  simulate->add_option("--delta-prime", sim.delta_prime, "Threshold offset for np-threshold");
  simulate->add_option("--test,--mode", sim.test, "Adversary for trend: np | bayes")
      ->check(CLI::IsMember({"np", "bayes"}));
  simulate->add_option("--seed", sim.seed, "64-bit seed (required for twophase, montecarlo)");
  simulate->add_option("--config", sim.config, "Two-phase config JSON");
  simulate->add_option("--delta", sim.delta, "Two-phase slack under h0 (default 0.1 s)");
  simulate->add_option("--omega", sim.omega, "Two-phase slack under h1 (default 0.1 s)");
  simulate->add_option("--xi", sim.xi, "Typical-set band width (Bayes variant)");
  simulate->add_option("--epsilon-prime", sim.epsilon_prime, "NP variant parameter, xi = 1 - e'");
  simulate->add_option("--variant", sim.variant, "Two-phase variant: np | bayes");
  simulate->add_option("--replicas", sim.replicas, "Monte Carlo traces per hypothesis");
  simulate->add_option("--log-base", sim.log_base, "Base of the learning length floor(log n)");
  simulate->add_option("--trace-out", sim.trace_out, "Write one two-phase trace CSV here");
  simulate->add_option("--hypothesis", sim.hypothesis, "True hypothesis: h0 | h1");
  AddCommon(simulate, common, true);

  TraceArgs tr;
  auto* trace = app.add_subcommand(
      "trace",
      "Smart-meter supply trace: solve phi or nu under the renewable-rate constraint "
      "E[demand - supply] <= s with supply <= demand, then apply the optimal policy row of "
      "the true hypothesis. CSV: slot,demand_w,supply_w,renewable_w");
  trace->add_option("--model", tr.model, "Demand model JSON")->required();
  trace->add_option("--s", tr.s, "Renewable generation rate (W); 0 gives supply = demand")
      ->required();
  trace->add_option("--kind", tr.kind, "phi | nu")->check(CLI::IsMember({"phi", "nu"}));
  trace->add_option("--hypothesis", tr.hypothesis, "True hypothesis: h0 | h1");
  trace->add_option("--demand", tr.demand, "Demand CSV with a demand_w column");
  trace->add_option("--length", tr.length, "Synthetic i.i.d. demand length");
  trace->add_option("--seed", tr.seed, "64-bit seed")->required();
  trace->add_option("--audit-out", tr.audit_out, "Write the renewable-usage audit JSON here");
  AddCommon(trace, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (exponent->parsed()) return RunExponent(ex, common);
    if (sweep->parsed()) return RunSweep(sw, common);
    if (trace->parsed()) return RunTrace(tr, common);
    if (sim.mode == "trend") return RunTrend(sim, common);
    if (sim.mode == "twophase") return RunTwoPhase(sim, common);
    if (sim.mode == "montecarlo") return RunMonteCarlo(sim, common);
    return RunOracle(sim, common);
  } catch (const privexp::Error& e) {
    std::cerr << "privexp: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "privexp: " << e.what() << "\n";
    return kExitInput;
  }
}
