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

// JSON (schema "privexp-v1") and CSV input/output. CSV floats use 12
// significant digits, '.' as the decimal point and '\n' line endings
// regardless of the process locale.

#ifndef PRIVEXP_SERIALIZATION_HPP_
#define PRIVEXP_SERIALIZATION_HPP_

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "privexp/adversary.hpp"
#include "privexp/distortion.hpp"
#include "privexp/distributions.hpp"
#include "privexp/error.hpp"
#include "privexp/exponents.hpp"
#include "privexp/policies.hpp"
#include "privexp/smartmeter.hpp"

namespace privexp::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kSchema = "privexp-v1";

// 12 significant digits, shortest form, locale independent.
inline std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// JSON writers

inline Json ToJson(const Alphabet& a) {
  return Json(std::vector<double>(a.symbols().begin(), a.symbols().end()));
}

inline Json ToJson(const Pmf& p) {
  return Json{{"alphabet", ToJson(p.alphabet())},
              {"probs", std::vector<double>(p.probs().begin(), p.probs().end())}};
}

inline Json ToJson(const ConditionalPmf& c) {
  Json rows = Json::array();
  for (std::size_t x = 0; x < c.x_alphabet().size(); ++x) {
    const auto r = c.row(x);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return Json{{"x_alphabet", ToJson(c.x_alphabet())},
              {"y_alphabet", ToJson(c.y_alphabet())},
              {"rows", std::move(rows)}};
}

inline Json ToJson(const PolicyPair& p) {
  return Json{{"schema", kSchema},
              {"type", "policy_pair"},
              {"h0", ToJson(p.h0())},
              {"h1", ToJson(p.h1())}};
}

inline Json ToJson(const SourceModel& s) {
  return Json{{"schema", kSchema},
              {"type", "source_model"},
              {"x_alphabet", ToJson(s.x_alphabet())},
              {"p_x_h0", ToJson(s.p_x_h0())},
              {"p_x_h1", ToJson(s.p_x_h1())},
              {"prior_h0", s.prior_h0()},
              {"prior_h1", s.prior_h1()}};
}

inline std::string_view KindName(ExponentKind k) { return k == ExponentKind::kPhi ? "phi" : "nu"; }

// Infinite values are written as null with effectively_infinite = true.
inline Json NumberOrNull(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json ToJson(const ExponentResult& r, std::string_view kind, double s_bar,
                   double s_tilde) {
  Json j{{"schema", kSchema},
         {"type", "exponent_result"},
         {"kind", kind},
         {"s_bar", s_bar},
         {"s_tilde", s_tilde},
         {"value_nats", NumberOrNull(r.value)},
         {"effectively_infinite", r.effectively_infinite}};
  if (r.tau_star) j["tau_star"] = *r.tau_star;
  if (r.chernoff_at_policy) j["chernoff_at_policy"] = NumberOrNull(*r.chernoff_at_policy);
  j["distortions"] = Json{{"h0", r.distortions[0]}, {"h1", r.distortions[1]}};
  j["iterations"] = r.iterations;
  j["duality_gap"] = r.duality_gap;
  j["converged"] = r.converged;
  j["marginals"] = Json{{"h0", ToJson(r.marginal_h0)}, {"h1", ToJson(r.marginal_h1)}};
  j["policy"] = ToJson(r.policy);
  return j;
}

inline Json ToJson(const TestResult& r) {
  Json j{{"schema", kSchema},
         {"type", "test_result"},
         {"mode", r.mode == TestMode::kNeymanPearson ? "neyman_pearson" : "bayes"}};
  j["type1"] = r.type1;
  j["type2"] = r.type2;
  j["log_type2"] = NumberOrNull(r.log_type2);
  if (r.mode == TestMode::kBayes) {
    j["bayes_error"] = r.bayes_error;
    j["log_bayes_error"] = NumberOrNull(r.log_bayes_error);
  }
  j["threshold"] = NumberOrNull(r.threshold);
  j["randomization"] = r.randomization;
  j["region"] = Json{{"decide_h0", r.region.decide_h0},
                     {"decide_h1", r.region.decide_h1},
                     {"randomized", r.region.randomized}};
  if (r.log_type2_bound) j["log_type2_bound"] = NumberOrNull(*r.log_type2_bound);
  if (r.bound_holds) j["bound_holds"] = *r.bound_holds;
  return j;
}

inline Json ToJson(const TwoPhaseLedger& l) {
  return Json{{"learning_slots", l.learning_slots}, {"xi", l.xi},
              {"psi", l.psi},                       {"divergence", l.divergence},
              {"d_max", l.d_max},                   {"budget_h0", l.budget_h0},
              {"budget_h1", l.budget_h1},           {"admissible_lower", l.lower},
              {"admissible_upper", l.upper},        {"horizon_sufficient", l.horizon_sufficient}};
}

inline Json ToJson(const TwoPhaseAudit& a) {
  Json per = Json::array();
  for (const auto& h : a.per_hypothesis) {
    per.push_back(Json{{"mean_distortion", h.mean_distortion},
                       {"distortion_std_error", h.distortion_std_error},
                       {"learning_error", h.learning_error},
                       {"learning_std_error", h.learning_std_error},
                       {"phase1_constant", h.phase1_constant},
                       {"distortion_ok", h.distortion_ok}});
  }
  return Json{{"schema", kSchema},
              {"type", "two_phase_audit"},
              {"replicas", a.replicas},
              {"budget", a.budget},
              {"xi", a.xi},
              {"h0", per[0]},
              {"h1", per[1]},
              {"horizon_sufficient", a.horizon_sufficient},
              {"learning_ok", a.learning_ok},
              {"pass", a.pass}};
}

// ---------------------------------------------------------------------------
// JSON readers

namespace internal {

inline const Json& Field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInput(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

inline std::vector<double> Numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidInput(std::string(what) + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline void CheckSchema(const Json& j) {
  if (j.contains("schema") &&
      (!j.at("schema").is_string() || j.at("schema").get<std::string>() != kSchema)) {
    throw InvalidInput("unsupported schema '" + j.at("schema").dump() + "', expected " +
                       std::string(kSchema));
  }
}

template <class F>
auto Guard(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace internal

inline Json ParseJson(std::string_view text) {
  return internal::Guard([&] { return Json::parse(text); });
}

inline Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseJson(buf.str());
}

inline Pmf PmfFromJson(const Json& j) {
  return internal::Guard([&] {
    return Pmf(Alphabet(internal::Numbers(internal::Field(j, "alphabet"), "alphabet")),
               internal::Numbers(internal::Field(j, "probs"), "probs"));
  });
}

inline ConditionalPmf ConditionalFromJson(const Json& j) {
  return internal::Guard([&] {
    Alphabet xs(internal::Numbers(internal::Field(j, "x_alphabet"), "x_alphabet"));
    Alphabet ys(internal::Numbers(internal::Field(j, "y_alphabet"), "y_alphabet"));
    const Json& rows = internal::Field(j, "rows");
    if (!rows.is_array() || rows.size() != xs.size()) {
      throw InvalidInput("conditional needs one row per x symbol");
    }
    std::vector<double> flat;
    for (const auto& r : rows) {
      const auto v = internal::Numbers(r, "row");
      if (v.size() != ys.size()) throw InvalidInput("conditional row has wrong length");
      flat.insert(flat.end(), v.begin(), v.end());
    }
    return ConditionalPmf(std::move(xs), std::move(ys), std::move(flat));
  });
}

inline PolicyPair PolicyPairFromJson(const Json& j) {
  internal::CheckSchema(j);
  return PolicyPair(ConditionalFromJson(internal::Field(j, "h0")),
                    ConditionalFromJson(internal::Field(j, "h1")));
}

// A model file: demand model plus the distortion measure to use with it.
//
//   {"schema": "privexp-v1", "type": "demand_model", "name": "...",
//    "x_alphabet": [...],
//    "hypotheses": [{"label": "...", "p_x": [...]}, {"label": "...", "p_x": [...]}],
//    "prior_h0": 0.5,
//    "distortion": {"kind": "supply_below_demand"}
//                | {"kind": "matrix", "y_alphabet": [...], "d": [[...]],
//                   "forbidden": [[...]]}}
//
// The distortion block is optional and defaults to supply_below_demand with
// the supply alphabet equal to the demand alphabet.
struct ModelFile {
  DemandModel model;
  DistortionSpec distortion;
  double prior_h0 = 0.5;

  SourceModel source() const {
    return SourceModel(model.source().p_x_h0(), model.source().p_x_h1(), prior_h0);
  }
};

inline ModelFile ModelFromJson(const Json& j) {
  internal::CheckSchema(j);
  return internal::Guard([&] {
    Alphabet xs(internal::Numbers(internal::Field(j, "x_alphabet"), "x_alphabet"));
    const Json& hyp = internal::Field(j, "hypotheses");
    if (!hyp.is_array() || hyp.size() != 2) {
      throw InvalidInput("'hypotheses' must list exactly two entries");
    }
    std::array<std::string, 2> labels{"h0", "h1"};
    std::array<std::vector<double>, 2> probs;
    for (int h = 0; h < 2; ++h) {
      probs[h] = internal::Numbers(internal::Field(hyp[h], "p_x"), "p_x");
      if (hyp[h].contains("label")) labels[h] = hyp[h].at("label").get<std::string>();
    }
    ModelFile m;
    m.model = DemandModel(j.value("name", std::string("model")), Pmf(xs, probs[0]),
                          Pmf(xs, probs[1]), labels[0], labels[1]);
    m.prior_h0 = j.value("prior_h0", 0.5);
    (void)m.source();  // validates the prior
    const Json dist = j.value("distortion", Json{{"kind", "supply_below_demand"}});
    const std::string kind = internal::Field(dist, "kind").get<std::string>();
    if (kind == "supply_below_demand") {
      const Alphabet ys = dist.contains("y_alphabet")
                              ? Alphabet(internal::Numbers(dist.at("y_alphabet"), "y_alphabet"))
                              : xs;
      m.distortion = DistortionSpec::SupplyBelowDemand(xs, ys);
    } else if (kind == "matrix") {
      Alphabet ys(internal::Numbers(internal::Field(dist, "y_alphabet"), "y_alphabet"));
      const Json& d = internal::Field(dist, "d");
      if (!d.is_array() || d.size() != xs.size()) {
        throw InvalidInput("distortion matrix needs one row per x symbol");
      }
      std::vector<double> flat;
      Mask mask(xs.size(), ys.size());
      for (std::size_t x = 0; x < xs.size(); ++x) {
        const auto row = internal::Numbers(d[x], "distortion row");
        if (row.size() != ys.size()) throw InvalidInput("distortion row has wrong length");
        flat.insert(flat.end(), row.begin(), row.end());
      }
      if (dist.contains("forbidden")) {
        const Json& f = dist.at("forbidden");
        if (!f.is_array() || f.size() != xs.size()) {
          throw InvalidInput("forbidden mask needs one row per x symbol");
        }
        for (std::size_t x = 0; x < xs.size(); ++x) {
          if (!f[x].is_array() || f[x].size() != ys.size()) {
            throw InvalidInput("forbidden mask row has wrong length");
          }
          for (std::size_t y = 0; y < ys.size(); ++y) {
            mask.set_forbidden(x, y, f[x][y].get<bool>());
          }
        }
      }
      m.distortion = DistortionSpec(xs, std::move(ys), std::move(flat), std::move(mask));
    } else {
      throw InvalidInput("unknown distortion kind '" + kind + "'");
    }
    return m;
  });
}

inline ModelFile LoadModelFile(const std::string& path) { return ModelFromJson(ReadJsonFile(path)); }

inline Json ToJson(const DemandModel& m) {
  const SourceModel& s = m.source();
  return Json{{"schema", kSchema},
              {"type", "demand_model"},
              {"name", m.name()},
              {"units", "W"},
              {"x_alphabet", ToJson(m.alphabet())},
              {"hypotheses",
               Json::array({Json{{"label", m.label(Hypothesis::kH0)},
                                 {"p_x", std::vector<double>(s.p_x_h0().probs().begin(),
                                                             s.p_x_h0().probs().end())}},
                            Json{{"label", m.label(Hypothesis::kH1)},
                                 {"p_x", std::vector<double>(s.p_x_h1().probs().begin(),
                                                             s.p_x_h1().probs().end())}}})},
              {"prior_h0", s.prior_h0()}};
}

// {"n": ..., "delta": ..., "omega": ..., "variant": "np" | "bayes",
//  "xi": ..., "epsilon_prime": ..., "log_base": ...}
inline TwoPhaseConfig TwoPhaseConfigFromJson(const Json& j) {
  internal::CheckSchema(j);
  return internal::Guard([&] {
    TwoPhaseConfig c;
    const double n = internal::Field(j, "n").get<double>();
    if (!(n >= 1.0) || n != std::floor(n)) throw InvalidInput("n must be a positive integer");
    c.n = static_cast<std::size_t>(n);
    c.delta = internal::Field(j, "delta").get<double>();
    c.omega = internal::Field(j, "omega").get<double>();
    const std::string v = j.value("variant", std::string("bayes"));
    if (v == "np") {
      c.variant = TwoPhaseVariant::kNpRhoP;
    } else if (v == "bayes") {
      c.variant = TwoPhaseVariant::kBayesRhoQ;
    } else {
      throw InvalidInput("variant must be 'np' or 'bayes'");
    }
    if (j.contains("xi")) c.xi = j.at("xi").get<double>();
    if (j.contains("epsilon_prime")) c.epsilon_prime = j.at("epsilon_prime").get<double>();
    if (j.contains("log_base")) c.log_base = j.at("log_base").get<double>();
    return c;
  });
}

inline Json ToJson(const TwoPhaseConfig& c) {
  Json j{{"schema", kSchema},
         {"type", "two_phase_config"},
         {"n", c.n},
         {"delta", c.delta},
         {"omega", c.omega},
         {"variant", c.variant == TwoPhaseVariant::kNpRhoP ? "np" : "bayes"},
         {"log_base", c.log_base}};
  if (c.xi) j["xi"] = *c.xi;
  if (c.epsilon_prime) j["epsilon_prime"] = *c.epsilon_prime;
  return j;
}

// Observation model for the exact oracles. Either per-slot pmfs
//   {"n": 3, "y_alphabet": [...], "p_h0": [...], "p_h1": [...]}
// or explicit joint pmfs over y^n in lexicographic order
//   {"n": 2, "y_alphabet": [...], "joint_h0": [...], "joint_h1": [...]}.
inline TestSpec TestSpecFromJson(const Json& j) {
  internal::CheckSchema(j);
  return internal::Guard([&] {
    const double n = internal::Field(j, "n").get<double>();
    if (!(n >= 1.0) || n != std::floor(n) || n > 1e9) {
      throw InvalidInput("n must be a positive integer");
    }
    Alphabet ys(internal::Numbers(internal::Field(j, "y_alphabet"), "y_alphabet"));
    if (j.contains("joint_h0") || j.contains("joint_h1")) {
      return TestSpec::Joint(std::move(ys), static_cast<int>(n),
                             internal::Numbers(internal::Field(j, "joint_h0"), "joint_h0"),
                             internal::Numbers(internal::Field(j, "joint_h1"), "joint_h1"));
    }
    return TestSpec::Iid(Pmf(ys, internal::Numbers(internal::Field(j, "p_h0"), "p_h0")),
                         Pmf(ys, internal::Numbers(internal::Field(j, "p_h1"), "p_h1")),
                         static_cast<int>(n));
  });
}

// ---------------------------------------------------------------------------
// CSV

inline void WriteSweepCsv(std::ostream& out, const SweepTable& t) {
  out << "s,value_nats,tau_star,dist_h0,dist_h1,converged\n";
  for (const auto& r : t.rows) {
    out << FormatNumber(r.s) << ',' << (r.error ? "nan" : FormatNumber(r.value)) << ','
        << (r.tau_star ? FormatNumber(*r.tau_star) : "") << ',' << FormatNumber(r.dist_h0)
        << ',' << FormatNumber(r.dist_h1) << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

inline void WriteTrendCsv(std::ostream& out, const std::vector<TrendRow>& rows) {
  out << "n,error,exponent_nats\n";
  for (const auto& r : rows) {
    out << r.n << ',' << FormatNumber(r.error) << ',' << FormatNumber(r.exponent) << '\n';
  }
}

inline void WriteTraceCsv(std::ostream& out, const PolicyTrace& t) {
  out << "slot,x,y,phase,distortion\n";
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    out << i << ',' << FormatNumber(t.x[i]) << ',' << FormatNumber(t.y[i]) << ',' << t.phase(i)
        << ',' << FormatNumber(t.distortion[i]) << '\n';
  }
}

inline void WriteSupplyTraceCsv(std::ostream& out, const SupplyTrace& t) {
  out << "slot,demand_w,supply_w,renewable_w\n";
  for (std::size_t i = 0; i < t.demand.size(); ++i) {
    out << i << ',' << FormatNumber(t.demand[i]) << ',' << FormatNumber(t.supply[i]) << ','
        << FormatNumber(t.renewable[i]) << '\n';
  }
}

namespace internal {

inline std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
      cell.remove_suffix(1);
    }
    out.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double ParseNumber(std::string_view cell, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw InvalidInput("line " + std::to_string(line_no) + ": '" + std::string(cell) +
                       "' is not a number");
  }
  return v;
}

}  // namespace internal

// Reads the demand column of a trace CSV. The header must name a
// `demand_w` column; other columns are ignored.
inline std::vector<double> ReadDemandCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("trace CSV is empty");
  const auto header = internal::SplitCsv(line);
  std::optional<std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "demand_w") col = i;
  }
  if (!col) throw InvalidInput("trace CSV header lacks a demand_w column");
  std::vector<double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = internal::SplitCsv(line);
    if (cells.size() <= *col) {
      throw InvalidInput("line " + std::to_string(line_no) + ": missing demand_w value");
    }
    out.push_back(internal::ParseNumber(cells[*col], line_no));
  }
  return out;
}

inline std::vector<double> ReadDemandCsvFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  return ReadDemandCsv(in);
}

}  // namespace privexp::io

#endif  // PRIVEXP_SERIALIZATION_HPP_
