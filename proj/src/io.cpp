// Copyright 2026-present the rsaa authors
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

#include "rsaa/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rsaa/error.hpp"

namespace rsaa::io {
namespace {

const json& need(const json& j, const char* key, const char* ctx) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(fmt::format("{}: missing key '{}'", ctx, key));
  return j.at(key);
}

double num(const json& j, const char* key, const char* ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number()) throw ConfigError(fmt::format("{}: '{}' must be a number", ctx, key));
  return v.get<double>();
}

double num_or(const json& j, const char* key, double fallback, const char* ctx) {
  return j.contains(key) ? num(j, key, ctx) : fallback;
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback, const char* ctx) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(fmt::format("{}: '{}' must be a non-negative integer", ctx, key));
  }
  return v.get<std::size_t>();
}

std::string str(const json& j, const char* key, const char* ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_string()) throw ConfigError(fmt::format("{}: '{}' must be a string", ctx, key));
  return v.get<std::string>();
}

std::vector<double> vec(const json& v, const char* ctx) {
  if (!v.is_array()) throw ConfigError(fmt::format("{}: expected an array of numbers", ctx));
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(fmt::format("{}: expected an array of numbers", ctx));
    out.push_back(e.get<double>());
  }
  return out;
}

bool parse_number(const std::string& field, double& out) {
  std::size_t b = field.find_first_not_of(" \t\r");
  std::size_t e = field.find_last_not_of(" \t\r");
  if (b == std::string::npos) return false;
  const std::string t = field.substr(b, e - b + 1);
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace

DivergenceSpec parse_divergence(const json& j) {
  const std::string kind = str(j, "kind", "divergence");
  if (kind == "avar") return AVaRSpec{num(j, "alpha", "divergence")};
  if (kind == "entropic") return EntropicSpec{num(j, "gamma", "divergence")};
  if (kind == "polynomial") return PolynomialSpec{num(j, "p", "divergence")};
  throw ConfigError(fmt::format("divergence: unknown kind '{}'", kind));
}

AnalyticDistribution parse_marginal(const json& j) {
  const std::string kind = str(j, "kind", "distribution");
  if (kind == "uniform") {
    return AnalyticDistribution::make(UniformDist{num(j, "a", "distribution"), num(j, "b", "distribution")});
  }
  if (kind == "truncated_normal") {
    return AnalyticDistribution::make(TruncNormalDist{num(j, "mu", "distribution"), num(j, "sigma", "distribution"),
                                                      num(j, "lo", "distribution"), num(j, "hi", "distribution")});
  }
  if (kind == "discrete") {
    DiscreteDist d;
    const json& atoms = need(j, "atoms", "distribution");
    if (!atoms.is_array()) throw ConfigError("distribution: 'atoms' must be an array");
    for (const auto& a : atoms) {
      const auto p = vec(a, "distribution atom");
      if (p.size() != 2) throw ConfigError("distribution: atoms are [value, probability] pairs");
      d.atoms.emplace_back(p[0], p[1]);
    }
    return AnalyticDistribution::make(std::move(d));
  }
  throw ConfigError(fmt::format("distribution: unknown kind '{}'", kind));
}

ZDistribution parse_distribution(const json& j) {
  ZDistribution out;
  const json& list = j.is_object() && j.contains("marginals") ? j.at("marginals") : j;
  if (list.is_array()) {
    for (const auto& m : list) out.marginals.push_back(parse_marginal(m));
  } else {
    out.marginals.push_back(parse_marginal(list));
  }
  if (out.marginals.empty()) throw ConfigError("distribution: no marginals");
  return out;
}

ParameterBox parse_box(const json& j) {
  return ParameterBox(vec(need(j, "lo", "box"), "box.lo"), vec(need(j, "hi", "box"), "box.hi"));
}

GridConfig parse_grid(const json& j) {
  GridConfig g;
  if (j.is_null()) return g;
  g.coarse_per_dim = static_cast<int>(count_or(j, "coarse_per_dim", static_cast<std::size_t>(g.coarse_per_dim), "grid"));
  g.refine_rounds = static_cast<int>(count_or(j, "refine_rounds", static_cast<std::size_t>(g.refine_rounds), "grid"));
  g.shrink = num_or(j, "shrink", g.shrink, "grid");
  g.validate();
  return g;
}

GoalFunction parse_goal(const json& j, const ParameterBox& box) {
  const std::string type = str(j, "type", "goal");
  if (type == "constant") {
    ConstantGoal g;
    g.c = num(j, "c", "goal");
    g.m = count_or(j, "m", box.dim(), "goal");
    g.d = count_or(j, "d", 1, "goal");
    return GoalFunction(g);
  }
  if (type == "holder") {
    return GoalFunction(make_holder_preset(str(j, "preset", "goal"), box, count_or(j, "d", box.dim(), "goal"),
                                           num_or(j, "beta", 1.0, "goal")));
  }
  if (type == "pl") {
    PLGoal g;
    g.m = count_or(j, "m", box.dim(), "goal");
    g.d = count_or(j, "d", 1, "goal");
    const json& T = need(j, "T", "goal");
    if (!T.is_array()) throw ConfigError("goal: 'T' must be an array of rows");
    for (const auto& row : T) {
      const auto r = vec(row, "goal.T");
      g.T.insert(g.T.end(), r.begin(), r.end());
    }
    const json& regions = need(j, "regions", "goal");
    if (!regions.is_array()) throw ConfigError("goal: 'regions' must be an array");
    for (const auto& rj : regions) {
      PLRegion r;
      r.Lambda = vec(need(rj, "Lambda", "goal region"), "goal region Lambda");
      r.b = num_or(rj, "b", 0.0, "goal region");
      const json& conds = need(rj, "conditions", "goal region");
      if (!conds.is_array()) throw ConfigError("goal region: 'conditions' must be an array");
      for (const auto& cj : conds) {
        PLCondition c;
        c.L = vec(need(cj, "L", "goal condition"), "goal condition L");
        c.a = num_or(cj, "a", 0.0, "goal condition");
        if (cj.contains("closed")) {
          if (!cj.at("closed").is_boolean()) throw ConfigError("goal condition: 'closed' must be a boolean");
          c.closed = cj.at("closed").get<bool>();
        }
        r.conditions.push_back(std::move(c));
      }
      g.regions.push_back(std::move(r));
    }
    return GoalFunction(std::move(g));
  }
  throw ConfigError(fmt::format("goal: unknown type '{}'", type));
}

ZSample parse_sample(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("sample: expected a non-empty array");
  ZSample s;
  if (j.front().is_array()) {
    s.d = j.front().size();
    for (const auto& row : j) {
      const auto r = vec(row, "sample row");
      if (r.size() != s.d) throw ConfigError("sample: rows differ in width");
      s.data.insert(s.data.end(), r.begin(), r.end());
    }
  } else {
    s.d = 1;
    s.data = vec(j, "sample");
  }
  if (s.d == 0) throw ConfigError("sample: empty rows");
  return s;
}

ZSample read_csv_sample(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open CSV '{}'", path.string()));
  ZSample s;
  s.d = 0;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      double v = 0.0;
      if (!parse_number(field, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError(fmt::format("{}:{}: non-numeric field", path.string(), lineno));
    }
    first = false;
    if (s.d == 0) s.d = row.size();
    if (row.size() != s.d) throw ConfigError(fmt::format("{}:{}: expected {} fields", path.string(), lineno, s.d));
    s.data.insert(s.data.end(), row.begin(), row.end());
  }
  if (s.d == 0 || s.data.empty()) throw ConfigError(fmt::format("CSV '{}' holds no observations", path.string()));
  return s;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

json resolve_problem(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ConfigError("problem: expected an object");
  json out = j;
  for (const char* key : {"goal", "divergence", "distribution", "box", "grid"}) {
    const std::string ref = std::string(key) + "_file";
    if (out.contains(ref)) {
      if (out.contains(key)) throw ConfigError(fmt::format("problem: both '{}' and '{}' given", key, ref));
      out[key] = load_json_file(base / out.at(ref).get<std::string>());
      out.erase(ref);
    }
  }
  if (out.contains("sample_csv")) {
    if (out.contains("sample")) throw ConfigError("problem: both 'sample' and 'sample_csv' given");
    const ZSample s = read_csv_sample(base / out.at("sample_csv").get<std::string>());
    if (s.d == 1) {
      out["sample"] = s.data;
    } else {
      json rows = json::array();
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto r = s.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
      }
      out["sample"] = std::move(rows);
    }
    out.erase("sample_csv");
  }
  return out;
}

Problem parse_problem(const json& j) {
  Problem p;
  if (j.contains("box")) p.box = parse_box(j.at("box"));
  if (j.contains("goal")) {
    if (!p.box) throw ConfigError("problem: a goal needs a box");
    p.goal = parse_goal(j.at("goal"), *p.box);
  }
  if (j.contains("divergence")) p.pair = Divergence::make(parse_divergence(j.at("divergence")));
  if (j.contains("sample")) p.sample = parse_sample(j.at("sample"));
  if (j.contains("distribution")) p.distribution = parse_distribution(j.at("distribution"));
  if (j.contains("grid")) p.grid = parse_grid(j.at("grid"));
  return p;
}

const ParameterBox& Problem::need_box() const {
  if (!box) throw ConfigError("problem: missing 'box'");
  return *box;
}
const GoalFunction& Problem::need_goal() const {
  if (!goal) throw ConfigError("problem: missing 'goal'");
  return *goal;
}
const Divergence& Problem::need_pair() const {
  if (!pair) throw ConfigError("problem: missing 'divergence'");
  return *pair;
}
const ZSample& Problem::need_sample() const {
  if (!sample) throw ConfigError("problem: missing 'sample'");
  return *sample;
}
const ZDistribution& Problem::need_distribution() const {
  if (!distribution) throw ConfigError("problem: missing 'distribution'");
  return *distribution;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw InvalidParameter("write_csv: header/column count mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw InvalidParameter("write_csv: ragged columns");
  }
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << format_double(columns[k][i]);
    out << '\n';
  }
  if (!out) throw ConfigError(fmt::format("error writing '{}'", path.string()));
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace rsaa::io
