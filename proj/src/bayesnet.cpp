// Copyright 2026 The coilsense Authors
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

#include "coilsense/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "coilsense/errors.hpp"

namespace coilsense::bn {

namespace {

constexpr double kRowTolerance = 1e-9;

std::size_t card(std::span<const DiscreteVariable> vars, int v) {
  return static_cast<std::size_t>(vars[static_cast<std::size_t>(v)].cardinality);
}

void check_sample(std::span<const DiscreteVariable> vars, std::span<const int> sample) {
  require(sample.size() == vars.size(), Errc::invalid_input,
          "data assignment does not cover every variable");
  for (std::size_t v = 0; v < vars.size(); ++v) {
    require(sample[v] >= 0 && sample[v] < vars[v].cardinality, Errc::invalid_input,
            "category out of range in data");
  }
}

/// Dense table over an ordered variable list; the last variable varies fastest.
struct Factor {
  std::vector<int> vars;
  std::vector<std::size_t> cards;
  std::vector<double> values;

  [[nodiscard]] std::size_t index(std::span<const int> full) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      idx = idx * cards[i] + static_cast<std::size_t>(full[static_cast<std::size_t>(vars[i])]);
    }
    return idx;
  }
  [[nodiscard]] bool contains(int v) const {
    return std::find(vars.begin(), vars.end(), v) != vars.end();
  }
};

/// Advances `full` over the variables of `f` like an odometer; false once it wraps.
bool next_assignment(const Factor& f, std::vector<int>& full) {
  for (std::size_t i = f.vars.size(); i-- > 0;) {
    auto& slot = full[static_cast<std::size_t>(f.vars[i])];
    if (static_cast<std::size_t>(++slot) < f.cards[i]) {
      return true;
    }
    slot = 0;
  }
  return false;
}

Factor make_factor(std::vector<int> vars, std::span<const DiscreteVariable> all) {
  Factor f;
  f.vars = std::move(vars);
  std::size_t size = 1;
  for (const int v : f.vars) {
    f.cards.push_back(card(all, v));
    size *= f.cards.back();
  }
  f.values.assign(size, 0.0);
  return f;
}

Factor table_factor(const BayesNet& net, int v) {
  const auto& table = net.table(v);
  auto vars = table.parents;
  vars.push_back(v);
  Factor f = make_factor(std::move(vars), net.variables());
  // Parents-major, child-fastest: identical to the stored row layout.
  f.values = table.probs;
  return f;
}

Factor product(const Factor& a, const Factor& b, std::span<const DiscreteVariable> all) {
  auto vars = a.vars;
  for (const int v : b.vars) {
    if (!a.contains(v)) {
      vars.push_back(v);
    }
  }
  Factor out = make_factor(std::move(vars), all);
  std::vector<int> full(all.size(), 0);
  std::size_t i = 0;
  do {
    out.values[i++] = a.values[a.index(full)] * b.values[b.index(full)];
  } while (next_assignment(out, full));
  return out;
}

Factor sum_out(const Factor& f, int v, std::span<const DiscreteVariable> all) {
  std::vector<int> vars;
  std::copy_if(f.vars.begin(), f.vars.end(), std::back_inserter(vars),
               [v](int u) { return u != v; });
  Factor out = make_factor(std::move(vars), all);
  std::vector<int> full(all.size(), 0);
  std::size_t i = 0;
  do {
    out.values[out.index(full)] += f.values[i++];
  } while (next_assignment(f, full));
  return out;
}

Factor reduce(const Factor& f, const Evidence& evidence, std::span<const DiscreteVariable> all) {
  std::vector<int> vars;
  std::copy_if(f.vars.begin(), f.vars.end(), std::back_inserter(vars),
               [&](int u) { return !evidence.contains(u); });
  if (vars.size() == f.vars.size()) {
    return f;
  }
  Factor out = make_factor(std::move(vars), all);
  std::vector<int> full(all.size(), 0);
  for (const auto& [v, value] : evidence) {
    full[static_cast<std::size_t>(v)] = value;
  }
  std::size_t i = 0;
  do {
    out.values[i++] = f.values[f.index(full)];
  } while (next_assignment(out, full));
  return out;
}

/// Number of distinct other variables sharing a factor with `v`.
std::size_t degree(const std::vector<Factor>& factors, int v) {
  std::set<int> neighbours;
  for (const auto& f : factors) {
    if (f.contains(v)) {
      neighbours.insert(f.vars.begin(), f.vars.end());
    }
  }
  neighbours.erase(v);
  return neighbours.size();
}

}  // namespace

std::size_t ConditionalTable::row_count(std::span<const DiscreteVariable> vars) const {
  std::size_t rows = 1;
  for (const int p : parents) {
    rows *= card(vars, p);
  }
  return rows;
}

std::span<const double> ConditionalTable::row(std::span<const DiscreteVariable> vars,
                                              std::size_t r) const {
  const std::size_t width = card(vars, child);
  return std::span<const double>(probs).subspan(r * width, width);
}

std::size_t parent_row(std::span<const DiscreteVariable> vars, std::span<const int> parents,
                       std::span<const int> sample) {
  std::size_t row = 0;
  for (const int p : parents) {
    row = row * card(vars, p) + static_cast<std::size_t>(sample[static_cast<std::size_t>(p)]);
  }
  return row;
}

void check_acyclic(std::size_t n_vars, const Structure& structure) {
  require(structure.size() == n_vars, Errc::invalid_structure,
          "structure must list parents for every variable");
  for (std::size_t v = 0; v < n_vars; ++v) {
    std::set<int> seen;
    for (const int p : structure[v]) {
      require(p >= 0 && static_cast<std::size_t>(p) < n_vars && static_cast<std::size_t>(p) != v,
              Errc::invalid_structure, "invalid parent index");
      require(seen.insert(p).second, Errc::invalid_structure, "duplicate parent");
    }
  }
  // Kahn's algorithm.
  std::vector<std::size_t> indegree(n_vars, 0);
  for (std::size_t v = 0; v < n_vars; ++v) {
    indegree[v] = structure[v].size();
  }
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n_vars; ++v) {
    if (indegree[v] == 0) {
      ready.push_back(v);
    }
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::size_t u = ready.back();
    ready.pop_back();
    ++visited;
    for (std::size_t v = 0; v < n_vars; ++v) {
      for (const int p : structure[v]) {
        if (static_cast<std::size_t>(p) == u && --indegree[v] == 0) {
          ready.push_back(v);
        }
      }
    }
  }
  require(visited == n_vars, Errc::invalid_structure, "structure contains a cycle");
}

BayesNet::BayesNet(std::vector<DiscreteVariable> variables, std::vector<ConditionalTable> tables)
    : vars_(std::move(variables)), tables_(std::move(tables)) {
  require(tables_.size() == vars_.size(), Errc::invalid_structure,
          "every variable needs exactly one table");
  std::set<std::string> names;
  for (const auto& v : vars_) {
    require(v.cardinality >= 1, Errc::invalid_input, "cardinality must be at least 1");
    require(names.insert(v.name).second, Errc::invalid_input, "duplicate variable name");
  }
  check_acyclic(vars_.size(), structure());
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    const auto& t = tables_[v];
    require(t.child == static_cast<int>(v), Errc::invalid_structure, "table order mismatch");
    const std::size_t rows = t.row_count(vars_);
    require(t.probs.size() == rows * card(vars_, t.child), Errc::invalid_input,
            "table size does not match cardinalities");
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (const double p : t.row(vars_, r)) {
        require(p >= 0.0, Errc::invalid_input, "negative probability");
        sum += p;
      }
      require(std::abs(sum - 1.0) <= kRowTolerance, Errc::invalid_input,
              "table row does not sum to 1");
    }
  }
}

Structure BayesNet::structure() const {
  Structure s;
  s.reserve(tables_.size());
  for (const auto& t : tables_) {
    s.push_back(t.parents);
  }
  return s;
}

int BayesNet::index_of(std::string_view name) const {
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    if (vars_[v].name == name) {
      return static_cast<int>(v);
    }
  }
  throw Error(Errc::invalid_input, "no variable named '" + std::string(name) + "'");
}

double BayesNet::joint(std::span<const int> assignment) const {
  check_sample(vars_, assignment);
  double p = 1.0;
  for (const auto& t : tables_) {
    const std::size_t r = parent_row(vars_, t.parents, assignment);
    p *= t.row(vars_, r)[static_cast<std::size_t>(assignment[static_cast<std::size_t>(t.child)])];
  }
  return p;
}

ConditionalTable fit_cpt(std::span<const DiscreteVariable> vars, int child,
                         std::vector<int> parents, std::span<const Assignment> data,
                         double alpha) {
  require(alpha >= 0.0, Errc::invalid_parameter, "alpha must be non-negative");
  require(child >= 0 && static_cast<std::size_t>(child) < vars.size(), Errc::invalid_input,
          "child index out of range");
  for (const int p : parents) {
    require(p >= 0 && static_cast<std::size_t>(p) < vars.size() && p != child,
            Errc::invalid_input, "parent index out of range");
  }
  ConditionalTable table{child, std::move(parents), {}};
  const std::size_t width = card(vars, child);
  const std::size_t rows = table.row_count(vars);
  std::vector<double> counts(rows * width, 0.0);
  for (const auto& sample : data) {
    check_sample(vars, sample);
    const std::size_t r = parent_row(vars, table.parents, sample);
    counts[r * width + static_cast<std::size_t>(sample[static_cast<std::size_t>(child)])] += 1.0;
  }
  table.probs.resize(counts.size());
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      total += counts[r * width + k];
    }
    const double denom = total + alpha * static_cast<double>(width);
    for (std::size_t k = 0; k < width; ++k) {
      table.probs[r * width + k] = denom > 0.0 ? (counts[r * width + k] + alpha) / denom
                                               : 1.0 / static_cast<double>(width);
    }
  }
  return table;
}

BayesNet fit(std::vector<DiscreteVariable> vars, const Structure& structure,
             std::span<const Assignment> data, double alpha) {
  check_acyclic(vars.size(), structure);
  std::vector<ConditionalTable> tables;
  tables.reserve(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    tables.push_back(fit_cpt(vars, static_cast<int>(v), structure[v], data, alpha));
  }
  return BayesNet(std::move(vars), std::move(tables));
}

std::vector<double> variable_elimination(const BayesNet& net, int query, const Evidence& evidence) {
  const auto& vars = net.variables();
  require(query >= 0 && static_cast<std::size_t>(query) < vars.size(), Errc::invalid_query,
          "query variable out of range");
  require(!evidence.contains(query), Errc::invalid_query, "query variable is observed");
  for (const auto& [v, value] : evidence) {
    require(v >= 0 && static_cast<std::size_t>(v) < vars.size(), Errc::invalid_input,
            "evidence variable out of range");
    require(value >= 0 && value < vars[static_cast<std::size_t>(v)].cardinality,
            Errc::invalid_input, "evidence category out of range");
  }

  std::vector<Factor> factors;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    factors.push_back(reduce(table_factor(net, static_cast<int>(v)), evidence, vars));
  }

  std::vector<int> hidden;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    if (static_cast<int>(v) != query && !evidence.contains(static_cast<int>(v))) {
      hidden.push_back(static_cast<int>(v));
    }
  }
  while (!hidden.empty()) {
    auto best = hidden.begin();
    std::size_t best_degree = degree(factors, *best);
    for (auto it = hidden.begin() + 1; it != hidden.end(); ++it) {
      const std::size_t d = degree(factors, *it);
      if (d < best_degree) {
        best = it;
        best_degree = d;
      }
    }
    const int v = *best;
    hidden.erase(best);

    std::vector<Factor> rest;
    std::optional<Factor> joined;
    for (auto& f : factors) {
      if (f.contains(v)) {
        joined = joined ? product(*joined, f, vars) : std::move(f);
      } else {
        rest.push_back(std::move(f));
      }
    }
    if (joined) {
      rest.push_back(sum_out(*joined, v, vars));
    }
    factors = std::move(rest);
  }

  Factor result = make_factor({query}, vars);
  std::fill(result.values.begin(), result.values.end(), 1.0);
  for (const auto& f : factors) {
    result = product(result, f, vars);
  }
  // Only the query variable remains in scope.
  const double total = std::accumulate(result.values.begin(), result.values.end(), 0.0);
  require(total > 0.0, Errc::zero_evidence, "evidence has zero probability");
  for (auto& p : result.values) {
    p /= total;
  }
  return result.values;
}

double family_score(std::span<const DiscreteVariable> vars, int child, std::span<const int> parents,
                    std::span<const Assignment> data) {
  const std::size_t width = card(vars, child);
  std::size_t rows = 1;
  for (const int p : parents) {
    rows *= card(vars, p);
  }
  std::vector<double> counts(rows * width, 0.0);
  for (const auto& sample : data) {
    check_sample(vars, sample);
    const std::size_t r = parent_row(vars, parents, sample);
    counts[r * width + static_cast<std::size_t>(sample[static_cast<std::size_t>(child)])] += 1.0;
  }
  const double r_child = static_cast<double>(width);
  double score = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double n_row = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      const double n = counts[r * width + k];
      n_row += n;
      score += std::lgamma(n + 1.0);
    }
    score += std::lgamma(r_child) - std::lgamma(n_row + r_child);
  }
  return score;
}

double k2_score(std::span<const DiscreteVariable> vars, const Structure& structure,
                std::span<const Assignment> data) {
  check_acyclic(vars.size(), structure);
  double total = 0.0;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    total += family_score(vars, static_cast<int>(v), structure[v], data);
  }
  return total;
}

BayesNet structure_search(std::vector<DiscreteVariable> vars, std::span<const Assignment> data,
                          int max_parents, double alpha, std::vector<int> ordering) {
  require(max_parents >= 0, Errc::invalid_parameter, "max_parents must be non-negative");
  if (ordering.empty()) {
    ordering.resize(vars.size());
    std::iota(ordering.begin(), ordering.end(), 0);
  }
  {
    auto sorted = ordering;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(vars.size());
    std::iota(expected.begin(), expected.end(), 0);
    require(sorted == expected, Errc::invalid_parameter, "ordering must permute the variables");
  }
  for (const auto& sample : data) {
    check_sample(vars, sample);
  }

  Structure structure(vars.size());
  for (std::size_t pos = 0; pos < ordering.size(); ++pos) {
    const int child = ordering[pos];
    auto& parents = structure[static_cast<std::size_t>(child)];
    double current = family_score(vars, child, parents, data);
    while (static_cast<int>(parents.size()) < max_parents) {
      int best = -1;
      double best_score = current;
      for (std::size_t q = 0; q < pos; ++q) {
        const int candidate = ordering[q];
        if (std::find(parents.begin(), parents.end(), candidate) != parents.end()) {
          continue;
        }
        auto trial = parents;
        trial.push_back(candidate);
        const double s = family_score(vars, child, trial, data);
        if (s > best_score) {
          best = candidate;
          best_score = s;
        }
      }
      if (best < 0) {
        break;
      }
      parents.push_back(best);
      current = best_score;
    }
    // Canonical parent order: position in the search ordering.
    std::sort(parents.begin(), parents.end(), [&](int a, int b) {
      return std::find(ordering.begin(), ordering.end(), a) <
             std::find(ordering.begin(), ordering.end(), b);
    });
  }
  return fit(std::move(vars), structure, data, alpha);
}

ZoneMatrix ZoneMatrix::identity(int n) {
  ZoneMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

ZoneMatrix ZoneMatrix::uniform(int n) {
  ZoneMatrix m(n);
  std::fill(m.data.begin(), m.data.end(), 1.0 / n);
  return m;
}

std::vector<DiscreteVariable> transition_variables(int zones, int eigenvalue_categories) {
  return {{std::string(kLastPosition), zones},
          {std::string(kEigenvalue), eigenvalue_categories},
          {std::string(kNowPosition), zones}};
}

ZoneMatrix transition_matrix(const BayesNet& net, int lambda_value) {
  const int last = net.index_of(kLastPosition);
  const int eig = net.index_of(kEigenvalue);
  const int now = net.index_of(kNowPosition);
  const auto& vars = net.variables();
  const int zones = vars[static_cast<std::size_t>(now)].cardinality;
  require(vars[static_cast<std::size_t>(last)].cardinality == zones, Errc::invalid_input,
          "last and current position disagree on zone count");
  require(lambda_value >= 0 && lambda_value < vars[static_cast<std::size_t>(eig)].cardinality,
          Errc::invalid_input, "eigenvalue category out of range");
  ZoneMatrix m(zones);
  for (int i = 0; i < zones; ++i) {
    std::vector<double> row;
    try {
      row = variable_elimination(net, now, {{last, i}, {eig, lambda_value}});
    } catch (const Error& e) {
      if (e.code() != Errc::zero_evidence) {
        throw;
      }
      row.assign(static_cast<std::size_t>(zones), 1.0 / zones);
    }
    std::copy(row.begin(), row.end(), m.data.begin() + static_cast<std::ptrdiff_t>(i) * zones);
  }
  return m;
}

}  // namespace coilsense::bn
