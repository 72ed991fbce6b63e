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

#ifndef COILSENSE_BAYESNET_HPP
#define COILSENSE_BAYESNET_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/**
 * \file
 * \brief Discrete Bayesian networks: Dirichlet-smoothed CPT estimation, exact inference by
 * variable elimination, and K2 search-and-score structure learning.
 *
 * Conditional tables are stored row-major: one row per parent assignment, rows ordered
 * lexicographically by the parent list (first parent most significant), the child's category
 * varying fastest inside a row.
 */

namespace coilsense::bn {

struct DiscreteVariable {
  std::string name;
  int cardinality = 2;

  friend bool operator==(const DiscreteVariable&, const DiscreteVariable&) = default;
};

struct ConditionalTable {
  int child = 0;
  std::vector<int> parents;
  std::vector<double> probs;

  [[nodiscard]] std::size_t row_count(std::span<const DiscreteVariable> vars) const;
  [[nodiscard]] std::span<const double> row(std::span<const DiscreteVariable> vars,
                                            std::size_t r) const;

  friend bool operator==(const ConditionalTable&, const ConditionalTable&) = default;
};

/// One category per network variable, in variable order.
using Assignment = std::vector<int>;
/// Observed variable index -> category.
using Evidence = std::map<int, int>;
/// Parent list of every variable.
using Structure = std::vector<std::vector<int>>;

/// Row index of the parent assignment found in `sample`.
std::size_t parent_row(std::span<const DiscreteVariable> vars, std::span<const int> parents,
                       std::span<const int> sample);

/// Throws `Errc::invalid_structure` if the parent lists contain a cycle or bad indices.
void check_acyclic(std::size_t n_vars, const Structure& structure);

/// Immutable network; the constructor checks every invariant.
class BayesNet {
 public:
  BayesNet(std::vector<DiscreteVariable> variables, std::vector<ConditionalTable> tables);

  [[nodiscard]] const std::vector<DiscreteVariable>& variables() const noexcept { return vars_; }
  [[nodiscard]] const std::vector<ConditionalTable>& tables() const noexcept { return tables_; }
  [[nodiscard]] const ConditionalTable& table(int v) const { return tables_.at(static_cast<std::size_t>(v)); }
  [[nodiscard]] const std::vector<int>& parents(int v) const { return table(v).parents; }
  [[nodiscard]] std::size_t size() const noexcept { return vars_.size(); }
  [[nodiscard]] Structure structure() const;
  /// Index of the variable called `name`; throws `Errc::invalid_input` if absent.
  [[nodiscard]] int index_of(std::string_view name) const;
  /// Joint probability of a complete assignment.
  [[nodiscard]] double joint(std::span<const int> assignment) const;

  friend bool operator==(const BayesNet&, const BayesNet&) = default;

 private:
  std::vector<DiscreteVariable> vars_;
  std::vector<ConditionalTable> tables_;
};

/// P = (count + alpha) / (row_total + alpha * cardinality). With alpha = 0, rows without data
/// fall back to uniform.
ConditionalTable fit_cpt(std::span<const DiscreteVariable> vars, int child,
                         std::vector<int> parents, std::span<const Assignment> data, double alpha);

/// Fits every family of `structure`.
BayesNet fit(std::vector<DiscreteVariable> vars, const Structure& structure,
             std::span<const Assignment> data, double alpha);

/// Exact posterior P(query | evidence). Hidden variables are eliminated in min-degree order
/// (ties to the lowest index).
std::vector<double> variable_elimination(const BayesNet& net, int query, const Evidence& evidence);

/// Log marginal likelihood of one family under the K2 prior (all Dirichlet pseudo-counts 1).
double family_score(std::span<const DiscreteVariable> vars, int child, std::span<const int> parents,
                    std::span<const Assignment> data);

/// Sum of `family_score` over all families.
double k2_score(std::span<const DiscreteVariable> vars, const Structure& structure,
                std::span<const Assignment> data);

/// Greedy K2 search: each variable, in `ordering` (identity when empty), repeatedly adopts the
/// predecessor that most improves its family score until nothing improves or `max_parents` is
/// reached. The learned structure is then fitted with smoothing `alpha`.
BayesNet structure_search(std::vector<DiscreteVariable> vars, std::span<const Assignment> data,
                          int max_parents, double alpha = 1.0, std::vector<int> ordering = {});

/// Row-major square row-stochastic matrix over zones.
struct ZoneMatrix {
  int zones = 0;
  std::vector<double> data;

  ZoneMatrix() = default;
  explicit ZoneMatrix(int n) : zones(n), data(static_cast<std::size_t>(n) * n, 0.0) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * zones + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * zones + j]; }
  [[nodiscard]] std::span<const double> row(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * zones, static_cast<std::size_t>(zones)};
  }
  static ZoneMatrix identity(int n);
  static ZoneMatrix uniform(int n);

  friend bool operator==(const ZoneMatrix&, const ZoneMatrix&) = default;
};

inline constexpr std::string_view kLastPosition = "last_position";
inline constexpr std::string_view kEigenvalue = "eigenvalue";
inline constexpr std::string_view kNowPosition = "now_position";

/// The one-step template (last_position, eigenvalue, now_position), in that order.
std::vector<DiscreteVariable> transition_variables(int zones, int eigenvalue_categories);

/// M[i][j] = P(now_position = j | last_position = i, eigenvalue = lambda_value) by variable
/// elimination. A row whose evidence has zero probability is returned uniform.
ZoneMatrix transition_matrix(const BayesNet& net, int lambda_value);

}  // namespace coilsense::bn

#endif
