#pragma once

#include <cstddef>
#include <vector>

namespace longcoref {

/// Minimum-cost assignment on a rows x cols cost matrix (row-major vectors).
/// Returns, for every row, its assigned column, or npos when rows > cols and
/// the row is left unassigned. O(n^2 m) shortest augmenting paths with
/// potentials.
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost);

/// Maximum-weight variant; equivalent to solve_assignment on negated weights.
std::vector<std::size_t> solve_max_assignment(const std::vector<std::vector<double>>& weight);

}  // namespace longcoref
