#ifndef KRONADAPT_PLANNER_HPP
#define KRONADAPT_PLANNER_HPP

#include <string>
#include <vector>

#include "kronadapt/kron.hpp"

namespace kronadapt {

struct BudgetQuery {
  Index d_in = 1;
  Index d_out = 1;
  long long budget = 0;    // max trainable parameters
  Index r_star_hint = 8;   // expected update rank in reshaped space
  Index r1_min = 2;
  Index r1_max = 4;
};

struct PlanEntry {
  KronConfig config;
  long long params = 0;
  Index max_rank = 0;
  std::vector<std::string> notes;
};

struct PlanResult {
  BudgetQuery query;
  std::vector<PlanEntry> ranked;  // best first
};

// Every (r1, r2, r) with r1 | d_out inside [r1_min, r1_max], r2 | d_in, r >= 1
// and param_count <= budget. Deterministic order (params, r1, r2, r).
// Throws InfeasibleBudgetError naming the cheapest config when nothing fits.
std::vector<KronConfig> enumerate_feasible(const BudgetQuery& query);

// Ranks candidates: prefer r >= r_star_hint, then larger r2, then smaller r1,
// then better budget utilization, then lexicographic (r1, r2, r).
PlanResult rank_configs(const BudgetQuery& query, const std::vector<KronConfig>& candidates);

}  // namespace kronadapt

#endif
