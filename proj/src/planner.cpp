#include "kronadapt/planner.hpp"

#include <algorithm>
#include <sstream>

namespace kronadapt {

namespace {

std::vector<Index> divisors(Index n) {
  std::vector<Index> out;
  for (Index d = 1; d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

long long per_component_cost(const BudgetQuery& q, Index r1, Index r2) {
  return static_cast<long long>(r1) * (q.d_in / r2) +
         static_cast<long long>(q.d_out / r1) * r2;
}

void validate_query(const BudgetQuery& q) {
  if (q.d_in < 1 || q.d_out < 1)
    throw ConfigError("planner: d_in and d_out must be >= 1");
  if (q.budget < 1) throw ConfigError("planner: budget must be >= 1");
  if (q.r_star_hint < 1) throw ConfigError("planner: r_star_hint must be >= 1");
  if (q.r1_min < 1 || q.r1_max < q.r1_min)
    throw ConfigError("planner: need 1 <= r1_min <= r1_max");
}

}  // namespace

std::vector<KronConfig> enumerate_feasible(const BudgetQuery& query) {
  validate_query(query);

  std::vector<Index> r1s;
  for (Index r1 : divisors(query.d_out))
    if (r1 >= query.r1_min && r1 <= query.r1_max) r1s.push_back(r1);
  if (r1s.empty()) {
    std::ostringstream msg;
    msg << "planner: no divisor of d_out=" << query.d_out << " lies in the r1 range ["
        << query.r1_min << ", " << query.r1_max << "]";
    throw ConfigError(msg.str());
  }
  const std::vector<Index> r2s = divisors(query.d_in);

  std::vector<KronConfig> out;
  long long cheapest = -1;
  Index cheap_r1 = 0, cheap_r2 = 0;
  for (Index r1 : r1s) {
    for (Index r2 : r2s) {
      const long long cost = per_component_cost(query, r1, r2);
      if (cheapest < 0 || cost < cheapest) {
        cheapest = cost;
        cheap_r1 = r1;
        cheap_r2 = r2;
      }
      const long long rmax = query.budget / cost;
      for (long long r = 1; r <= rmax; ++r) {
        KronConfig cfg;
        cfg.r1 = r1;
        cfg.r2 = r2;
        cfg.r = static_cast<Index>(r);
        cfg.d_in = query.d_in;
        cfg.d_out = query.d_out;
        out.push_back(cfg);
      }
    }
  }
  if (out.empty()) {
    std::ostringstream msg;
    msg << "planner: budget " << query.budget
        << " cannot fit any config; the cheapest is (r1=" << cheap_r1 << ", r2="
        << cheap_r2 << ", r=1) at " << cheapest << " parameters";
    throw InfeasibleBudgetError(msg.str());
  }
  std::sort(out.begin(), out.end(), [](const KronConfig& a, const KronConfig& b) {
    const long long pa = param_count(a), pb = param_count(b);
    if (pa != pb) return pa < pb;
    if (a.r1 != b.r1) return a.r1 < b.r1;
    if (a.r2 != b.r2) return a.r2 < b.r2;
    return a.r < b.r;
  });
  return out;
}

PlanResult rank_configs(const BudgetQuery& query, const std::vector<KronConfig>& candidates) {
  validate_query(query);

  PlanResult res;
  res.query = query;
  res.ranked.reserve(candidates.size());
  for (const KronConfig& cfg : candidates) {
    cfg.validate();
    if (cfg.d_in != query.d_in || cfg.d_out != query.d_out)
      throw ConfigError("rank_configs: candidate dimensions disagree with the query");
    PlanEntry e;
    e.config = cfg;
    e.params = param_count(cfg);
    if (e.params > query.budget)
      throw ConfigError("rank_configs: candidate exceeds the budget");
    e.max_rank = max_attainable_rank(cfg);
    res.ranked.push_back(std::move(e));
  }

  const Index hint = query.r_star_hint;
  std::sort(res.ranked.begin(), res.ranked.end(),
            [hint](const PlanEntry& x, const PlanEntry& y) {
              const bool mx = x.config.r >= hint, my = y.config.r >= hint;
              if (mx != my) return mx;
              if (x.config.r2 != y.config.r2) return x.config.r2 > y.config.r2;
              if (x.config.r1 != y.config.r1) return x.config.r1 < y.config.r1;
              if (x.params != y.params) return x.params > y.params;
              return x.config.r < y.config.r;
            });

  for (PlanEntry& e : res.ranked) {
    std::ostringstream hint_note;
    if (e.config.r >= hint)
      hint_note << "component count " << e.config.r << " covers the expected rank "
                << hint;
    else
      hint_note << "component count " << e.config.r << " falls short of the expected rank "
                << hint;
    e.notes.push_back(hint_note.str());
    std::ostringstream r2_note;
    r2_note << "r2=" << e.config.r2 << " sets the stable-scale headroom, r1=" << e.config.r1
            << " the alignment cost";
    e.notes.push_back(r2_note.str());
    std::ostringstream usage;
    usage << "uses " << e.params << " of " << query.budget << " parameters";
    e.notes.push_back(usage.str());
  }
  return res;
}

}  // namespace kronadapt
