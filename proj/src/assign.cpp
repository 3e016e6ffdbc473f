#include "osda/assign.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "osda/common.hpp"
#include "osda/flow.hpp"

namespace osda {

using json = nlohmann::json;

std::size_t Assignment::n_outliers() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kOutlier));
}

std::vector<std::size_t> Assignment::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int l : labels)
    if (l != kOutlier) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

// --- cost construction --------------------------------------------------------

CostMatrix compute_costs(const MeanTable& means, const Dataset& targets) {
  if (means.dim() != targets.dim())
    throw DataError("mean/target dimensionality mismatch: " + std::to_string(means.dim()) +
                    " vs " + std::to_string(targets.dim()));
  const Eigen::Index C = static_cast<Eigen::Index>(means.size());
  const Eigen::Index T = static_cast<Eigen::Index>(targets.size());
  CostMatrix d(C, T);
  for (Eigen::Index c = 0; c < C; ++c)
    for (Eigen::Index t = 0; t < T; ++t)
      d(c, t) = (means.means.col(c) - targets.features.col(t)).squaredNorm();
  return d;
}

ClassDistanceMatrix class_distances(const MeanTable& means) {
  const Eigen::Index C = static_cast<Eigen::Index>(means.size());
  ClassDistanceMatrix dcc(C, C);
  for (Eigen::Index a = 0; a < C; ++a) {
    dcc(a, a) = 0.0;
    for (Eigen::Index b = a + 1; b < C; ++b) {
      double v = (means.means.col(a) - means.means.col(b)).squaredNorm();
      dcc(a, b) = v;
      dcc(b, a) = v;
    }
  }
  return dcc;
}

double lambda_from_costs(const CostMatrix& d, double rho) {
  if (d.size() == 0) throw DataError("lambda_from_costs: empty cost matrix");
  return rho * (d.maxCoeff() + d.minCoeff());
}

NeighborGraph build_neighbors(const Dataset& targets, int k) {
  const int T = static_cast<int>(targets.size());
  if (k < 0) throw DataError("neighbor count must be >= 0");
  if (k >= T) throw DataError("neighbor count " + std::to_string(k) +
                              " must be smaller than the target count " + std::to_string(T));
  NeighborGraph g;
  g.k = k;
  g.neighbors.resize(static_cast<std::size_t>(T));
  if (k == 0) return g;
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u < T; ++u)
      dist[static_cast<std::size_t>(u)] = {
          (targets.features.col(t) - targets.features.col(u)).squaredNorm(), u};
    std::swap(dist[static_cast<std::size_t>(t)], dist[static_cast<std::size_t>(T - 1)]);
    std::sort(dist.begin(), dist.end() - 1);  // (distance, index): ties by lower index
    auto& out = g.neighbors[static_cast<std::size_t>(t)];
    out.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out[static_cast<std::size_t>(j)] = dist[static_cast<std::size_t>(j)].second;
  }
  return g;
}

// --- shared helpers ------------------------------------------------------------

double assignment_objective(const CostMatrix& d, const ClassDistanceMatrix* dcc,
                            const NeighborGraph* nbrs, const std::vector<int>& labels,
                            double lambda) {
  const int T = static_cast<int>(d.cols());
  double obj = 0.0;
  for (int t = 0; t < T; ++t) {
    if (labels[static_cast<std::size_t>(t)] == kOutlier) {
      obj += lambda;
      continue;
    }
    int c = labels[static_cast<std::size_t>(t)];
    obj += d(c, t);
    if (dcc && nbrs)
      for (int u : nbrs->neighbors[static_cast<std::size_t>(t)]) {
        int cu = labels[static_cast<std::size_t>(u)];
        if (cu != kOutlier) obj += (*dcc)(c, cu);
      }
  }
  return obj;
}

namespace {

// Allowed-label table from the config; the outlier pseudo label sits at
// column C.
std::vector<std::vector<char>> allowed_table(int C, int T, const SolveConfig& cfg,
                                             bool with_fixed) {
  const char outlier_ok = std::isfinite(cfg.lambda) ? 1 : 0;
  std::vector<std::vector<char>> allowed(
      static_cast<std::size_t>(T),
      std::vector<char>(static_cast<std::size_t>(C) + 1, 1));
  for (int t = 0; t < T; ++t) allowed[static_cast<std::size_t>(t)][static_cast<std::size_t>(C)] = outlier_ok;
  if (!with_fixed) return allowed;
  std::map<int, int> fixed;
  for (const auto& [t, c] : cfg.fixed_labels) {
    if (t < 0 || t >= T) throw DataError("fixed label target index out of range");
    if (c < 0 || c >= C) throw DataError("fixed label class index out of range");
    auto [it, inserted] = fixed.emplace(t, c);
    if (!inserted && it->second != c)
      throw DataError("target " + std::to_string(t) + " fixed to two different classes");
  }
  for (const auto& [t, c] : fixed) {
    auto& row = allowed[static_cast<std::size_t>(t)];
    std::fill(row.begin(), row.end(), 0);
    row[static_cast<std::size_t>(c)] = 1;
  }
  return allowed;
}

std::vector<char> cover_table(int C, const SolveConfig& cfg) {
  std::vector<char> cover(static_cast<std::size_t>(C), cfg.coverage ? 1 : 0);
  if (cfg.coverage && cfg.uncovered_class) {
    int c = *cfg.uncovered_class;
    if (c < 0 || c >= C) throw DataError("uncovered_class index out of range");
    cover[static_cast<std::size_t>(c)] = 0;
  }
  return cover;
}

Assignment solve_linear(const CostMatrix& d, const SolveConfig& cfg, bool with_fixed) {
  if (!d.allFinite()) throw DataError("cost matrix contains non-finite values");
  if (d.minCoeff() < 0.0) throw DataError("cost matrix contains negative values");
  const int C = static_cast<int>(d.rows());
  const int T = static_cast<int>(d.cols());
  LinearInstance inst;
  inst.costs = &d;
  inst.lambda = cfg.lambda;
  inst.cover = cover_table(C, cfg);
  inst.allowed = allowed_table(C, T, cfg, with_fixed);
  FlowSolution flow = solve_assignment_flow(inst);
  Assignment out;
  out.labels = flow.labels;
  out.n_classes = C;
  out.objective = assignment_objective(d, nullptr, nullptr, out.labels, cfg.lambda);
  return out;
}

}  // namespace

Assignment solve_unsupervised(const CostMatrix& d, const SolveConfig& cfg) {
  return solve_linear(d, cfg, /*with_fixed=*/false);
}

Assignment solve_semi_supervised(const CostMatrix& d, const SolveConfig& cfg) {
  return solve_linear(d, cfg, /*with_fixed=*/true);
}

// --- locality-constrained solver -----------------------------------------------

namespace {

// rank used for label ordering and lexicographic tie-breaks: classes
// ascending, outlier last
inline int label_rank(int label, int C) { return label == kOutlier ? C : label; }

bool labels_less(const std::vector<int>& a, const std::vector<int>& b, int C) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    int ra = label_rank(a[i], C), rb = label_rank(b[i], C);
    if (ra != rb) return ra < rb;
  }
  return false;
}

struct QuadInstance {
  const CostMatrix* d;
  const ClassDistanceMatrix* dcc;
  const NeighborGraph* nbrs;
  double lambda;
  int C;
  int T;
  std::vector<std::vector<int>> inverse_neighbors;  // t -> {u : t in N_u}
};

QuadInstance make_quad(const CostMatrix& d, const ClassDistanceMatrix& dcc,
                       const NeighborGraph& nbrs, const SolveConfig& cfg) {
  QuadInstance q;
  q.d = &d;
  q.dcc = &dcc;
  q.nbrs = &nbrs;
  q.lambda = cfg.lambda;
  q.C = static_cast<int>(d.rows());
  q.T = static_cast<int>(d.cols());
  if (static_cast<int>(nbrs.neighbors.size()) != q.T)
    throw DataError("neighbor graph size does not match target count");
  if (dcc.rows() != q.C || dcc.cols() != q.C)
    throw DataError("class distance matrix size does not match cost matrix");
  q.inverse_neighbors.resize(static_cast<std::size_t>(q.T));
  for (int t = 0; t < q.T; ++t)
    for (int u : nbrs.neighbors[static_cast<std::size_t>(t)])
      q.inverse_neighbors[static_cast<std::size_t>(u)].push_back(t);
  return q;
}

// Local cost of giving target t label l with everything else as in `labels`
// (both neighborhood directions).
double local_cost(const QuadInstance& q, const std::vector<int>& labels, int t, int l) {
  if (l == kOutlier) return q.lambda;
  double cost = (*q.d)(l, t);
  for (int u : q.nbrs->neighbors[static_cast<std::size_t>(t)]) {
    int cu = labels[static_cast<std::size_t>(u)];
    if (cu != kOutlier) cost += (*q.dcc)(l, cu);
  }
  for (int u : q.inverse_neighbors[static_cast<std::size_t>(t)]) {
    int cu = labels[static_cast<std::size_t>(u)];
    if (cu != kOutlier && u != t) cost += (*q.dcc)(cu, l);
  }
  return cost;
}

// Objective terms touching targets t and u at the current labels, with the
// directed (t,u) interactions counted once.
double pair_cost(const QuadInstance& q, const std::vector<int>& labels, int t, int u) {
  double v = local_cost(q, labels, t, labels[static_cast<std::size_t>(t)]) +
             local_cost(q, labels, u, labels[static_cast<std::size_t>(u)]);
  int a = labels[static_cast<std::size_t>(t)];
  int b = labels[static_cast<std::size_t>(u)];
  if (a != kOutlier && b != kOutlier) {
    for (int v2 : q.nbrs->neighbors[static_cast<std::size_t>(t)])
      if (v2 == u) v -= (*q.dcc)(a, b);
    for (int v2 : q.nbrs->neighbors[static_cast<std::size_t>(u)])
      if (v2 == t) v -= (*q.dcc)(b, a);
  }
  return v;
}

struct IcmContext {
  const QuadInstance* q;
  std::vector<char> cover;
  std::vector<std::vector<char>> allowed;
};

// Reassign the cheapest movable target to every uncovered class. Returns
// false when no repair exists.
bool repair_coverage(const IcmContext& ctx, std::vector<int>& labels) {
  const QuadInstance& q = *ctx.q;
  auto counts = [&]() {
    std::vector<int> n(static_cast<std::size_t>(q.C), 0);
    for (int l : labels)
      if (l != kOutlier) ++n[static_cast<std::size_t>(l)];
    return n;
  };
  std::vector<int> n = counts();
  for (int c = 0; c < q.C; ++c) {
    while (ctx.cover[static_cast<std::size_t>(c)] && n[static_cast<std::size_t>(c)] == 0) {
      int best_t = -1;
      double best_d = kInfinity;
      for (int t = 0; t < q.T; ++t) {
        if (!ctx.allowed[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)]) continue;
        int cur = labels[static_cast<std::size_t>(t)];
        bool movable = cur == kOutlier || n[static_cast<std::size_t>(cur)] >= 2 ||
                       !ctx.cover[static_cast<std::size_t>(cur)];
        if (!movable) continue;
        if ((*q.d)(c, t) < best_d) {
          best_d = (*q.d)(c, t);
          best_t = t;
        }
      }
      if (best_t < 0) return false;
      int old = labels[static_cast<std::size_t>(best_t)];
      if (old != kOutlier) --n[static_cast<std::size_t>(old)];
      labels[static_cast<std::size_t>(best_t)] = c;
      ++n[static_cast<std::size_t>(c)];
    }
  }
  return true;
}

// Iterated conditional modes with single-site and coupled neighbor-pair
// moves: the quadratic term ties neighbors together, so tight pairs must be
// able to switch class jointly. Sweeps repeat until neither pass changes
// anything.
void icm_descend(const IcmContext& ctx, std::vector<int>& labels) {
  const QuadInstance& q = *ctx.q;
  std::vector<int> n(static_cast<std::size_t>(q.C), 0);
  for (int l : labels)
    if (l != kOutlier) ++n[static_cast<std::size_t>(l)];

  auto movable = [&](int t, int cand) {
    if (!ctx.allowed[static_cast<std::size_t>(t)]
                    [static_cast<std::size_t>(cand == kOutlier ? q.C : cand)])
      return false;
    int cur = labels[static_cast<std::size_t>(t)];
    if (cur != kOutlier && cand != cur && ctx.cover[static_cast<std::size_t>(cur)] &&
        n[static_cast<std::size_t>(cur)] == 1)
      return false;
    return true;
  };
  auto apply = [&](int t, int cand) {
    int cur = labels[static_cast<std::size_t>(t)];
    if (cur != kOutlier) --n[static_cast<std::size_t>(cur)];
    if (cand != kOutlier) ++n[static_cast<std::size_t>(cand)];
    labels[static_cast<std::size_t>(t)] = cand;
  };

  const int max_sweeps = 200;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    // single-site pass; a move out of a covered singleton class is paired
    // with the cheapest refill of that class, so swaps are reachable
    for (int t = 0; t < q.T; ++t) {
      int cur = labels[static_cast<std::size_t>(t)];
      double cur_cost = local_cost(q, labels, t, cur);
      int best = cur;
      int best_refill = -1;
      double best_delta = -1e-15;
      bool singleton = cur != kOutlier && ctx.cover[static_cast<std::size_t>(cur)] &&
                       n[static_cast<std::size_t>(cur)] == 1;
      for (int l = 0; l <= q.C; ++l) {
        int cand = l == q.C ? kOutlier : l;
        if (cand == cur) continue;
        if (!ctx.allowed[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)]) continue;
        if (!singleton) {
          double delta = local_cost(q, labels, t, cand) - cur_cost;
          if (delta < best_delta) {
            best_delta = delta;
            best = cand;
            best_refill = -1;
          }
          continue;
        }
        // leaving empties class `cur`: jointly pick a refill target
        for (int u = 0; u < q.T; ++u) {
          if (u == t) continue;
          if (!ctx.allowed[static_cast<std::size_t>(u)][static_cast<std::size_t>(cur)]) continue;
          int lu = labels[static_cast<std::size_t>(u)];
          if (lu == cur) continue;
          // u may leave a covered singleton only if t moves into it
          if (lu != kOutlier && ctx.cover[static_cast<std::size_t>(lu)] &&
              n[static_cast<std::size_t>(lu)] == 1 && cand != lu)
            continue;
          double before = pair_cost(q, labels, t, u);
          apply(t, cand);
          apply(u, cur);
          double delta = pair_cost(q, labels, t, u) - before;
          apply(u, lu);
          apply(t, cur);
          if (delta < best_delta) {
            best_delta = delta;
            best = cand;
            best_refill = u;
          }
        }
      }
      if (best != cur) {
        apply(t, best);
        if (best_refill >= 0) apply(best_refill, cur);
        changed = true;
      }
    }
    // coupled pass: move a target and one of its neighbors onto a common
    // class when that beats both staying put
    for (int t = 0; t < q.T; ++t) {
      for (int u : q.nbrs->neighbors[static_cast<std::size_t>(t)]) {
        int lt = labels[static_cast<std::size_t>(t)];
        int lu = labels[static_cast<std::size_t>(u)];
        double before = pair_cost(q, labels, t, u);
        int best_c = -2;
        double best_delta = -1e-15;
        for (int c = 0; c < q.C; ++c) {
          if (c == lt && c == lu) continue;
          bool t_ok = lt == c || movable(t, c);
          bool u_ok = lu == c || movable(u, c);
          // moving both out of one covered class needs two spare occupants
          if (lt == lu && lt != kOutlier && lt != c &&
              ctx.cover[static_cast<std::size_t>(lt)] && n[static_cast<std::size_t>(lt)] <= 2)
            t_ok = false;
          if (!t_ok || !u_ok) continue;
          apply(t, c);
          apply(u, c);
          double delta = pair_cost(q, labels, t, u) - before;
          apply(t, lt);
          apply(u, lu);
          if (delta < best_delta) {
            best_delta = delta;
            best_c = c;
          }
        }
        if (best_c != -2) {
          apply(t, best_c);
          apply(u, best_c);
          changed = true;
        }
      }
    }
    // exchange pass: swap the labels of any two targets
    for (int t = 0; t < q.T; ++t) {
      for (int u = t + 1; u < q.T; ++u) {
        int lt = labels[static_cast<std::size_t>(t)];
        int lu = labels[static_cast<std::size_t>(u)];
        if (lt == lu) continue;
        int lt_col = lt == kOutlier ? q.C : lt;
        int lu_col = lu == kOutlier ? q.C : lu;
        if (!ctx.allowed[static_cast<std::size_t>(t)][static_cast<std::size_t>(lu_col)] ||
            !ctx.allowed[static_cast<std::size_t>(u)][static_cast<std::size_t>(lt_col)])
          continue;
        double before = pair_cost(q, labels, t, u);
        apply(t, lu);
        apply(u, lt);
        double delta = pair_cost(q, labels, t, u) - before;
        if (delta < -1e-15) {
          changed = true;
        } else {
          apply(t, lt);
          apply(u, lu);
        }
      }
    }
    if (!changed) break;
  }
}

Assignment solve_locality_heuristic(const QuadInstance& q, const SolveConfig& cfg,
                                    const Assignment& linear_seed) {
  IcmContext ctx;
  ctx.q = &q;
  ctx.cover = cover_table(q.C, cfg);
  ctx.allowed = allowed_table(q.C, q.T, cfg, /*with_fixed=*/true);

  const int n_starts = 8;
  Rng rng(0x05daul);  // internal constant seed keeps the solver a pure function
  std::vector<int> best_labels;
  double best_obj = kInfinity;
  for (int s = 0; s < n_starts; ++s) {
    std::vector<int> labels = linear_seed.labels;
    if (s > 0) {
      const double perturb = 0.1 + 0.1 * s;  // 0.2 .. 0.8 across the restarts
      for (int t = 0; t < q.T; ++t) {
        if (rng.next_unit() >= perturb) continue;
        std::vector<int> options;
        for (int l = 0; l <= q.C; ++l)
          if (ctx.allowed[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)])
            options.push_back(l == q.C ? kOutlier : l);
        labels[static_cast<std::size_t>(t)] = options[rng.uniform_index(options.size())];
      }
      if (!repair_coverage(ctx, labels)) labels = linear_seed.labels;
    }
    icm_descend(ctx, labels);
    double obj = assignment_objective(*q.d, q.dcc, q.nbrs, labels, q.lambda);
    if (obj < best_obj - 1e-12 ||
        (std::abs(obj - best_obj) <= 1e-12 && labels_less(labels, best_labels, q.C))) {
      best_obj = obj;
      best_labels = labels;
    }
  }
  Assignment out;
  out.labels = best_labels;
  out.n_classes = q.C;
  out.objective = assignment_objective(*q.d, q.dcc, q.nbrs, best_labels, q.lambda);
  return out;
}

class BranchAndBound {
 public:
  BranchAndBound(const QuadInstance& q, const SolveConfig& cfg, const Assignment& incumbent)
      : q_(q),
        cover_(cover_table(q.C, cfg)),
        allowed_(allowed_table(q.C, q.T, cfg, /*with_fixed=*/true)),
        labels_(static_cast<std::size_t>(q.T), kUndecided),
        best_labels_(incumbent.labels),
        best_obj_(incumbent.objective) {
    // branch on targets by descending cost spread
    order_.resize(static_cast<std::size_t>(q.T));
    std::iota(order_.begin(), order_.end(), 0);
    std::vector<double> spread(static_cast<std::size_t>(q.T));
    for (int t = 0; t < q.T; ++t) {
      double lo = kInfinity, hi = -kInfinity;
      for (int c = 0; c < q.C; ++c) {
        lo = std::min(lo, (*q.d)(c, t));
        hi = std::max(hi, (*q.d)(c, t));
      }
      spread[static_cast<std::size_t>(t)] = hi - lo;
    }
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return spread[static_cast<std::size_t>(a)] > spread[static_cast<std::size_t>(b)];
    });
  }

  Assignment run() {
    recurse(0, 0.0);
    Assignment out;
    out.labels = best_labels_;
    out.n_classes = q_.C;
    out.objective = assignment_objective(*q_.d, q_.dcc, q_.nbrs, best_labels_, q_.lambda);
    return out;
  }

 private:
  static constexpr int kUndecided = -2;

  // Linear relaxation of the undecided part: the flow optimum with decided
  // targets pinned. The quadratic cost between decided pairs is added by the
  // caller; quadratic terms touching an undecided target are bounded by zero.
  double linear_bound() const {
    LinearInstance inst;
    inst.costs = q_.d;
    inst.lambda = q_.lambda;
    inst.cover = cover_;
    inst.allowed = allowed_;
    for (int t = 0; t < q_.T; ++t) {
      int l = labels_[static_cast<std::size_t>(t)];
      if (l == kUndecided) continue;
      auto& row = inst.allowed[static_cast<std::size_t>(t)];
      std::fill(row.begin(), row.end(), 0);
      row[static_cast<std::size_t>(l == kOutlier ? q_.C : l)] = 1;
    }
    try {
      return solve_assignment_flow(inst).objective;
    } catch (const InfeasibleError&) {
      return kInfinity;
    }
  }

  // quadratic interactions of (t := l) with already decided neighbors
  double decided_quad_delta(int t, int l) const {
    if (l == kOutlier) return 0.0;
    double delta = 0.0;
    for (int u : q_.nbrs->neighbors[static_cast<std::size_t>(t)]) {
      int cu = labels_[static_cast<std::size_t>(u)];
      if (cu >= 0) delta += (*q_.dcc)(l, cu);
    }
    for (int u : q_.inverse_neighbors[static_cast<std::size_t>(t)]) {
      int cu = labels_[static_cast<std::size_t>(u)];
      if (cu >= 0 && u != t) delta += (*q_.dcc)(cu, l);
    }
    return delta;
  }

  void recurse(int depth, double quad_decided) {
    const double eps = 1e-12 * std::max(1.0, std::abs(best_obj_));
    double bound = linear_bound() + quad_decided;
    if (bound > best_obj_ + eps) return;
    if (depth == q_.T) {
      std::vector<int> full = labels_;
      double obj = assignment_objective(*q_.d, q_.dcc, q_.nbrs, full, q_.lambda);
      if (obj < best_obj_ - eps ||
          (std::abs(obj - best_obj_) <= eps && labels_less(full, best_labels_, q_.C))) {
        best_obj_ = obj;
        best_labels_ = full;
      }
      return;
    }
    int t = order_[static_cast<std::size_t>(depth)];
    for (int l = 0; l <= q_.C; ++l) {
      if (!allowed_[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)]) continue;
      int label = l == q_.C ? kOutlier : l;
      labels_[static_cast<std::size_t>(t)] = label;
      recurse(depth + 1, quad_decided + decided_quad_delta(t, label));
      labels_[static_cast<std::size_t>(t)] = kUndecided;
    }
  }

  const QuadInstance& q_;
  std::vector<char> cover_;
  std::vector<std::vector<char>> allowed_;
  std::vector<int> labels_;
  std::vector<int> order_;
  std::vector<int> best_labels_;
  double best_obj_;
};

}  // namespace

Assignment solve_locality(const CostMatrix& d, const ClassDistanceMatrix& dcc,
                          const NeighborGraph& nbrs, const SolveConfig& cfg) {
  if (!d.allFinite()) throw DataError("cost matrix contains non-finite values");
  QuadInstance q = make_quad(d, dcc, nbrs, cfg);

  SolveConfig linear_cfg = cfg;
  Assignment seed = solve_semi_supervised(d, linear_cfg);
  seed.objective = assignment_objective(d, &dcc, &nbrs, seed.labels, cfg.lambda);

  Assignment heur = solve_locality_heuristic(q, cfg, seed);

  SolveBackend backend = cfg.backend;
  if (backend == SolveBackend::Auto) {
    double log_states = static_cast<double>(q.T) * std::log(static_cast<double>(q.C));
    backend = log_states <= std::log(1e6) ? SolveBackend::Exact : SolveBackend::Heuristic;
  }
  if (backend == SolveBackend::Heuristic) return heur;
  return BranchAndBound(q, cfg, heur).run();
}

// --- instance dump --------------------------------------------------------------

std::string instance_to_json(const CostMatrix& d, const SolveConfig& cfg,
                             const ClassDistanceMatrix* dcc, const NeighborGraph* nbrs,
                             const Assignment* solution) {
  json j;
  j["costs"] = json::array();
  for (Eigen::Index c = 0; c < d.rows(); ++c) {
    json row = json::array();
    for (Eigen::Index t = 0; t < d.cols(); ++t) row.push_back(d(c, t));
    j["costs"].push_back(row);
  }
  if (std::isfinite(cfg.lambda))
    j["lambda"] = cfg.lambda;
  else
    j["lambda"] = "inf";
  j["coverage"] = cfg.coverage;
  if (cfg.uncovered_class) j["uncovered_class"] = *cfg.uncovered_class;
  if (!cfg.fixed_labels.empty()) {
    json fixed = json::array();
    for (const auto& [t, c] : cfg.fixed_labels) fixed.push_back({t, c});
    j["fixed"] = fixed;
  }
  if (dcc) {
    json m = json::array();
    for (Eigen::Index a = 0; a < dcc->rows(); ++a) {
      json row = json::array();
      for (Eigen::Index b = 0; b < dcc->cols(); ++b) row.push_back((*dcc)(a, b));
      m.push_back(row);
    }
    j["class_distances"] = m;
  }
  if (nbrs) {
    j["neighbors"] = nbrs->neighbors;
    j["neighbor_k"] = nbrs->k;
  }
  if (solution) {
    json x = json::array();
    for (int c = 0; c < solution->n_classes; ++c) {
      json row = json::array();
      for (std::size_t t = 0; t < solution->n_targets(); ++t)
        row.push_back(solution->x(c, t) ? 1 : 0);
      x.push_back(row);
    }
    json o = json::array();
    for (std::size_t t = 0; t < solution->n_targets(); ++t)
      o.push_back(solution->outlier(t) ? 1 : 0);
    j["x"] = x;
    j["o"] = o;
    j["objective"] = solution->objective;
  }
  return j.dump(2);
}

}  // namespace osda
