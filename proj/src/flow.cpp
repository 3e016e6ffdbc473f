#include "osda/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "osda/common.hpp"

namespace osda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Arc {
  int from;
  int to;
  double cap;   // residual capacity
  double cost;
};

// Node layout: source, C class nodes, T target nodes, sink, then the excess
// super source/sink used to remove the coverage lower bounds.
class Network {
  int n_classes_;
  int n_targets_;

 public:
  Network(int n_classes, int n_targets)
      : n_classes_(n_classes), n_targets_(n_targets), adj_(n_nodes()) {}

  int source() const { return 0; }
  int class_node(int c) const { return 1 + c; }
  int target_node(int t) const { return 1 + n_classes_ + t; }
  int sink() const { return 1 + n_classes_ + n_targets_; }
  int super_source() const { return sink() + 1; }
  int super_sink() const { return sink() + 2; }
  int n_nodes() const { return n_classes_ + n_targets_ + 4; }

  int add_arc(int from, int to, double cap, double cost) {
    int id = static_cast<int>(arcs_.size());
    arcs_.push_back({from, to, cap, cost});
    arcs_.push_back({to, from, 0.0, -cost});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    return id;
  }

  double flow_on(int arc_id) const { return arcs_[arc_id ^ 1].cap; }

  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
};

}  // namespace

FlowSolution solve_assignment_flow(const LinearInstance& inst) {
  const Eigen::MatrixXd& d = *inst.costs;
  const int C = static_cast<int>(d.rows());
  const int T = static_cast<int>(d.cols());
  if (C < 1 || T < 1) throw InfeasibleError("empty assignment instance");

  int n_cover = 0;
  for (int c = 0; c < C; ++c) n_cover += inst.cover[c] ? 1 : 0;
  if (n_cover > T)
    throw InfeasibleError("coverage infeasible: " + std::to_string(T) + " targets for " +
                          std::to_string(n_cover) + " covered classes");

  Network net(C, T);
  // source -> class, with the lower bound moved to the super source
  std::vector<int> source_class_arc(C);
  for (int c = 0; c < C; ++c) {
    int lb = inst.cover[c] ? 1 : 0;
    source_class_arc[c] = net.add_arc(net.source(), net.class_node(c),
                                      static_cast<double>(T - lb), 0.0);
    if (lb) net.add_arc(net.super_source(), net.class_node(c), 1.0, 0.0);
  }
  // class -> target and outlier bypass
  std::vector<std::vector<int>> class_target_arc(T, std::vector<int>(C, -1));
  std::vector<int> bypass_arc(T, -1);
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < C; ++c)
      if (inst.allowed[t][c])
        class_target_arc[t][c] = net.add_arc(net.class_node(c), net.target_node(t), 1.0, d(c, t));
    if (inst.allowed[t][C])
      bypass_arc[t] = net.add_arc(net.source(), net.target_node(t), 1.0, inst.lambda);
  }
  for (int t = 0; t < T; ++t) net.add_arc(net.target_node(t), net.sink(), 1.0, 0.0);
  net.add_arc(net.sink(), net.super_sink(), static_cast<double>(T), 0.0);
  net.add_arc(net.super_source(), net.source(), static_cast<double>(T - n_cover), 0.0);

  const int N = net.n_nodes();
  const int S = net.super_source();
  const int K = net.super_sink();
  std::vector<double> pot(N, 0.0);
  std::vector<double> dist(N);
  std::vector<int> parent_arc(N);

  double pushed = 0.0;
  while (pushed < static_cast<double>(T) - 0.5) {
    // Dijkstra on reduced costs
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent_arc.begin(), parent_arc.end(), -1);
    dist[S] = 0.0;
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    heap.push({0.0, S});
    while (!heap.empty()) {
      auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[u]) continue;
      for (int id : net.adj_[u]) {
        const Arc& a = net.arcs_[id];
        if (a.cap <= 0.5) continue;
        double rc = std::max(0.0, a.cost + pot[u] - pot[a.to]);
        if (du + rc < dist[a.to]) {
          dist[a.to] = du + rc;
          parent_arc[a.to] = id;
          heap.push({dist[a.to], a.to});
        }
      }
    }
    if (dist[K] == kInf)
      throw InfeasibleError("assignment instance has no complete labeling");
    for (int v = 0; v < N; ++v) pot[v] += std::min(dist[v], dist[K]);
    // bottleneck and augment
    double bottleneck = kInf;
    for (int v = K; v != S; v = net.arcs_[parent_arc[v]].from)
      bottleneck = std::min(bottleneck, net.arcs_[parent_arc[v]].cap);
    for (int v = K; v != S; v = net.arcs_[parent_arc[v]].from) {
      net.arcs_[parent_arc[v]].cap -= bottleneck;
      net.arcs_[parent_arc[v] ^ 1].cap += bottleneck;
    }
    pushed += bottleneck;
  }

  auto read_labels = [&]() {
    std::vector<int> labels(T, -1);  // -1 = outlier (bypass arc carries the unit)
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < C; ++c) {
        int id = class_target_arc[t][c];
        if (id >= 0 && net.flow_on(id) > 0.5) labels[t] = c;
      }
    return labels;
  };
  std::vector<int> labels = read_labels();

  // Canonicalization: walk the zero-reduced-cost residual graph to the
  // lexicographically smallest optimal labeling. Reassignments cycle through
  // class/target nodes only; the excess arcs and already-fixed targets stay
  // untouched.
  double max_cost = 0.0;
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < C; ++c) max_cost = std::max(max_cost, std::abs(d(c, t)));
  if (std::isfinite(inst.lambda)) max_cost = std::max(max_cost, std::abs(inst.lambda));
  const double tol = 1e-11 * (1.0 + max_cost);
  auto reduced = [&](int id) {
    const Arc& a = net.arcs_[id];
    return a.cost + pot[a.from] - pot[a.to];
  };

  std::vector<char> node_blocked(N, 0);
  node_blocked[net.super_source()] = node_blocked[net.super_sink()] = 1;

  std::vector<int> bfs_parent(N);
  auto find_cycle_path = [&](int from_node, int to_node) -> bool {
    std::fill(bfs_parent.begin(), bfs_parent.end(), -2);
    bfs_parent[from_node] = -1;
    std::queue<int> q;
    q.push(from_node);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int id : net.adj_[u]) {
        const Arc& a = net.arcs_[id];
        if (a.cap <= 0.5 || node_blocked[a.to] || std::abs(reduced(id)) > tol) continue;
        if (bfs_parent[a.to] != -2) continue;
        bfs_parent[a.to] = id;
        if (a.to == to_node) return true;
        q.push(a.to);
      }
    }
    return false;
  };

  for (int t = 0; t < T; ++t) {
    int n_allowed = 0;
    for (int c = 0; c <= C; ++c) n_allowed += inst.allowed[t][c] ? 1 : 0;
    if (n_allowed > 1) {
      int cur = labels[t];
      int cur_rank = cur == -1 ? C : cur;
      for (int cand = 0; cand < cur_rank; ++cand) {
        int id = class_target_arc[t][cand];
        if (id < 0 || net.arcs_[id].cap <= 0.5 || std::abs(reduced(id)) > tol) continue;
        if (!find_cycle_path(net.target_node(t), net.class_node(cand))) continue;
        // apply the cycle: forced arc plus the residual path back
        net.arcs_[id].cap -= 1.0;
        net.arcs_[id ^ 1].cap += 1.0;
        for (int v = net.class_node(cand); v != net.target_node(t);
             v = net.arcs_[bfs_parent[v]].from) {
          net.arcs_[bfs_parent[v]].cap -= 1.0;
          net.arcs_[bfs_parent[v] ^ 1].cap += 1.0;
        }
        labels = read_labels();
        break;
      }
    }
    node_blocked[net.target_node(t)] = 1;
  }

  FlowSolution sol;
  sol.labels = labels;
  sol.objective = 0.0;
  for (int t = 0; t < T; ++t)
    sol.objective += labels[t] == -1 ? inst.lambda : d(labels[t], t);
  return sol;
}

}  // namespace osda
