#pragma once

#include <limits>
#include <optional>
#include <queue>
#include <type_traits>
#include <vector>

#include "bsf/errors.hpp"

namespace bsf {

/// Arc capacity: a finite value or the infinity sentinel. The sentinel is
/// never added to finite capacities.
template <class Cap>
struct Capacity {
  Cap value{};
  bool infinite = false;

  static Capacity inf() { return {Cap{}, true}; }
  static Capacity of(Cap c) { return {c, false}; }
};

template <class Cap>
struct FlowArc {
  int tail = 0;
  int head = 0;
  Capacity<Cap> cap;
};

/// Directed graph with a designated source and sink.
template <class Cap>
struct FlowDigraph {
  int num_nodes = 0;
  std::vector<FlowArc<Cap>> arcs;
  int source = 0;
  int sink = 1;

  int add_arc(int tail, int head, Capacity<Cap> cap) {
    arcs.push_back({tail, head, cap});
    return static_cast<int>(arcs.size()) - 1;
  }
  int add_arc(int tail, int head, Cap cap) { return add_arc(tail, head, Capacity<Cap>::of(cap)); }
};

template <class Cap>
struct FlowResult {
  Capacity<Cap> value;             // max flow = min cut capacity
  std::vector<int> source_side;    // nodes of a minimum cut's source side, sorted
  std::vector<Cap> arc_flow;       // per input arc; meaningless when value is infinite
};

namespace detail {

template <class Cap>
bool positive(const Cap& x) {
  if constexpr (std::is_floating_point_v<Cap>)
    return x > Cap(1e-12);
  else
    return x > Cap(0);
}

}  // namespace detail

/// Dinic's algorithm. Works for floating point and exact rational
/// capacity types. s ∈ source_side, t ∉ source_side.
template <class Cap>
FlowResult<Cap> max_flow_min_cut(const FlowDigraph<Cap>& d) {
  if (d.source == d.sink) throw InvalidArgument("source equals sink");
  if (d.source < 0 || d.source >= d.num_nodes || d.sink < 0 || d.sink >= d.num_nodes)
    throw InvalidArgument("source or sink out of range");

  struct Res {
    int to;
    Cap r;
    bool inf;
  };
  std::vector<Res> res;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(d.num_nodes));
  res.reserve(d.arcs.size() * 2);
  for (const auto& a : d.arcs) {
    if (!a.cap.infinite && a.cap.value < Cap(0)) throw InvalidArgument("negative capacity");
    adj[a.tail].push_back(static_cast<int>(res.size()));
    res.push_back({a.head, a.cap.infinite ? Cap(0) : a.cap.value, a.cap.infinite});
    adj[a.head].push_back(static_cast<int>(res.size()));
    res.push_back({a.tail, Cap(0), false});
  }
  auto has_room = [&](const Res& r) { return r.inf || detail::positive(r.r); };

  std::vector<int> level(static_cast<std::size_t>(d.num_nodes));
  std::vector<std::size_t> it(static_cast<std::size_t>(d.num_nodes));
  Cap total(0);
  bool unbounded = false;

  auto bfs = [&]() {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    level[d.source] = 0;
    q.push(d.source);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int id : adj[u]) {
        if (has_room(res[id]) && level[res[id].to] < 0) {
          level[res[id].to] = level[u] + 1;
          q.push(res[id].to);
        }
      }
    }
    return level[d.sink] >= 0;
  };

  // Returns the amount pushed; nullopt encodes an infinite push.
  auto dfs = [&](auto&& self, int u, std::optional<Cap> limit) -> std::optional<Cap> {
    if (u == d.sink) return limit;
    for (std::size_t& i = it[u]; i < adj[u].size(); ++i) {
      int id = adj[u][i];
      Res& r = res[id];
      if (!has_room(r) || level[r.to] != level[u] + 1) continue;
      std::optional<Cap> lim = limit;
      if (!r.inf && (!lim || r.r < *lim)) lim = r.r;
      std::optional<Cap> pushed = self(self, r.to, lim);
      if (!pushed) return std::nullopt;
      if (detail::positive(*pushed)) {
        if (!r.inf) r.r -= *pushed;
        Res& back = res[id ^ 1];
        if (!back.inf) back.r += *pushed;
        return pushed;
      }
    }
    return Cap(0);
  };

  while (!unbounded && bfs()) {
    std::fill(it.begin(), it.end(), 0);
    while (true) {
      std::optional<Cap> f = dfs(dfs, d.source, std::nullopt);
      if (!f) {
        unbounded = true;
        break;
      }
      if (!detail::positive(*f)) break;
      total += *f;
    }
  }

  FlowResult<Cap> out;
  out.value = unbounded ? Capacity<Cap>::inf() : Capacity<Cap>::of(total);
  // Source side: nodes reachable in the residual graph.
  std::vector<char> seen(static_cast<std::size_t>(d.num_nodes), 0);
  std::vector<int> stack{d.source};
  seen[d.source] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int id : adj[u])
      if (has_room(res[id]) && !seen[res[id].to]) {
        seen[res[id].to] = 1;
        stack.push_back(res[id].to);
      }
  }
  for (int v = 0; v < d.num_nodes; ++v)
    if (seen[v]) out.source_side.push_back(v);
  out.arc_flow.resize(d.arcs.size(), Cap(0));
  if (!unbounded)
    for (std::size_t i = 0; i < d.arcs.size(); ++i) out.arc_flow[i] = res[2 * i + 1].r;
  return out;
}

}  // namespace bsf
