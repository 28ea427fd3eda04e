#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "bsf/errors.hpp"
#include "bsf/graph.hpp"

namespace bsf {

enum class RuleKind { Together, Apart };

/// Ryan-Foster branching decision on the vertex pair u < v.
struct BranchRule {
  Vertex u = 0;
  Vertex v = 0;
  RuleKind kind = RuleKind::Together;

  friend bool operator==(const BranchRule&, const BranchRule&) = default;
};

inline BranchRule make_rule(Vertex a, Vertex b, RuleKind kind) {
  if (a == b) throw InvalidArgument("branching pair needs two distinct vertices");
  return {std::min(a, b), std::max(a, b), kind};
}

inline bool respects(const Tree& t, const BranchRule& r) {
  const bool a = t.contains(r.u), b = t.contains(r.v);
  return r.kind == RuleKind::Together ? a == b : !(a && b);
}

inline bool respects(const Tree& t, std::span<const BranchRule> rules) {
  return std::all_of(rules.begin(), rules.end(), [&](const BranchRule& r) { return respects(t, r); });
}

}  // namespace bsf
