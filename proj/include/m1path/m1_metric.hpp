#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "m1path/cadlag.hpp"
#include "m1path/param_rep.hpp"

namespace m1path {

// Points on the completed graph in graph order, consecutive points at most
// `mesh` apart in the max metric. `segment[i]` is the index of the graph
// segment (vertex pair) point i starts or lies on.
struct GraphDiscretization {
  std::vector<Node> points;
  std::vector<std::size_t> segment;
  double mesh = 0.0;
};

GraphDiscretization discretize_graph(const CompletedGraph& g, double mesh);

// Monotone staircase through the index grid of two discretizations.
struct Coupling {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> steps;
  double cost = 0.0;
  double mesh = 0.0;
  std::uint64_t fingerprint_x = 0;
  std::uint64_t fingerprint_y = 0;
  std::vector<Node> points_x;
  std::vector<Node> points_y;
};

struct M1Estimate {
  double estimate = 0.0;
  Coupling coupling;
};

// Hash of horizon, kind and nodes; used to detect stale couplings.
std::uint64_t path_fingerprint(const CadlagPath& x);

// 1e-3 * max(T, value range of x and y).
double default_mesh(const CadlagPath& x, const CadlagPath& y);

// Bottleneck DP over monotone couplings with pair cost max(|dv|, |dt|). With
// time_weight != 1 the returned coupling is, among those attaining the estimate,
// one minimising max(|dv|, time_weight * |dt|).
M1Estimate m1_distance(const CadlagPath& x, const CadlagPath& y, double mesh, double time_weight = 1.0);

struct CouplingReps {
  ParametricRep rep_x;
  ParametricRep rep_y;
};

CouplingReps coupling_to_reps(const CadlagPath& x, const CadlagPath& y, const Coupling& coupling);

}  // namespace m1path
