#include "asr/netmodel.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "asr/error.h"

namespace asr {

const char* RoleName(NodeRole role) {
  switch (role) {
    case NodeRole::kClient:
      return "client";
    case NodeRole::kRouter:
      return "router";
    case NodeRole::kServer:
      return "server";
  }
  return "unknown";
}

std::string LinkName(const NodeId& src, const NodeId& dst) {
  return src + "->" + dst;
}

std::string PathToString(const Path& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i != 0) out += " ";
    out += path[i];
  }
  return out;
}

std::vector<std::string> NetworkGraph::Check(const std::vector<Node>& nodes,
                                             const std::vector<Link>& links) {
  std::vector<std::string> issues;
  std::set<NodeId> ids;
  bool has_client = false;
  bool has_server = false;
  for (const Node& node : nodes) {
    if (node.id.empty()) issues.push_back("node with empty id");
    if (!ids.insert(node.id).second) {
      issues.push_back("duplicate node id '" + node.id + "'");
    }
    has_client |= node.role == NodeRole::kClient;
    has_server |= node.role == NodeRole::kServer;
  }
  if (!has_client) issues.push_back("graph has no client node");
  if (!has_server) issues.push_back("graph has no server node");

  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Link& link : links) {
    std::string name = LinkName(link.src, link.dst);
    if (!ids.count(link.src)) {
      issues.push_back("link " + name + " references unknown node '" +
                       link.src + "'");
    }
    if (!ids.count(link.dst)) {
      issues.push_back("link " + name + " references unknown node '" +
                       link.dst + "'");
    }
    if (link.src == link.dst) issues.push_back("link " + name + " is a loop");
    if (!seen.insert({link.src, link.dst}).second) {
      issues.push_back("duplicate link " + name);
    }
    if (!(link.bandwidth_mbps > 0) || !std::isfinite(link.bandwidth_mbps)) {
      issues.push_back("link " + name + " has non-positive bandwidth");
    }
    if (!(link.delay_ms >= 0) || !std::isfinite(link.delay_ms)) {
      issues.push_back("link " + name + " has negative delay");
    }
    if (!(link.energy > 0) || !std::isfinite(link.energy)) {
      issues.push_back("link " + name + " has non-positive energy");
    }
  }
  return issues;
}

NetworkGraph::NetworkGraph(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  std::vector<std::string> issues = Check(nodes_, links_);
  if (!issues.empty()) {
    std::string message = issues.front();
    for (std::size_t i = 1; i < issues.size(); ++i) message += "; " + issues[i];
    throw Error(ErrorCode::kInvalidGraph, message);
  }
  std::sort(links_.begin(), links_.end(), [](const Link& a, const Link& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_[nodes_[i].id] = i;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    link_index_[{links_[i].src, links_[i].dst}] = i;
  }
}

bool NetworkGraph::HasNode(const NodeId& id) const {
  return node_index_.count(id) != 0;
}

NodeRole NetworkGraph::Role(const NodeId& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) {
    throw Error(ErrorCode::kInvalidPath, "unknown node '" + id + "'");
  }
  return nodes_[it->second].role;
}

std::vector<NodeId> NetworkGraph::NodesWithRole(NodeRole role) const {
  std::vector<NodeId> out;
  for (const auto& [id, index] : node_index_) {
    if (nodes_[index].role == role) out.push_back(id);
  }
  return out;
}

const Link* NetworkGraph::FindLink(const NodeId& src, const NodeId& dst) const {
  auto it = link_index_.find({src, dst});
  return it == link_index_.end() ? nullptr : &links_[it->second];
}

const Link& NetworkGraph::GetLink(const NodeId& src, const NodeId& dst) const {
  const Link* link = FindLink(src, dst);
  if (link == nullptr) {
    throw Error(ErrorCode::kUnknownLink, "no link " + LinkName(src, dst));
  }
  return *link;
}

std::vector<const Link*> NetworkGraph::OutLinks(const NodeId& id) const {
  std::vector<const Link*> out;
  auto it = link_index_.lower_bound({id, NodeId()});
  for (; it != link_index_.end() && it->first.first == id; ++it) {
    out.push_back(&links_[it->second]);
  }
  return out;
}

namespace {

// Folds over the links of a path after checking it has at least one hop.
template <typename Fold>
double FoldLinks(const Path& path, const NetworkGraph& graph, double init,
                 Fold fold) {
  if (path.size() < 2) {
    throw Error(ErrorCode::kEmptyPath,
                "path '" + PathToString(path) + "' has no links");
  }
  double acc = init;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    acc = fold(acc, graph.GetLink(path[i], path[i + 1]));
  }
  return acc;
}

}  // namespace

double PathDelay(const Path& path, const NetworkGraph& graph) {
  return FoldLinks(path, graph, 0.0, [](double acc, const Link& link) {
    return acc + link.delay_ms;
  });
}

double PathBandwidth(const Path& path, const NetworkGraph& graph) {
  return FoldLinks(path, graph, std::numeric_limits<double>::infinity(),
                   [](double acc, const Link& link) {
                     return std::min(acc, link.bandwidth_mbps);
                   });
}

double PathEnergy(const Path& path, const NetworkGraph& graph) {
  return FoldLinks(path, graph, 0.0, [](double acc, const Link& link) {
    return acc + link.energy;
  });
}

PathMetrics ComputePathMetrics(const Path& path, const NetworkGraph& graph,
                               double server_load) {
  PathMetrics metrics;
  metrics.delay_ms = PathDelay(path, graph);
  metrics.bandwidth_mbps = PathBandwidth(path, graph);
  metrics.energy = PathEnergy(path, graph);
  metrics.server_load = server_load;
  return metrics;
}

void ValidatePath(const Path& path, const NetworkGraph& graph) {
  if (path.size() < 2) {
    throw Error(ErrorCode::kEmptyPath,
                "path '" + PathToString(path) + "' has no links");
  }
  std::set<NodeId> seen;
  for (const NodeId& id : path) {
    graph.Role(id);
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kInvalidPath,
                  "path '" + PathToString(path) + "' revisits " + id);
    }
  }
  if (graph.Role(path.front()) != NodeRole::kClient) {
    throw Error(ErrorCode::kInvalidPath,
                "path '" + PathToString(path) + "' does not start at a client");
  }
  if (graph.Role(path.back()) != NodeRole::kServer) {
    throw Error(ErrorCode::kInvalidPath,
                "path '" + PathToString(path) + "' does not end at a server");
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    graph.GetLink(path[i], path[i + 1]);
  }
}

std::vector<Path> EnumeratePaths(const NetworkGraph& graph,
                                 const NodeId& client,
                                 const EnumerateOptions& options) {
  if (!graph.HasNode(client) || graph.Role(client) != NodeRole::kClient) {
    throw Error(ErrorCode::kInvalidPath, "'" + client + "' is not a client");
  }
  const std::size_t max_hops =
      options.max_hops == 0 ? graph.nodes().size() : options.max_hops;

  std::vector<Path> out;
  Path current{client};
  std::set<NodeId> on_path{client};
  std::function<void(const NodeId&)> visit = [&](const NodeId& at) {
    if (current.size() - 1 >= max_hops) return;
    for (const Link* link : graph.OutLinks(at)) {
      const NodeId& next = link->dst;
      if (on_path.count(next)) continue;
      NodeRole role = graph.Role(next);
      if (role == NodeRole::kServer) {
        if (options.require_router && current.size() < 2) continue;
        current.push_back(next);
        out.push_back(current);
        current.pop_back();
      } else if (role == NodeRole::kRouter) {
        current.push_back(next);
        on_path.insert(next);
        visit(next);
        on_path.erase(next);
        current.pop_back();
      }
    }
  };
  visit(client);

  if (out.empty()) {
    throw Error(ErrorCode::kNoServerReachable,
                "no server reachable from '" + client + "'");
  }
  std::sort(out.begin(), out.end());
  return out;
}

NetworkGraph CanonicalGraph() {
  std::vector<Node> nodes = {
      {"C", NodeRole::kClient},   {"R1", NodeRole::kRouter},
      {"R2", NodeRole::kRouter},  {"R3", NodeRole::kRouter},
      {"R4", NodeRole::kRouter},  {"S_A", NodeRole::kServer},
      {"S_B", NodeRole::kServer},
  };
  std::vector<Link> links = {
      {"C", "R1", 10, 1, 1},   {"R1", "R2", 10, 2, 1}, {"R2", "R3", 10, 1, 1},
      {"R3", "S_A", 10, 2, 1}, {"R1", "R4", 10, 1, 1}, {"R4", "S_B", 10, 2, 1},
  };
  return NetworkGraph(std::move(nodes), std::move(links));
}

}  // namespace asr
