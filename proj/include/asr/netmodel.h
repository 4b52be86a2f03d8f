#ifndef ASR_NETMODEL_H
#define ASR_NETMODEL_H

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace asr {

using NodeId = std::string;

enum class NodeRole { kClient, kRouter, kServer };

const char* RoleName(NodeRole role);

struct Node {
  NodeId id;
  NodeRole role = NodeRole::kRouter;
};

// A directed link. Metrics apply in the src -> dst direction only.
struct Link {
  NodeId src;
  NodeId dst;
  double bandwidth_mbps = 0;
  double delay_ms = 0;
  double energy = 1.0;
};

// "src->dst", the identifier used for links in configs and traces.
std::string LinkName(const NodeId& src, const NodeId& dst);

// Client-to-server node sequence.
using Path = std::vector<NodeId>;

std::string PathToString(const Path& path);

struct PathMetrics {
  double delay_ms = 0;
  double bandwidth_mbps = 0;
  double energy = 0;
  double server_load = 0;
};

// Immutable directed graph of clients, routers and servers.
class NetworkGraph {
 public:
  // Throws Error(kInvalidGraph) listing every violated invariant.
  NetworkGraph(std::vector<Node> nodes, std::vector<Link> links);

  // Returns human-readable invariant violations; empty means the inputs would
  // construct a valid graph.
  static std::vector<std::string> Check(const std::vector<Node>& nodes,
                                        const std::vector<Link>& links);

  const std::vector<Node>& nodes() const { return nodes_; }
  // Sorted by (src, dst).
  const std::vector<Link>& links() const { return links_; }

  bool HasNode(const NodeId& id) const;
  // Throws Error(kInvalidPath) for an unknown node.
  NodeRole Role(const NodeId& id) const;
  std::vector<NodeId> NodesWithRole(NodeRole role) const;

  const Link* FindLink(const NodeId& src, const NodeId& dst) const;
  // Throws Error(kUnknownLink).
  const Link& GetLink(const NodeId& src, const NodeId& dst) const;
  // Outgoing links of a node, ordered by destination id.
  std::vector<const Link*> OutLinks(const NodeId& id) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::map<NodeId, std::size_t> node_index_;
  std::map<std::pair<NodeId, NodeId>, std::size_t> link_index_;
};

// Additive delay along the path's links. Throws kEmptyPath for fewer than two
// nodes and kUnknownLink when a consecutive pair is not connected.
double PathDelay(const Path& path, const NetworkGraph& graph);
// Bottleneck (minimum) link bandwidth.
double PathBandwidth(const Path& path, const NetworkGraph& graph);
// Additive per-hop energy.
double PathEnergy(const Path& path, const NetworkGraph& graph);

PathMetrics ComputePathMetrics(const Path& path, const NetworkGraph& graph,
                               double server_load);

// Checks the full route contract: simple, client first, server last, every
// hop a link. Throws kInvalidPath / kEmptyPath / kUnknownLink.
void ValidatePath(const Path& path, const NetworkGraph& graph);

struct EnumerateOptions {
  // Maximum number of links in a returned path; 0 means |V|.
  std::size_t max_hops = 0;
  // Excludes direct client -> server links: candidate routes must cross at
  // least one router.
  bool require_router = true;
};

// All simple client -> server paths whose intermediate nodes are routers,
// sorted lexicographically by node sequence. Throws kNoServerReachable when
// none exist.
std::vector<Path> EnumeratePaths(const NetworkGraph& graph,
                                 const NodeId& client,
                                 const EnumerateOptions& options = {});

// 1 client, 4 routers, 2 servers. Route A is C-R1-R2-R3-S_A, route B is
// C-R1-R4-S_B; unit energy per hop, 10 Mb/s everywhere, route delays 6 ms
// and 4 ms.
NetworkGraph CanonicalGraph();

}  // namespace asr

#endif
