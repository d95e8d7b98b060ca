#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "irrt/core_types.hpp"

namespace irrt {

/// Dense vertex handle, stable for the life of one planner run.
struct VertexId {
  std::uint32_t value = 0;

  auto operator<=>(const VertexId&) const = default;
};

/// Exact nearest and radius queries over inserted points.
///
/// A bucketed k-d tree. Points live contiguously in their leaf; a leaf splits
/// at its median when it overflows, and the whole tree is rebuilt balanced
/// whenever the size doubles. Results match a linear scan over
/// squared_distance exactly: nearest breaks distance ties by the smaller id,
/// and near returns every id with squared distance <= r * r in ascending id
/// order.
class NearestNeighborIndex {
 public:
  explicit NearestNeighborIndex(std::size_t dim);

  /// Throws InvalidInput on a duplicate id or dimension mismatch.
  void insert(std::span<const double> x, VertexId id);
  void insert(const StateVec& x, VertexId id) { insert(x.coords(), id); }

  /// Throws EmptyIndex when nothing has been inserted.
  VertexId nearest(std::span<const double> x) const;
  std::vector<VertexId> near(std::span<const double> x, double r) const;

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  bool contains(VertexId id) const;

 private:
  static constexpr std::int32_t kNone = -1;
  static constexpr std::size_t kFirstRebuild = 64;
  static constexpr std::size_t kLeafMax = 24;
  static constexpr std::size_t kBuildLeaf = 12;

  // Points with coordinate < split go left, the rest right.
  struct Node {
    double split = 0.0;
    std::uint32_t axis = 0;
    std::int32_t left = kNone;
    std::int32_t right = kNone;
    std::int32_t leaf = kNone;  // index into leaves_ for leaf nodes
  };
  struct Leaf {
    std::vector<std::uint32_t> ids;
    std::vector<double> pts;  // ids.size() * dim, row-major
  };

  void split_leaf(std::int32_t node);
  void rebuild();
  std::int32_t build(std::vector<std::uint32_t>& order, std::size_t begin, std::size_t end,
                     const std::vector<std::uint32_t>& ids, const std::vector<double>& pts);
  std::int32_t make_leaf(Leaf leaf);
  void nearest_from(std::int32_t node, std::span<const double> x, double& best_d2,
                    std::uint32_t& best_id, double* offset, double cell_d2) const;
  void near_from(std::int32_t node, std::span<const double> x, double r2,
                 std::vector<VertexId>& out, double* offset, double cell_d2) const;

  std::size_t dim_;
  std::size_t count_ = 0;
  std::vector<bool> present_;  // by id
  std::vector<Node> nodes_;
  std::vector<Leaf> leaves_;
  std::int32_t root_ = kNone;
  std::size_t next_rebuild_ = kFirstRebuild;
};

}  // namespace irrt
