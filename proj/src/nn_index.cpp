#include "irrt/nn_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>

namespace irrt {

namespace {

// A split value that leaves at least one point on each side, or nothing when
// every value is equal.
std::optional<double> split_value(std::vector<double> values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  if (*hi == min) return std::nullopt;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (*mid > min) return *mid;
  double next = std::numeric_limits<double>::infinity();
  for (double v : values)
    if (v > min) next = std::min(next, v);
  return next;
}

// Axis of largest spread over `count` rows of `pts` selected by `rows`.
template <class Rows>
std::uint32_t widest_axis(const Rows& rows, const std::vector<double>& pts, std::size_t dim) {
  std::uint32_t best = 0;
  double widest = -1.0;
  for (std::size_t a = 0; a < dim; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto r : rows) {
      lo = std::min(lo, pts[r * dim + a]);
      hi = std::max(hi, pts[r * dim + a]);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      best = static_cast<std::uint32_t>(a);
    }
  }
  return best;
}

}  // namespace

NearestNeighborIndex::NearestNeighborIndex(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidInput("index dimension must be at least 1");
}

bool NearestNeighborIndex::contains(VertexId id) const {
  return id.value < present_.size() && present_[id.value];
}

std::int32_t NearestNeighborIndex::make_leaf(Leaf leaf) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  Node node;
  node.leaf = static_cast<std::int32_t>(leaves_.size());
  leaves_.push_back(std::move(leaf));
  nodes_.push_back(node);
  return index;
}

void NearestNeighborIndex::insert(std::span<const double> x, VertexId id) {
  if (x.size() != dim_) throw InvalidInput("index point dimension mismatch");
  if (contains(id)) throw InvalidInput("duplicate vertex id in index");
  if (id.value >= present_.size()) present_.resize(id.value + 1, false);
  present_[id.value] = true;
  ++count_;

  if (root_ == kNone) root_ = make_leaf({});
  std::int32_t cur = root_;
  while (nodes_[static_cast<std::size_t>(cur)].leaf == kNone) {
    const Node& node = nodes_[static_cast<std::size_t>(cur)];
    cur = x[node.axis] < node.split ? node.left : node.right;
  }
  Leaf& leaf = leaves_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(cur)].leaf)];
  leaf.ids.push_back(id.value);
  leaf.pts.insert(leaf.pts.end(), x.begin(), x.end());

  if (count_ >= next_rebuild_) {
    rebuild();
    next_rebuild_ = count_ * 2;
  } else if (leaf.ids.size() > kLeafMax) {
    split_leaf(cur);
  }
}

void NearestNeighborIndex::split_leaf(std::int32_t node_index) {
  const auto leaf_index = static_cast<std::size_t>(nodes_[static_cast<std::size_t>(node_index)].leaf);
  const Leaf& leaf = leaves_[leaf_index];
  const std::size_t count = leaf.ids.size();
  std::vector<std::size_t> rows(count);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const std::uint32_t axis = widest_axis(rows, leaf.pts, dim_);
  std::vector<double> values(count);
  for (std::size_t r = 0; r < count; ++r) values[r] = leaf.pts[r * dim_ + axis];
  const auto split = split_value(values);
  if (!split) return;  // all points coincide; keep the oversized leaf

  Leaf left, right;
  for (std::size_t r = 0; r < count; ++r) {
    Leaf& side = values[r] < *split ? left : right;
    side.ids.push_back(leaf.ids[r]);
    side.pts.insert(side.pts.end(), leaf.pts.begin() + static_cast<std::ptrdiff_t>(r * dim_),
                    leaf.pts.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim_));
  }
  // Reuse the old leaf slot for the left half.
  leaves_[leaf_index] = std::move(left);
  Node left_node;
  left_node.leaf = static_cast<std::int32_t>(leaf_index);
  const auto left_index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(left_node);
  const std::int32_t right_index = make_leaf(std::move(right));

  Node& node = nodes_[static_cast<std::size_t>(node_index)];
  node.leaf = kNone;
  node.axis = axis;
  node.split = *split;
  node.left = left_index;
  node.right = right_index;
}

void NearestNeighborIndex::rebuild() {
  std::vector<std::uint32_t> ids;
  std::vector<double> pts;
  ids.reserve(count_);
  pts.reserve(count_ * dim_);
  for (const auto& leaf : leaves_) {
    ids.insert(ids.end(), leaf.ids.begin(), leaf.ids.end());
    pts.insert(pts.end(), leaf.pts.begin(), leaf.pts.end());
  }
  nodes_.clear();
  leaves_.clear();
  std::vector<std::uint32_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0u);
  root_ = build(order, 0, order.size(), ids, pts);
}

std::int32_t NearestNeighborIndex::build(std::vector<std::uint32_t>& order, std::size_t begin,
                                         std::size_t end, const std::vector<std::uint32_t>& ids,
                                         const std::vector<double>& pts) {
  const std::span<std::uint32_t> rows(order.data() + begin, end - begin);
  auto leaf_of = [&] {
    Leaf leaf;
    for (auto r : rows) {
      leaf.ids.push_back(ids[r]);
      leaf.pts.insert(leaf.pts.end(), pts.begin() + static_cast<std::ptrdiff_t>(r * dim_),
                      pts.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim_));
    }
    return make_leaf(std::move(leaf));
  };
  if (rows.size() <= kBuildLeaf) return leaf_of();

  const std::uint32_t axis = widest_axis(rows, pts, dim_);
  std::vector<double> values;
  values.reserve(rows.size());
  for (auto r : rows) values.push_back(pts[r * dim_ + axis]);
  const auto split = split_value(std::move(values));
  if (!split) return leaf_of();

  const auto mid = std::partition(rows.begin(), rows.end(), [&](std::uint32_t r) {
    return pts[r * dim_ + axis] < *split;
  });
  const std::size_t cut = begin + static_cast<std::size_t>(mid - rows.begin());

  const auto index = static_cast<std::int32_t>(nodes_.size());
  Node node;
  node.axis = axis;
  node.split = *split;
  nodes_.push_back(node);
  const std::int32_t left = build(order, begin, cut, ids, pts);
  const std::int32_t right = build(order, cut, end, ids, pts);
  nodes_[static_cast<std::size_t>(index)].left = left;
  nodes_[static_cast<std::size_t>(index)].right = right;
  return index;
}

// Pruning uses the squared distance from x to the query cell, tracked per
// axis as the descent crosses splits. That bound and squared_distance round
// differently, so a far side is skipped only when the bound clears the
// threshold by a relative margin well above either rounding error. No point
// that a linear scan would accept is ever dropped.
namespace {
constexpr double kPruneSlack = 1.0 + 1e-12;
}

void NearestNeighborIndex::nearest_from(std::int32_t index, std::span<const double> x,
                                        double& best_d2, std::uint32_t& best_id,
                                        double* offset, double cell_d2) const {
  const Node& node = nodes_[static_cast<std::size_t>(index)];
  if (node.leaf != kNone) {
    const Leaf& leaf = leaves_[static_cast<std::size_t>(node.leaf)];
    for (std::size_t k = 0; k < leaf.ids.size(); ++k) {
      const double d2 = squared_distance(x, {leaf.pts.data() + k * dim_, dim_});
      if (d2 < best_d2 || (d2 == best_d2 && leaf.ids[k] < best_id)) {
        best_d2 = d2;
        best_id = leaf.ids[k];
      }
    }
    return;
  }
  const double diff = x[node.axis] - node.split;
  nearest_from(diff < 0.0 ? node.left : node.right, x, best_d2, best_id, offset, cell_d2);
  const double old = offset[node.axis];
  const double far_d2 = cell_d2 - old * old + diff * diff;
  if (far_d2 <= best_d2 * kPruneSlack) {
    offset[node.axis] = diff;
    nearest_from(diff < 0.0 ? node.right : node.left, x, best_d2, best_id, offset, far_d2);
    offset[node.axis] = old;
  }
}

VertexId NearestNeighborIndex::nearest(std::span<const double> x) const {
  if (count_ == 0) throw EmptyIndex("nearest query on an empty index");
  if (x.size() != dim_) throw InvalidInput("query dimension mismatch");
  double best_d2 = std::numeric_limits<double>::infinity();
  std::uint32_t best_id = std::numeric_limits<std::uint32_t>::max();
  std::vector<double> offset(dim_, 0.0);
  nearest_from(root_, x, best_d2, best_id, offset.data(), 0.0);
  return VertexId{best_id};
}

void NearestNeighborIndex::near_from(std::int32_t index, std::span<const double> x, double r2,
                                     std::vector<VertexId>& out, double* offset,
                                     double cell_d2) const {
  const Node& node = nodes_[static_cast<std::size_t>(index)];
  if (node.leaf != kNone) {
    const Leaf& leaf = leaves_[static_cast<std::size_t>(node.leaf)];
    for (std::size_t k = 0; k < leaf.ids.size(); ++k)
      if (squared_distance(x, {leaf.pts.data() + k * dim_, dim_}) <= r2)
        out.push_back(VertexId{leaf.ids[k]});
    return;
  }
  const double diff = x[node.axis] - node.split;
  near_from(diff < 0.0 ? node.left : node.right, x, r2, out, offset, cell_d2);
  const double old = offset[node.axis];
  const double far_d2 = cell_d2 - old * old + diff * diff;
  if (far_d2 <= r2 * kPruneSlack) {
    offset[node.axis] = diff;
    near_from(diff < 0.0 ? node.right : node.left, x, r2, out, offset, far_d2);
    offset[node.axis] = old;
  }
}

std::vector<VertexId> NearestNeighborIndex::near(std::span<const double> x, double r) const {
  if (x.size() != dim_) throw InvalidInput("query dimension mismatch");
  if (!(r >= 0.0)) throw InvalidInput("near radius must be non-negative");
  std::vector<VertexId> out;
  if (count_ == 0) return out;
  std::vector<double> offset(dim_, 0.0);
  near_from(root_, x, r * r, out, offset.data(), 0.0);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace irrt
