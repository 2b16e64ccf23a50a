#include "tvc/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "tvc/errors.hpp"

namespace tvc {

namespace {
constexpr int kLeafSize = 16;
}

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  double extent = hi[0] - lo[0];
  for (int a = 1; a < 3; ++a)
    if (hi[a] - lo[a] > extent) {
      extent = hi[a] - lo[a];
      axis = a;
    }
  if (extent <= 0.0) {  // all points coincide
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];

  int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(int node_idx, const Vec3& query, int k, std::vector<Candidate>& heap) const {
  const Node& node = nodes_[node_idx];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      int idx = order_[i];
      Candidate c{dist2(query, points_[idx]), idx};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end());
      } else if (c < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  double delta = query[node.axis] - node.split;
  int near = delta < 0.0 ? node.left : node.right;
  int far = delta < 0.0 ? node.right : node.left;
  search(near, query, k, heap);
  // Ties on the plane must still be visited so index ordering stays exact.
  if (static_cast<int>(heap.size()) < k || delta * delta <= heap.front().d2)
    search(far, query, k, heap);
}

std::vector<int> KdTree::knn(const Vec3& query, int k) const {
  if (points_.empty()) throw ValidationError("knn on an empty index");
  k = std::min<int>(k, static_cast<int>(points_.size()));
  if (k <= 0) return {};
  std::vector<Candidate> heap;
  heap.reserve(k + 1);
  search(root_, query, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  std::vector<int> out(heap.size());
  for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].index;
  return out;
}

int KdTree::nearest(const Vec3& query) const { return knn(query, 1)[0]; }

std::vector<int> brute_force_knn(const std::vector<Vec3>& points, const Vec3& query, int k) {
  if (points.empty()) throw ValidationError("knn on an empty point set");
  std::vector<std::pair<double, int>> d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    d[i] = {dist2(query, points[i]), static_cast<int>(i)};
  k = std::min<int>(k, static_cast<int>(points.size()));
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

}  // namespace tvc
