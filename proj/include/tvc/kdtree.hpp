#ifndef TVC_KDTREE_HPP
#define TVC_KDTREE_HPP

#include <vector>

#include "tvc/vec3.hpp"

namespace tvc {

// Static kd-tree over a point set. Queries return the exact K nearest under
// Euclidean distance; equal distances break toward the lower point index, so
// results match a brute-force scan ordered by (distance, index).
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  // Indices of the min(k, n) nearest points, sorted by (distance, index).
  std::vector<int> knn(const Vec3& query, int k) const;
  int nearest(const Vec3& query) const;

  const std::vector<Vec3>& points() const { return points_; }
  bool empty() const { return points_.empty(); }

 private:
  struct Node {
    int axis = -1;        // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  struct Candidate {
    double d2;
    int index;
    bool operator<(const Candidate& o) const {  // max-heap on (d2, index)
      return d2 != o.d2 ? d2 < o.d2 : index < o.index;
    }
  };

  int build(int begin, int end);
  void search(int node, const Vec3& query, int k, std::vector<Candidate>& heap) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Reference implementation used by tests and tiny inputs.
std::vector<int> brute_force_knn(const std::vector<Vec3>& points, const Vec3& query, int k);

}  // namespace tvc

#endif
