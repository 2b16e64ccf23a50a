#ifndef TVC_METRICS_HPP
#define TVC_METRICS_HPP

#include <string>
#include <vector>

#include "tvc/infer.hpp"
#include "tvc/mesh.hpp"

namespace tvc {

// Ground-truth correspondence: per source entry, the target vertex index.
// Negative entries mark absent vertices (partial shapes) and are skipped.
struct GroundTruth {
  std::vector<int> correspondence;
};

struct MetricReport {
  std::vector<double> per_point;
  double mean = 0.0;
  std::vector<double> curve_thresholds;
  std::vector<double> curve_values;  // fraction of errors <= threshold
};

// Accuracy curve over 101 uniform thresholds in [0, 0.25]; a final row at the
// max error is appended when errors exceed the range so the curve ends at 1.
MetricReport make_report(std::vector<double> errors);

// Geodesic error between predicted and ground-truth images on eval_mesh,
// normalized by sqrt(surface area).
MetricReport geodesic_error(const std::vector<int>& predicted, const GroundTruth& gt,
                            const TriangleMesh& eval_mesh);

// Point-cloud protocol: compose cloud->nearest-vertex maps on both sides and
// delegate to the mesh protocol on the target mesh.
MetricReport pc_error(const DenseMap& predicted, const GroundTruth& gt_vertex_map,
                      const TriangleMesh& source_mesh, const TriangleMesh& target_mesh,
                      const PointCloud& source_cloud, const PointCloud& target_cloud);

// Cloud point -> nearest mesh vertex (ties to lower index).
std::vector<int> nearest_vertex_map(const PointCloud& cloud, const TriangleMesh& mesh);

struct Keypoints {
  std::vector<std::string> labels;
  std::vector<Vec3> positions;
};

Keypoints load_keypoints(const std::string& path);  // "label x y z" per line

// Push the K-nearest neighborhood of each source keypoint through the map,
// vote each image to its nearest target keypoint, take the majority keypoint
// (ties to smallest mean distance), and measure the Euclidean distance to the
// ground-truth target keypoint sharing the label.
MetricReport keypoint_error(const DenseMap& predicted, const Keypoints& source_keypoints,
                            const Keypoints& target_keypoints, const PointCloud& source_cloud,
                            const PointCloud& target_cloud, int k);

void write_report_json(const MetricReport& report, const std::string& path,
                       const std::string& curve_csv_path, const std::string& per_point_path);
void write_curve_csv(const MetricReport& report, const std::string& path);

}  // namespace tvc

#endif
