#include "tvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tvc/errors.hpp"
#include "tvc/kdtree.hpp"

namespace tvc {

MetricReport make_report(std::vector<double> errors) {
  if (errors.empty()) throw ValidationError("metric report over zero evaluated points");
  MetricReport report;
  report.per_point = std::move(errors);
  double sum = 0.0;
  double max_err = 0.0;
  for (double e : report.per_point) {
    sum += e;
    max_err = std::max(max_err, e);
  }
  report.mean = sum / static_cast<double>(report.per_point.size());

  const int steps = 101;
  for (int i = 0; i < steps; ++i)
    report.curve_thresholds.push_back(0.25 * static_cast<double>(i) / (steps - 1));
  if (max_err > report.curve_thresholds.back() && std::isfinite(max_err))
    report.curve_thresholds.push_back(max_err);

  std::vector<double> sorted = report.per_point;
  std::sort(sorted.begin(), sorted.end());
  for (double t : report.curve_thresholds) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    report.curve_values.push_back(static_cast<double>(it - sorted.begin()) /
                                  static_cast<double>(sorted.size()));
  }
  return report;
}

MetricReport geodesic_error(const std::vector<int>& predicted, const GroundTruth& gt,
                            const TriangleMesh& eval_mesh) {
  if (predicted.size() != gt.correspondence.size())
    throw ValidationError("predicted and ground-truth maps differ in length");
  const int nv = eval_mesh.vertex_count();
  const double denom = std::sqrt(surface_area(eval_mesh));

  std::map<int, GeodesicField> fields;  // one Dijkstra per distinct gt image
  std::vector<double> errors;
  errors.reserve(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    int truth = gt.correspondence[i];
    if (truth < 0) continue;  // absent vertex (partial protocol)
    int pred = predicted[i];
    if (pred < 0 || pred >= nv || truth >= nv)
      throw ValidationError("map index out of range at entry " + std::to_string(i));
    if (pred == truth) {
      errors.push_back(0.0);
      continue;
    }
    auto it = fields.find(truth);
    if (it == fields.end()) it = fields.emplace(truth, geodesic_distances(eval_mesh, truth)).first;
    errors.push_back(it->second.distances[pred] / denom);
  }
  return make_report(std::move(errors));
}

std::vector<int> nearest_vertex_map(const PointCloud& cloud, const TriangleMesh& mesh) {
  if (cloud.points.empty()) throw ValidationError("nearest-vertex map of an empty cloud");
  KdTree tree(mesh.vertices);
  std::vector<int> map;
  map.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points) map.push_back(tree.nearest(p));
  return map;
}

MetricReport pc_error(const DenseMap& predicted, const GroundTruth& gt_vertex_map,
                      const TriangleMesh& source_mesh, const TriangleMesh& target_mesh,
                      const PointCloud& source_cloud, const PointCloud& target_cloud) {
  if (predicted.assignment.size() != source_cloud.points.size())
    throw ValidationError("map length does not match the source cloud");
  std::vector<int> f_x = nearest_vertex_map(source_cloud, source_mesh);
  std::vector<int> f_y = nearest_vertex_map(target_cloud, target_mesh);

  std::vector<int> pred_vertices(predicted.assignment.size());
  GroundTruth composed_gt;
  composed_gt.correspondence.resize(predicted.assignment.size());
  const int n_target_pts = static_cast<int>(target_cloud.points.size());
  for (std::size_t i = 0; i < predicted.assignment.size(); ++i) {
    int j = predicted.assignment[i];
    if (j < 0 || j >= n_target_pts)
      throw ValidationError("map entry " + std::to_string(i) + " out of target-cloud range");
    pred_vertices[i] = f_y[j];
    int source_vertex = f_x[i];
    if (source_vertex >= static_cast<int>(gt_vertex_map.correspondence.size()))
      throw ValidationError("ground truth does not cover source vertex " +
                            std::to_string(source_vertex));
    composed_gt.correspondence[i] = gt_vertex_map.correspondence[source_vertex];
  }
  return geodesic_error(pred_vertices, composed_gt, target_mesh);
}

Keypoints load_keypoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open keypoint file: " + path);
  Keypoints kp;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string label;
    Vec3 p;
    if (ls >> label >> p.x >> p.y >> p.z) {
      kp.labels.push_back(label);
      kp.positions.push_back(p);
    }
  }
  if (kp.labels.empty()) throw ValidationError("keypoint file is empty: " + path);
  return kp;
}

MetricReport keypoint_error(const DenseMap& predicted, const Keypoints& source_keypoints,
                            const Keypoints& target_keypoints, const PointCloud& source_cloud,
                            const PointCloud& target_cloud, int k) {
  if (k <= 0) throw ValidationError("keypoint neighborhood size must be positive");
  if (k > static_cast<int>(source_cloud.points.size()))
    throw ValidationError("keypoint neighborhood size exceeds the source cloud");
  if (predicted.assignment.size() != source_cloud.points.size())
    throw ValidationError("map length does not match the source cloud");

  KdTree source_tree(source_cloud.points);
  const int n_target_kp = static_cast<int>(target_keypoints.positions.size());

  std::vector<double> errors;
  for (std::size_t i = 0; i < source_keypoints.positions.size(); ++i) {
    const std::string& label = source_keypoints.labels[i];
    int gt_idx = -1;
    for (int j = 0; j < n_target_kp; ++j)
      if (target_keypoints.labels[j] == label) {
        gt_idx = j;
        break;
      }
    if (gt_idx < 0) throw ValidationError("target keypoints lack label '" + label + "'");

    std::vector<int> neighborhood = source_tree.knn(source_keypoints.positions[i], k);
    // Vote each pushed point to its nearest target keypoint.
    std::vector<int> votes(n_target_kp, 0);
    std::vector<Vec3> pushed;
    pushed.reserve(neighborhood.size());
    for (int src_pt : neighborhood) {
      int tgt_pt = predicted.assignment[src_pt];
      if (tgt_pt < 0 || tgt_pt >= static_cast<int>(target_cloud.points.size()))
        throw ValidationError("map entry out of target-cloud range");
      const Vec3& q = target_cloud.points[tgt_pt];
      pushed.push_back(q);
      int best = 0;
      double best_d = dist2(q, target_keypoints.positions[0]);
      for (int j = 1; j < n_target_kp; ++j) {
        double d = dist2(q, target_keypoints.positions[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      ++votes[best];
    }
    // Majority keypoint; ties go to the candidate with the smallest mean
    // distance to the pushed points, then to the lower index.
    int winner = -1;
    double winner_mean = 0.0;
    for (int j = 0; j < n_target_kp; ++j) {
      if (votes[j] == 0) continue;
      double mean_d = 0.0;
      for (const Vec3& q : pushed) mean_d += dist(q, target_keypoints.positions[j]);
      mean_d /= static_cast<double>(pushed.size());
      if (winner < 0 || votes[j] > votes[winner] ||
          (votes[j] == votes[winner] && mean_d < winner_mean)) {
        winner = j;
        winner_mean = mean_d;
      }
    }
    errors.push_back(dist(target_keypoints.positions[winner],
                          target_keypoints.positions[gt_idx]));
  }
  return make_report(std::move(errors));
}

void write_curve_csv(const MetricReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write curve csv: " + path);
  out << "threshold,fraction\n";
  out.precision(17);
  for (std::size_t i = 0; i < report.curve_thresholds.size(); ++i)
    out << report.curve_thresholds[i] << "," << report.curve_values[i] << "\n";
  if (!out) throw IoError("failed writing curve csv: " + path);
}

void write_report_json(const MetricReport& report, const std::string& path,
                       const std::string& curve_csv_path, const std::string& per_point_path) {
  {
    std::ofstream pp(per_point_path);
    if (!pp) throw IoError("cannot write per-point errors: " + per_point_path);
    pp.precision(17);
    for (double e : report.per_point) pp << e << "\n";
  }
  write_curve_csv(report, curve_csv_path);
  nlohmann::json j = {{"mean", report.mean},
                      {"count", report.per_point.size()},
                      {"per_point_file", per_point_path},
                      {"curve_csv", curve_csv_path}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing report: " + path);
}

}  // namespace tvc
