#ifndef TRACKFUSE_TSDF_HPP
#define TRACKFUSE_TSDF_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "geometry.hpp"
#include "image.hpp"

namespace trackfuse {

// One segmented RGB-D view of an object with its object->camera pose.
struct DepthObservation {
  DepthImage depth;
  MaskImage mask;   // nonzero = this object's pixels
  ColorImage color; // may be empty; depth dimensions otherwise
  CameraModel camera;
  Pose pose;  // object frame -> camera frame
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> vertex_colors;  // RGB in [0,1], same size as vertices

  bool empty() const { return triangles.empty(); }
};

// Object-centric truncated signed distance volume. Values are normalized by
// the truncation margin tau, so the stored field lives in [-1, 1] with +1 as
// the unseen sentinel. Voxel samples sit on the lattice origin + index*voxel.
class TsdfVolume {
 public:
  TsdfVolume() = default;
  TsdfVolume(const Vec3& bbox_min, const Vec3& bbox_max, double voxel_size,
             double truncation);

  bool initialized() const { return !sdf_.empty(); }
  int fused_count() const { return fused_count_; }

  const Vec3& origin() const { return origin_; }
  double voxel_size() const { return voxel_size_; }
  double truncation() const { return truncation_; }
  const Eigen::Vector3i& dims() const { return dims_; }

  double value_at(int i, int j, int k) const { return sdf_[index(i, j, k)]; }
  double weight_at(int i, int j, int k) const { return weight_[index(i, j, k)]; }

  // Folds one observation into the volume (projective update, binary weight).
  void integrate(const DepthObservation& obs);

  // Clears all fused data but keeps the grid allocation.
  void reset();

  // Grows the grid (lattice-aligned, existing content copied) so that the
  // padded box [lo, hi] is covered. No-op when already covered.
  void ensure_bounds(const Vec3& lo, const Vec3& hi);

  struct Sample {
    double value = 1.0;
    bool valid = false;
  };
  // Trilinear interpolation; invalid outside the grid or when any of the 8
  // surrounding voxels is unseen.
  Sample sample_trilinear(const Vec3& p) const;

  struct Gradient {
    Vec3 gradient = Vec3::Zero();
    bool valid = false;
  };
  // Central differences of sample_trilinear with step voxel_size/2.
  Gradient sample_gradient(const Vec3& p) const;

  // Marching cubes at the zero isosurface, restricted to fully observed
  // cells, followed by a largest-connected-component filter.
  TriangleMesh extract_mesh() const;

  // Mean position of observed near-surface voxels (|value| < 0.5); invalid
  // when nothing has been fused near a surface yet.
  struct Centroid {
    Vec3 position = Vec3::Zero();
    bool valid = false;
  };
  Centroid surface_centroid() const;

 private:
  std::size_t index(int i, int j, int k) const {
    return (std::size_t(k) * dims_.y() + j) * dims_.x() + i;
  }
  Vec3 position(int i, int j, int k) const {
    return origin_ + voxel_size_ * Vec3(i, j, k);
  }
  void allocate(const Vec3& origin, const Eigen::Vector3i& dims);

  Vec3 origin_ = Vec3::Zero();
  double voxel_size_ = 0.004;
  double truncation_ = 0.012;
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  std::vector<double> sdf_;
  std::vector<double> weight_;
  std::vector<std::array<float, 3>> color_;
  int fused_count_ = 0;
};

// Writes "v x y z r g b" / "f i j k" ASCII OBJ.
void write_obj(const TriangleMesh& mesh, const std::string& path);
TriangleMesh read_obj(const std::string& path);

}  // namespace trackfuse

#endif
