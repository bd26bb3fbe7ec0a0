#include "tsdf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "marching_cubes_tables.hpp"

namespace trackfuse {

TsdfVolume::TsdfVolume(const Vec3& bbox_min, const Vec3& bbox_max, double voxel_size,
                       double truncation) {
  if (voxel_size <= 0 || truncation <= 0) {
    throw invalid_argument("TsdfVolume: voxel_size and truncation must be positive");
  }
  voxel_size_ = voxel_size;
  truncation_ = truncation;
  Vec3 origin(std::floor(bbox_min.x() / voxel_size) * voxel_size,
              std::floor(bbox_min.y() / voxel_size) * voxel_size,
              std::floor(bbox_min.z() / voxel_size) * voxel_size);
  Eigen::Vector3i dims;
  for (int d = 0; d < 3; ++d) {
    dims[d] = int(std::ceil((bbox_max[d] - origin[d]) / voxel_size)) + 2;
  }
  allocate(origin, dims);
}

void TsdfVolume::allocate(const Vec3& origin, const Eigen::Vector3i& dims) {
  origin_ = origin;
  dims_ = dims;
  std::size_t n = std::size_t(dims.x()) * dims.y() * dims.z();
  sdf_.assign(n, 1.0);  // unseen sentinel
  weight_.assign(n, 0.0);
  color_.assign(n, {0.f, 0.f, 0.f});
  fused_count_ = 0;
}

void TsdfVolume::reset() {
  std::fill(sdf_.begin(), sdf_.end(), 1.0);
  std::fill(weight_.begin(), weight_.end(), 0.0);
  std::fill(color_.begin(), color_.end(), std::array<float, 3>{0.f, 0.f, 0.f});
  fused_count_ = 0;
}

void TsdfVolume::ensure_bounds(const Vec3& lo, const Vec3& hi) {
  if (!initialized()) throw runtime_error("TsdfVolume::ensure_bounds: not initialized");
  Vec3 cur_hi = origin_ + voxel_size_ * (dims_.cast<double>() - Vec3::Ones());
  bool covered = true;
  for (int d = 0; d < 3; ++d) {
    if (lo[d] < origin_[d] || hi[d] > cur_hi[d]) covered = false;
  }
  if (covered) return;

  // Grow lattice-aligned so existing samples keep their positions exactly.
  Eigen::Vector3i shift = Eigen::Vector3i::Zero();
  Eigen::Vector3i new_dims = dims_;
  for (int d = 0; d < 3; ++d) {
    if (lo[d] < origin_[d]) {
      shift[d] = int(std::ceil((origin_[d] - lo[d]) / voxel_size_)) + 1;
    }
    double needed_hi = std::max(hi[d], cur_hi[d]);
    new_dims[d] = shift[d] + std::max(dims_[d], int(std::ceil((needed_hi - origin_[d]) / voxel_size_)) + 2);
  }
  Vec3 new_origin = origin_ - voxel_size_ * shift.cast<double>();

  std::vector<double> old_sdf = std::move(sdf_);
  std::vector<double> old_weight = std::move(weight_);
  std::vector<std::array<float, 3>> old_color = std::move(color_);
  Eigen::Vector3i old_dims = dims_;
  int old_fused = fused_count_;
  auto old_index = [&](int i, int j, int k) {
    return (std::size_t(k) * old_dims.y() + j) * old_dims.x() + i;
  };

  allocate(new_origin, new_dims);
  fused_count_ = old_fused;
  for (int k = 0; k < old_dims.z(); ++k) {
    for (int j = 0; j < old_dims.y(); ++j) {
      for (int i = 0; i < old_dims.x(); ++i) {
        std::size_t dst = index(i + shift.x(), j + shift.y(), k + shift.z());
        std::size_t src = old_index(i, j, k);
        sdf_[dst] = old_sdf[src];
        weight_[dst] = old_weight[src];
        color_[dst] = old_color[src];
      }
    }
  }
}

void TsdfVolume::integrate(const DepthObservation& obs) {
  if (!initialized()) throw runtime_error("TsdfVolume::integrate: not initialized");
  if (obs.depth.width != obs.camera.width || obs.depth.height != obs.camera.height ||
      obs.mask.width != obs.depth.width || obs.mask.height != obs.depth.height) {
    throw invalid_argument("TsdfVolume::integrate: image dimensions do not match camera");
  }
  const bool has_color = !obs.color.empty();
  if (has_color && (obs.color.width != obs.depth.width || obs.color.height != obs.depth.height)) {
    throw invalid_argument("TsdfVolume::integrate: color dimensions mismatch");
  }

  const Mat3 r = obs.pose.rotation;
  const Vec3 t = obs.pose.translation;
  for (int k = 0; k < dims_.z(); ++k) {
    for (int j = 0; j < dims_.y(); ++j) {
      for (int i = 0; i < dims_.x(); ++i) {
        Vec3 v_cam = r * position(i, j, k) + t;
        if (v_cam.z() <= 0) continue;
        double u = obs.camera.fx * v_cam.x() / v_cam.z() + obs.camera.cx;
        double v = obs.camera.fy * v_cam.y() / v_cam.z() + obs.camera.cy;
        int ui = int(std::lround(u));
        int vi = int(std::lround(v));
        if (!obs.depth.contains(ui, vi)) continue;
        if (!obs.mask(ui, vi)) continue;
        double depth = obs.depth(ui, vi);
        if (depth <= 0) continue;
        double d_m = depth - v_cam.z();
        if (d_m < -truncation_) continue;
        double phi = std::min(1.0, d_m / truncation_);

        std::size_t idx = index(i, j, k);
        double w_old = weight_[idx];
        double w_new = w_old + 1.0;
        sdf_[idx] = (w_old == 0.0) ? phi : (w_old * sdf_[idx] + phi) / w_new;
        if (has_color) {
          const Rgb8& c = obs.color(ui, vi);
          for (int ch = 0; ch < 3; ++ch) {
            double cv = c[ch] / 255.0;
            color_[idx][ch] =
                float((w_old * color_[idx][ch] + cv) / w_new);
          }
        }
        weight_[idx] = w_new;
      }
    }
  }
  ++fused_count_;
}

TsdfVolume::Sample TsdfVolume::sample_trilinear(const Vec3& p) const {
  if (!initialized()) return {};
  Vec3 g = (p - origin_) / voxel_size_;
  for (int d = 0; d < 3; ++d) {
    if (!(g[d] >= 0.0 && g[d] <= dims_[d] - 1.0)) return {};
  }
  int i0 = std::min(int(g.x()), dims_.x() - 2);
  int j0 = std::min(int(g.y()), dims_.y() - 2);
  int k0 = std::min(int(g.z()), dims_.z() - 2);
  double fx = g.x() - i0, fy = g.y() - j0, fz = g.z() - k0;

  double value = 0.0;
  for (int dk = 0; dk < 2; ++dk) {
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) {
        std::size_t idx = index(i0 + di, j0 + dj, k0 + dk);
        if (weight_[idx] == 0.0) return {};
        double w = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
        value += w * sdf_[idx];
      }
    }
  }
  return {value, true};
}

TsdfVolume::Gradient TsdfVolume::sample_gradient(const Vec3& p) const {
  const double h = 0.5 * voxel_size_;
  Vec3 grad;
  for (int d = 0; d < 3; ++d) {
    Vec3 lo = p, hi = p;
    lo[d] -= h;
    hi[d] += h;
    Sample slo = sample_trilinear(lo);
    Sample shi = sample_trilinear(hi);
    if (!slo.valid || !shi.valid) return {};
    grad[d] = (shi.value - slo.value) / (2 * h);
  }
  return {grad, true};
}

namespace {

// Largest connected component by triangle count; vertices are already welded
// so shared-vertex adjacency is the component relation.
void keep_largest_component(TriangleMesh& mesh) {
  if (mesh.triangles.size() < 2) return;
  std::vector<int> parent(mesh.vertices.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = int(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& tri : mesh.triangles) {
    int a = find(tri[0]);
    int b = find(tri[1]);
    int c = find(tri[2]);
    parent[b] = a;
    parent[c] = find(a);
  }
  std::unordered_map<int, int> tri_count;
  for (const auto& tri : mesh.triangles) ++tri_count[find(tri[0])];
  int best_root = -1, best = -1;
  for (const auto& [root, count] : tri_count) {
    if (count > best || (count == best && root < best_root)) {
      best = count;
      best_root = root;
    }
  }

  TriangleMesh filtered;
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (const auto& tri : mesh.triangles) {
    if (find(tri[0]) != best_root) continue;
    std::array<int, 3> out;
    for (int c = 0; c < 3; ++c) {
      int v = tri[c];
      if (remap[v] < 0) {
        remap[v] = int(filtered.vertices.size());
        filtered.vertices.push_back(mesh.vertices[v]);
        filtered.vertex_colors.push_back(mesh.vertex_colors[v]);
      }
      out[c] = remap[v];
    }
    filtered.triangles.push_back(out);
  }
  mesh = std::move(filtered);
}

}  // namespace

TriangleMesh TsdfVolume::extract_mesh() const {
  TriangleMesh mesh;
  if (!initialized() || fused_count_ == 0) return mesh;

  // Canonical lattice-edge key for vertex welding: node index * 3 + axis.
  auto edge_key = [&](int i, int j, int k, int axis) {
    return (std::int64_t((std::int64_t(k) * dims_.y() + j) * dims_.x() + i)) * 3 + axis;
  };
  std::unordered_map<std::int64_t, int> edge_vertex;

  for (int k = 0; k + 1 < dims_.z(); ++k) {
    for (int j = 0; j + 1 < dims_.y(); ++j) {
      for (int i = 0; i + 1 < dims_.x(); ++i) {
        double value[8];
        std::array<float, 3> col[8];
        int cube_index = 0;
        bool observed = true;
        for (int c = 0; c < 8; ++c) {
          int ci = i + mc::kCornerOffsets[c][0];
          int cj = j + mc::kCornerOffsets[c][1];
          int ck = k + mc::kCornerOffsets[c][2];
          std::size_t idx = index(ci, cj, ck);
          if (weight_[idx] == 0.0) {
            observed = false;
            break;
          }
          value[c] = sdf_[idx];
          col[c] = color_[idx];
          if (value[c] < 0.0) cube_index |= (1 << c);
        }
        if (!observed || cube_index == 0 || cube_index == 255) continue;

        int edge_to_index[12];
        for (int e = 0; e < 12; ++e) edge_to_index[e] = -1;
        const int* tris = mc::kTriTable[cube_index];
        for (int tcorner = 0; tris[tcorner] != -1; ++tcorner) {
          int e = tris[tcorner];
          if (edge_to_index[e] >= 0) continue;
          int a = mc::kEdgeCorners[e][0];
          int b = mc::kEdgeCorners[e][1];
          int ax = i + mc::kCornerOffsets[a][0], ay = j + mc::kCornerOffsets[a][1],
              az = k + mc::kCornerOffsets[a][2];
          int bx = i + mc::kCornerOffsets[b][0], by = j + mc::kCornerOffsets[b][1],
              bz = k + mc::kCornerOffsets[b][2];
          int axis = (ax != bx) ? 0 : (ay != by) ? 1 : 2;
          bool a_first = (ax < bx) || (ay < by) || (az < bz);
          int ni = a_first ? ax : bx, nj = a_first ? ay : by, nk = a_first ? az : bz;
          std::int64_t key = edge_key(ni, nj, nk, axis);
          auto it = edge_vertex.find(key);
          if (it != edge_vertex.end()) {
            edge_to_index[e] = it->second;
            continue;
          }
          double va = value[a], vb = value[b];
          double t = (va == vb) ? 0.5 : va / (va - vb);
          t = std::min(1.0, std::max(0.0, t));
          Vec3 pa = position(ax, ay, az), pb = position(bx, by, bz);
          Vec3 vertex = pa + t * (pb - pa);
          Vec3 color((1 - t) * col[a][0] + t * col[b][0], (1 - t) * col[a][1] + t * col[b][1],
                     (1 - t) * col[a][2] + t * col[b][2]);
          int vid = int(mesh.vertices.size());
          mesh.vertices.push_back(vertex);
          mesh.vertex_colors.push_back(color);
          edge_vertex.emplace(key, vid);
          edge_to_index[e] = vid;
        }
        for (int tcorner = 0; tris[tcorner] != -1; tcorner += 3) {
          // Flip to outward-facing winding for sdf positive outside.
          mesh.triangles.push_back({edge_to_index[tris[tcorner]],
                                    edge_to_index[tris[tcorner + 2]],
                                    edge_to_index[tris[tcorner + 1]]});
        }
      }
    }
  }

  keep_largest_component(mesh);
  return mesh;
}

TsdfVolume::Centroid TsdfVolume::surface_centroid() const {
  Vec3 sum = Vec3::Zero();
  long count = 0;
  for (int k = 0; k < dims_.z(); ++k) {
    for (int j = 0; j < dims_.y(); ++j) {
      for (int i = 0; i < dims_.x(); ++i) {
        std::size_t idx = index(i, j, k);
        if (weight_[idx] > 0 && std::abs(sdf_[idx]) < 0.5) {
          sum += position(i, j, k);
          ++count;
        }
      }
    }
  }
  if (count == 0) return {};
  return {sum / double(count), true};
}

void write_obj(const TriangleMesh& mesh, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw io_error("write_obj: cannot open " + path);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    Vec3 c = i < mesh.vertex_colors.size() ? mesh.vertex_colors[i] : Vec3::Zero();
    std::fprintf(f, "v %.9f %.9f %.9f %.6f %.6f %.6f\n", v.x(), v.y(), v.z(), c.x(), c.y(),
                 c.z());
  }
  for (const auto& tri : mesh.triangles) {
    std::fprintf(f, "f %d %d %d\n", tri[0] + 1, tri[1] + 1, tri[2] + 1);
  }
  std::fclose(f);
}

TriangleMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("read_obj: cannot open " + path);
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p, c = Vec3::Zero();
      if (!(ls >> p.x() >> p.y() >> p.z())) throw io_error("read_obj: bad vertex in " + path);
      ls >> c.x() >> c.y() >> c.z();  // optional color triplet
      mesh.vertices.push_back(p);
      mesh.vertex_colors.push_back(c);
    } else if (tag == "f") {
      std::array<int, 3> tri;
      if (!(ls >> tri[0] >> tri[1] >> tri[2])) throw io_error("read_obj: bad face in " + path);
      for (int& v : tri) {
        if (v < 1 || v > int(mesh.vertices.size())) throw io_error("read_obj: bad index in " + path);
        --v;
      }
      mesh.triangles.push_back(tri);
    }
  }
  return mesh;
}

}  // namespace trackfuse
