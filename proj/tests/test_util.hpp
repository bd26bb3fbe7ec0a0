#ifndef TRACKFUSE_TEST_UTIL_HPP
#define TRACKFUSE_TEST_UTIL_HPP

#include <filesystem>
#include <string>

#include "geometry.hpp"
#include "rng.hpp"

namespace trackfuse::testutil {

inline Vec3 random_unit(Rng& rng) {
  // Rejection sample inside the unit ball, then normalize.
  for (;;) {
    Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

inline Mat3 random_rotation(Rng& rng, double max_angle = 3.0) {
  return so3_exp(random_unit(rng) * rng.uniform(0.0, max_angle));
}

inline Pose random_pose(Rng& rng, double max_angle = 3.0, double max_trans = 1.0) {
  return Pose{random_rotation(rng, max_angle),
              Vec3(rng.uniform(-max_trans, max_trans), rng.uniform(-max_trans, max_trans),
                   rng.uniform(-max_trans, max_trans))};
}

inline double max_abs_diff(const Pose& a, const Pose& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

// Unique scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("trackfuse_test_" + tag + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace trackfuse::testutil

#endif
