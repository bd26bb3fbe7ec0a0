#ifndef TRACKFUSE_IMAGE_HPP
#define TRACKFUSE_IMAGE_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace trackfuse {

template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(std::size_t(w) * h, fill) {}

  T& operator()(int x, int y) { return data[std::size_t(y) * width + x]; }
  const T& operator()(int x, int y) const { return data[std::size_t(y) * width + x]; }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  bool empty() const { return data.empty(); }
};

using Rgb8 = std::array<std::uint8_t, 3>;
using DepthImage = Image<float>;    // meters, 0 = invalid
using MaskImage = Image<std::uint8_t>;
using ColorImage = Image<Rgb8>;

}  // namespace trackfuse

#endif
