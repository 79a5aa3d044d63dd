#pragma once

#include <cmath>
#include <vector>

#include "geoseg/error.hpp"
#include "geoseg/image.hpp"

namespace geoseg {

// Sampled Gaussian truncated at radius ceil(3 sigma), renormalised to unit sum.
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution with edge replication at the borders.
inline ScalarField gaussian_smooth(const ScalarField& in, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int r = static_cast<int>(kernel.size() / 2);
  const int w = in.width();
  const int h = in.height();
  ScalarField tmp(in.geometry());
  ScalarField out(in.geometry());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += kernel[i + r] * in(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += kernel[i + r] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = acc;
    }
  }
  return out;
}

inline Image gaussian_smooth(const Image& img, double sigma) {
  std::vector<ScalarField> chans;
  chans.reserve(img.channels());
  for (int c = 0; c < img.channels(); ++c) chans.push_back(gaussian_smooth(img.channel(c), sigma));
  return Image::from_channels(chans);
}

}  // namespace geoseg
