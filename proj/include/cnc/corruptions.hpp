#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cnc/rng.hpp"
#include "cnc/severity.hpp"
#include "cnc/tensor.hpp"

namespace cnc {

inline constexpr std::array<std::string_view, 10> kImageCorruptions = {
    "gaussian_noise", "shot_noise", "speckle_noise",     "defocus_blur",  "motion_blur",
    "contrast",       "fog",        "elastic_transform", "jpeg_quantize", "pixelate"};

inline constexpr std::array<std::string_view, 2> kPointCorruptions = {"jitter", "scale_warp"};

/// Every registered identifier: the image ops followed by the point ops.
inline std::vector<std::string> registry_list() {
  std::vector<std::string> ids(kImageCorruptions.begin(), kImageCorruptions.end());
  ids.insert(ids.end(), kPointCorruptions.begin(), kPointCorruptions.end());
  return ids;
}

inline bool is_image_corruption(std::string_view op) {
  return std::find(kImageCorruptions.begin(), kImageCorruptions.end(), op) != kImageCorruptions.end();
}

inline bool is_point_corruption(std::string_view op) {
  return std::find(kPointCorruptions.begin(), kPointCorruptions.end(), op) != kPointCorruptions.end();
}

inline bool is_registered(std::string_view op) { return is_image_corruption(op) || is_point_corruption(op); }

struct CorruptionSpec {
  std::string op;
  int severity = 1;
  RngStream rng;

  void validate() const {
    if (!is_registered(op)) {
      throw std::invalid_argument("unregistered corruption '" + op + "'");
    }
    if (severity < 1 || severity > 5) {
      throw std::invalid_argument("corruption severity must be in 1..5");
    }
  }
};

namespace detail {

inline int reflect101(int i, int n) {
  if (n == 1) {
    return 0;
  }
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) {
    i += period;
  }
  return i < n ? i : period - i;
}

/// Plane of doubles, one channel.
struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  Plane(int width, int height, double fill = 0.0)
      : w(width), h(height), v(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)]; }
  double reflect(int x, int y) const { return at(reflect101(x, w), reflect101(y, h)); }

  /// Bilinear sample with reflect101 borders.
  double sample(double x, double y) const {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double tx = x - fx;
    const double ty = y - fy;
    return (1 - tx) * (1 - ty) * reflect(x0, y0) + tx * (1 - ty) * reflect(x0 + 1, y0) +
           (1 - tx) * ty * reflect(x0, y0 + 1) + tx * ty * reflect(x0 + 1, y0 + 1);
  }
};

inline Plane channel_plane(const ImageTensor& img, int c) {
  Plane p(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      p.at(x, y) = img.at(x, y, c);
    }
  }
  return p;
}

inline void store_plane(ImageTensor& img, int c, const Plane& p) {
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      img.at(x, y, c) = static_cast<float>(p.at(x, y));
    }
  }
}

/// Odd-sized square kernel, correlation form, centered.
struct Kernel {
  int radius = 0;
  std::vector<double> w;

  explicit Kernel(int r) : radius(r), w(static_cast<std::size_t>((2 * r + 1) * (2 * r + 1)), 0.0) {}
  int side() const { return 2 * radius + 1; }
  double& at(int dx, int dy) { return w[static_cast<std::size_t>((dy + radius) * side() + (dx + radius))]; }
  double at(int dx, int dy) const { return w[static_cast<std::size_t>((dy + radius) * side() + (dx + radius))]; }

  void normalize() {
    double s = 0.0;
    for (double v : w) {
      s += v;
    }
    for (double& v : w) {
      v /= s;
    }
  }
};

inline Plane convolve(const Plane& in, const Kernel& k) {
  Plane out(in.w, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int dy = -k.radius; dy <= k.radius; ++dy) {
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
          const double kw = k.at(dx, dy);
          if (kw != 0.0) {
            acc += kw * in.reflect(x + dx, y + dy);
          }
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline std::vector<double> gaussian_1d(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double s = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + r)] = v;
    s += v;
  }
  for (double& v : k) {
    v /= s;
  }
  return k;
}

/// Separable Gaussian smoothing with reflect101 borders.
inline Plane gaussian_smooth(const Plane& in, double sigma) {
  if (sigma <= 0.0) {
    return in;
  }
  const std::vector<double> k = gaussian_1d(sigma);
  const int r = static_cast<int>(k.size() / 2);
  Plane tmp(in.w, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += k[static_cast<std::size_t>(i + r)] * in.reflect(x + i, y);
      }
      tmp.at(x, y) = acc;
    }
  }
  Plane out(in.w, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += k[static_cast<std::size_t>(i + r)] * tmp.reflect(x, y + i);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline ImageTensor map_planes(const ImageTensor& x, const auto& fn) {
  ImageTensor out = x;
  for (int c = 0; c < x.channels(); ++c) {
    store_plane(out, c, fn(channel_plane(x, c)));
  }
  return out;
}

/// Aliased disk of the given radius, then a Gaussian of width `alias`.
inline Kernel defocus_kernel(double radius, double alias) {
  const int r_disk = static_cast<int>(std::floor(radius));
  const int r_alias = alias > 0.0 ? std::max(1, static_cast<int>(std::ceil(3.0 * alias))) : 0;
  Kernel disk(r_disk);
  for (int dy = -r_disk; dy <= r_disk; ++dy) {
    for (int dx = -r_disk; dx <= r_disk; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) {
        disk.at(dx, dy) = 1.0;
      }
    }
  }
  disk.normalize();
  if (r_alias == 0) {
    return disk;
  }
  Kernel out(r_disk + r_alias);
  for (int ay = -r_alias; ay <= r_alias; ++ay) {
    for (int ax = -r_alias; ax <= r_alias; ++ax) {
      const double g = std::exp(-0.5 * (ax * ax + ay * ay) / (alias * alias));
      for (int dy = -r_disk; dy <= r_disk; ++dy) {
        for (int dx = -r_disk; dx <= r_disk; ++dx) {
          out.at(dx + ax, dy + ay) += g * disk.at(dx, dy);
        }
      }
    }
  }
  out.normalize();
  return out;
}

/// One-sided line kernel of length `radius` at `angle` (radians), with
/// Gaussian falloff `sigma` along the line; taps are splatted bilinearly.
inline Kernel motion_kernel(double radius, double sigma, double angle) {
  const int r = static_cast<int>(std::ceil(radius)) + 1;
  Kernel k(r);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int t = 0; t <= static_cast<int>(radius); ++t) {
    const double wt = std::exp(-0.5 * (t * t) / (sigma * sigma));
    const double px = t * c;
    const double py = t * s;
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const double fx = px - x0;
    const double fy = py - y0;
    k.at(x0, y0) += wt * (1 - fx) * (1 - fy);
    k.at(x0 + 1, y0) += wt * fx * (1 - fy);
    k.at(x0, y0 + 1) += wt * (1 - fx) * fy;
    k.at(x0 + 1, y0 + 1) += wt * fx * fy;
  }
  k.normalize();
  return k;
}

/// Diamond-square plasma fractal on a torus of side `mapsize` (power of two),
/// normalized to [0, 1].
inline std::vector<double> plasma_fractal(int mapsize, double decay, RngStream& rng) {
  const int n = mapsize;
  std::vector<double> m(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  auto at = [&](int i, int j) -> double& {
    i = ((i % n) + n) % n;
    j = ((j % n) + n) % n;
    return m[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
  };
  double wibble = 100.0;
  for (int step = n; step >= 2; step /= 2) {
    const int half = step / 2;
    auto wibbled = [&](double sum) { return sum / 4.0 + wibble * rng.uniform(-wibble, wibble); };
    for (int i = 0; i < n; i += step) {
      for (int j = 0; j < n; j += step) {
        const double sum = at(i, j) + at(i + step, j) + at(i, j + step) + at(i + step, j + step);
        at(i + half, j + half) = wibbled(sum);
      }
    }
    for (int i = 0; i < n; i += step) {
      for (int j = 0; j < n; j += step) {
        const double sum = at(i + half, j + half) + at(i - half, j + half) + at(i, j) + at(i, j + step);
        at(i, j + half) = wibbled(sum);
      }
    }
    for (int i = 0; i < n; i += step) {
      for (int j = 0; j < n; j += step) {
        const double sum = at(i + half, j + half) + at(i + half, j - half) + at(i, j) + at(i + step, j);
        at(i + half, j) = wibbled(sum);
      }
    }
    wibble /= decay;
  }
  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  const double lo_v = *lo;
  const double span = *hi - lo_v;
  for (double& v : m) {
    v = span > 0.0 ? (v - lo_v) / span : 0.0;
  }
  return m;
}

inline const std::array<int, 64>& jpeg_luma_table() {
  static const std::array<int, 64> t = {
      16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
      14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
      18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
      49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
  return t;
}

inline const std::array<int, 64>& jpeg_chroma_table() {
  static const std::array<int, 64> t = [] {
    std::array<int, 64> c{};
    c.fill(99);
    const int head[4][4] = {{17, 18, 24, 47}, {18, 21, 26, 66}, {24, 26, 56, 99}, {47, 66, 99, 99}};
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        c[static_cast<std::size_t>(i * 8 + j)] = head[i][j];
      }
    }
    return c;
  }();
  return t;
}

/// IJG quality scaling of a base quantization table.
inline std::array<double, 64> jpeg_scaled_table(const std::array<int, 64>& base, double quality) {
  const double q = std::clamp(quality, 1.0, 100.0);
  const double scale = q < 50.0 ? 5000.0 / q : 200.0 - 2.0 * q;
  std::array<double, 64> out{};
  for (std::size_t i = 0; i < 64; ++i) {
    out[i] = std::clamp(std::floor((base[i] * scale + 50.0) / 100.0), 1.0, 255.0);
  }
  return out;
}

inline const std::array<double, 64>& dct_basis() {
  static const std::array<double, 64> b = [] {
    std::array<double, 64> t{};
    for (int k = 0; k < 8; ++k) {
      const double a = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) {
        t[static_cast<std::size_t>(k * 8 + n)] = a * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
      }
    }
    return t;
  }();
  return b;
}

/// Quantizes one plane (values in 0..255 scale, level-shifted inside) in 8x8 blocks.
inline void jpeg_plane(Plane& p, const std::array<double, 64>& qt) {
  const auto& basis = dct_basis();
  std::array<double, 64> block{};
  std::array<double, 64> tmp{};
  std::array<double, 64> coef{};
  for (int by = 0; by < p.h; by += 8) {
    for (int bx = 0; bx < p.w; bx += 8) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          block[static_cast<std::size_t>(y * 8 + x)] =
              p.at(std::min(bx + x, p.w - 1), std::min(by + y, p.h - 1)) - 128.0;
        }
      }
      // forward: coef = B * block * B^T
      for (int k = 0; k < 8; ++k) {
        for (int x = 0; x < 8; ++x) {
          double acc = 0.0;
          for (int n = 0; n < 8; ++n) {
            acc += basis[static_cast<std::size_t>(k * 8 + n)] * block[static_cast<std::size_t>(n * 8 + x)];
          }
          tmp[static_cast<std::size_t>(k * 8 + x)] = acc;
        }
      }
      for (int k = 0; k < 8; ++k) {
        for (int l = 0; l < 8; ++l) {
          double acc = 0.0;
          for (int n = 0; n < 8; ++n) {
            acc += tmp[static_cast<std::size_t>(k * 8 + n)] * basis[static_cast<std::size_t>(l * 8 + n)];
          }
          const double q = qt[static_cast<std::size_t>(k * 8 + l)];
          coef[static_cast<std::size_t>(k * 8 + l)] = std::nearbyint(acc / q) * q;
        }
      }
      // inverse: block = B^T * coef * B
      for (int n = 0; n < 8; ++n) {
        for (int l = 0; l < 8; ++l) {
          double acc = 0.0;
          for (int k = 0; k < 8; ++k) {
            acc += basis[static_cast<std::size_t>(k * 8 + n)] * coef[static_cast<std::size_t>(k * 8 + l)];
          }
          tmp[static_cast<std::size_t>(n * 8 + l)] = acc;
        }
      }
      for (int n = 0; n < 8; ++n) {
        for (int m = 0; m < 8; ++m) {
          double acc = 0.0;
          for (int l = 0; l < 8; ++l) {
            acc += tmp[static_cast<std::size_t>(n * 8 + l)] * basis[static_cast<std::size_t>(l * 8 + m)];
          }
          const int x = bx + m;
          const int y = by + n;
          if (x < p.w && y < p.h) {
            p.at(x, y) = acc + 128.0;
          }
        }
      }
    }
  }
}

inline ImageTensor jpeg_quantize(const ImageTensor& x, double quality) {
  const auto luma_q = jpeg_scaled_table(jpeg_luma_table(), quality);
  ImageTensor out = x;
  if (x.channels() != 3) {
    for (int c = 0; c < x.channels(); ++c) {
      Plane p = channel_plane(x, c);
      for (double& v : p.v) {
        v *= 255.0;
      }
      jpeg_plane(p, luma_q);
      for (double& v : p.v) {
        v /= 255.0;
      }
      store_plane(out, c, p);
    }
    return out;
  }
  const auto chroma_q = jpeg_scaled_table(jpeg_chroma_table(), quality);
  Plane yp(x.width(), x.height());
  Plane cb(x.width(), x.height());
  Plane cr(x.width(), x.height());
  for (int y = 0; y < x.height(); ++y) {
    for (int i = 0; i < x.width(); ++i) {
      const double r = 255.0 * x.at(i, y, 0);
      const double g = 255.0 * x.at(i, y, 1);
      const double b = 255.0 * x.at(i, y, 2);
      yp.at(i, y) = 0.299 * r + 0.587 * g + 0.114 * b;
      cb.at(i, y) = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
      cr.at(i, y) = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
    }
  }
  jpeg_plane(yp, luma_q);
  jpeg_plane(cb, chroma_q);
  jpeg_plane(cr, chroma_q);
  for (int y = 0; y < x.height(); ++y) {
    for (int i = 0; i < x.width(); ++i) {
      const double Y = yp.at(i, y);
      const double Cb = cb.at(i, y) - 128.0;
      const double Cr = cr.at(i, y) - 128.0;
      out.at(i, y, 0) = static_cast<float>((Y + 1.402 * Cr) / 255.0);
      out.at(i, y, 1) = static_cast<float>((Y - 0.344136 * Cb - 0.714136 * Cr) / 255.0);
      out.at(i, y, 2) = static_cast<float>((Y + 1.772 * Cb) / 255.0);
    }
  }
  return out;
}

}  // namespace detail

/// psi(x, op, severity). Output has the input's shape and is clamped to [0, 1].
inline ImageTensor apply_corruption(const ImageTensor& x, const CorruptionSpec& spec,
                                    const SeverityTable& table = SeverityTable::defaults()) {
  spec.validate();
  if (!is_image_corruption(spec.op)) {
    throw std::invalid_argument("'" + spec.op + "' is not an image corruption");
  }
  RngStream rng = spec.rng;
  const int s = spec.severity;
  const std::string& op = spec.op;
  const double p = table.at(op, s);
  ImageTensor out = x;
  std::span<float> v = out.data();

  if (op == "gaussian_noise") {
    for (float& e : v) {
      e = static_cast<float>(e + p * rng.normal());
    }
  } else if (op == "shot_noise") {
    for (float& e : v) {
      e = static_cast<float>(static_cast<double>(rng.poisson(static_cast<double>(e) * p)) / p);
    }
  } else if (op == "speckle_noise") {
    for (float& e : v) {
      e = static_cast<float>(e + e * p * rng.normal());
    }
  } else if (op == "defocus_blur") {
    const detail::Kernel k = detail::defocus_kernel(p, table.at("defocus_blur.alias", s));
    out = detail::map_planes(x, [&](const detail::Plane& pl) { return detail::convolve(pl, k); });
  } else if (op == "motion_blur") {
    const double angle = rng.uniform(-45.0, 45.0) * std::numbers::pi / 180.0;
    const detail::Kernel k = detail::motion_kernel(table.at("motion_blur.radius", s), p, angle);
    out = detail::map_planes(x, [&](const detail::Plane& pl) { return detail::convolve(pl, k); });
  } else if (op == "contrast") {
    for (int c = 0; c < x.channels(); ++c) {
      double mean = 0.0;
      for (int y = 0; y < x.height(); ++y) {
        for (int i = 0; i < x.width(); ++i) {
          mean += x.at(i, y, c);
        }
      }
      mean /= static_cast<double>(x.width()) * x.height();
      for (int y = 0; y < x.height(); ++y) {
        for (int i = 0; i < x.width(); ++i) {
          out.at(i, y, c) = static_cast<float>((x.at(i, y, c) - mean) * p + mean);
        }
      }
    }
  } else if (op == "fog") {
    int mapsize = 2;
    while (mapsize < std::max(x.width(), x.height())) {
      mapsize *= 2;
    }
    const std::vector<double> plasma = detail::plasma_fractal(mapsize, table.at("fog.decay", s), rng);
    const double max_val = *std::max_element(x.data().begin(), x.data().end());
    for (int y = 0; y < x.height(); ++y) {
      for (int i = 0; i < x.width(); ++i) {
        const double f = p * plasma[static_cast<std::size_t>(y) * static_cast<std::size_t>(mapsize) +
                                    static_cast<std::size_t>(i)];
        for (int c = 0; c < x.channels(); ++c) {
          out.at(i, y, c) = static_cast<float>((x.at(i, y, c) + f) * max_val / (max_val + p));
        }
      }
    }
  } else if (op == "elastic_transform") {
    const double size = std::min(x.width(), x.height());
    const double alpha = p * size;
    const double sigma = table.at("elastic_transform.sigma", s) * size;
    detail::Plane dx(x.width(), x.height());
    detail::Plane dy(x.width(), x.height());
    for (double& e : dx.v) {
      e = rng.uniform(-1.0, 1.0);
    }
    for (double& e : dy.v) {
      e = rng.uniform(-1.0, 1.0);
    }
    dx = detail::gaussian_smooth(dx, sigma);
    dy = detail::gaussian_smooth(dy, sigma);
    for (int c = 0; c < x.channels(); ++c) {
      const detail::Plane src = detail::channel_plane(x, c);
      for (int y = 0; y < x.height(); ++y) {
        for (int i = 0; i < x.width(); ++i) {
          out.at(i, y, c) = static_cast<float>(src.sample(i + alpha * dx.at(i, y), y + alpha * dy.at(i, y)));
        }
      }
    }
  } else if (op == "jpeg_quantize") {
    out = detail::jpeg_quantize(x, p);
  } else if (op == "pixelate") {
    const int b = std::max(1, static_cast<int>(std::lround(p)));
    for (int c = 0; c < x.channels(); ++c) {
      for (int by = 0; by < x.height(); by += b) {
        for (int bx = 0; bx < x.width(); bx += b) {
          const int y1 = std::min(by + b, x.height());
          const int x1 = std::min(bx + b, x.width());
          double mean = 0.0;
          for (int y = by; y < y1; ++y) {
            for (int i = bx; i < x1; ++i) {
              mean += x.at(i, y, c);
            }
          }
          mean /= static_cast<double>((y1 - by) * (x1 - bx));
          for (int y = by; y < y1; ++y) {
            for (int i = bx; i < x1; ++i) {
              out.at(i, y, c) = static_cast<float>(mean);
            }
          }
        }
      }
    }
  }
  out.clamp();
  return out;
}

/// Planar analog of the image corruptions. `jitter` adds N(0, sigma^2 I);
/// `scale_warp` scales the offset from `centroid` by the severity factor.
inline Point2 corrupt_point_2d(Point2 p, const CorruptionSpec& spec, Point2 centroid = {},
                               const SeverityTable& table = SeverityTable::defaults()) {
  spec.validate();
  if (!is_point_corruption(spec.op)) {
    throw std::invalid_argument("'" + spec.op + "' is not a point corruption");
  }
  const double v = table.at(spec.op, spec.severity);
  if (spec.op == "jitter") {
    RngStream rng = spec.rng;
    const double dx = rng.normal();
    const double dy = rng.normal();
    return {p.x + v * dx, p.y + v * dy};
  }
  return centroid + v * (p - centroid);
}

}  // namespace cnc
