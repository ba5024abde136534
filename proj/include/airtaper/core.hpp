#ifndef AIRTAPER_CORE_HPP
#define AIRTAPER_CORE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace airtaper {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    double n = norm();
    if (n <= 0) throw std::domain_error("cannot normalize zero vector");
    return *this / n;
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Index3 {
  int x = 0, y = 0, z = 0;

  bool operator==(const Index3& o) const { return x == o.x && y == o.y && z == o.z; }
  bool operator!=(const Index3& o) const { return !(*this == o); }
  // lexicographic on (x, y, z)
  bool operator<(const Index3& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
};

struct Index3Hash {
  size_t operator()(const Index3& v) const {
    uint64_t h = 1469598103934665603ull;
    for (int c : {v.x, v.y, v.z}) {
      h ^= static_cast<uint64_t>(static_cast<uint32_t>(c));
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

constexpr double kPi = 3.14159265358979323846;

/// Run fn(i) for i in [0, n). Work is split into contiguous chunks across
/// hardware threads; fn must not depend on execution order.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  size_t nthreads = std::min<size_t>(hw ? hw : 1, n);
  if (nthreads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  size_t chunk = (n + nthreads - 1) / nthreads;
  for (size_t t = 0; t < nthreads; ++t) {
    size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace airtaper

#endif
