#ifndef AIRTAPER_SKELETON_HPP
#define AIRTAPER_SKELETON_HPP

#include <array>
#include <deque>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "airtaper/edt.hpp"
#include "airtaper/grid.hpp"

namespace airtaper {

/// One-voxel-wide curve skeleton of an airway mask plus the endpoints the
/// downstream path search needs.
struct CentrelineTree {
  BinaryMask skeleton;
  Index3 start;                 // on the trachea, from find_trachea_start
  std::vector<Index3> distals;  // labelled endpoints, preserved by thinning
};

/// Ordered voxel chain from the carina to one distal point.
struct AirwayPath {
  std::string id;
  std::vector<Index3> voxels;
};

/// Scan axial slices from the first one containing mask; stop at the first
/// slice whose in-slice distance transform maximum is not exceeded by the
/// next slice, and return the argmax voxel there (lexicographically smallest
/// on plateaus). Assumes a near-axial, roughly constant-calibre trachea.
inline Index3 find_trachea_start(const BinaryMask& m) {
  int z0 = -1;
  for (int k = 0; k < m.dims.z && z0 < 0; ++k)
    for (int j = 0; j < m.dims.y && z0 < 0; ++j)
      for (int i = 0; i < m.dims.x; ++i)
        if (m(i, j, k)) {
          z0 = k;
          break;
        }
  if (z0 < 0) throw std::invalid_argument("empty mask");

  auto slice_max = [&](int k) {
    auto d = edt_2d(m, k);
    double best = 0;
    for (double v : d.data) best = std::max(best, v);
    return best;
  };

  int i = z0;
  double cur = slice_max(i);
  while (true) {
    if (i + 1 >= m.dims.z)
      throw std::runtime_error("trachea scan reached the last slice");
    double next = slice_max(i + 1);
    if (cur >= next) break;
    cur = next;
    ++i;
  }

  auto d = edt_2d(m, i);
  Index3 best{-1, -1, i};
  double bestv = -1;
  for (int x = 0; x < m.dims.x; ++x)
    for (int y = 0; y < m.dims.y; ++y)
      if (d(x, y) > bestv) {
        bestv = d(x, y);
        best = {x, y, i};
      }
  return best;
}

namespace detail {

// 3x3x3 neighbourhood tables, cell index = (dx+1) + 3*(dy+1) + 9*(dz+1)
struct NeighbourTables {
  // 26-adjacency between the 26 non-centre cells
  std::array<std::vector<int>, 27> adj26;
  // 6-adjacency restricted to the 18-neighbourhood cells
  std::array<std::vector<int>, 27> adj6_n18;
  std::array<bool, 27> is_n18{};
  std::array<bool, 27> is_face{};

  NeighbourTables() {
    auto cell = [](int dx, int dy, int dz) {
      return (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1);
    };
    auto coords = [](int c) {
      return std::array<int, 3>{c % 3 - 1, (c / 3) % 3 - 1, c / 9 - 1};
    };
    for (int c = 0; c < 27; ++c) {
      auto [x, y, z] = coords(c);
      int manhattan = std::abs(x) + std::abs(y) + std::abs(z);
      is_n18[c] = manhattan >= 1 && manhattan <= 2;
      is_face[c] = manhattan == 1;
    }
    for (int a = 0; a < 27; ++a) {
      if (a == 13) continue;
      auto [ax, ay, az] = coords(a);
      for (int b = 0; b < 27; ++b) {
        if (b == 13 || b == a) continue;
        auto [bx, by, bz] = coords(b);
        int ddx = std::abs(ax - bx), ddy = std::abs(ay - by), ddz = std::abs(az - bz);
        if (std::max({ddx, ddy, ddz}) == 1) adj26[a].push_back(b);
        if (is_n18[a] && is_n18[b] && ddx + ddy + ddz == 1)
          adj6_n18[a].push_back(b);
      }
    }
    (void)cell;
  }
};

inline const NeighbourTables& tables() {
  static NeighbourTables t;
  return t;
}

// occupancy of the 3x3x3 box around v; out-of-grid reads as background
inline void gather_box(const BinaryMask& m, const Index3& v, bool box[27]) {
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        int c = (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1);
        int x = v.x + dx, y = v.y + dy, z = v.z + dz;
        box[c] = m.contains(x, y, z) && m(x, y, z);
      }
}

// topology-preserving deletion test: exactly one 26-component of object
// neighbours and exactly one 6-component of background in the
// 18-neighbourhood touching a face of v
inline bool is_simple(const bool box[27]) {
  const auto& t = tables();

  int seen[27] = {};
  int comp_obj = 0;
  for (int c = 0; c < 27; ++c) {
    if (c == 13 || !box[c] || seen[c]) continue;
    ++comp_obj;
    if (comp_obj > 1) return false;
    std::array<int, 26> stack;
    int top = 0;
    stack[top++] = c;
    seen[c] = 1;
    while (top) {
      int a = stack[--top];
      for (int b : t.adj26[a])
        if (box[b] && !seen[b]) {
          seen[b] = 1;
          stack[top++] = b;
        }
    }
  }
  if (comp_obj != 1) return false;

  int seen_bg[27] = {};
  int comp_bg = 0;
  for (int c = 0; c < 27; ++c) {
    if (!t.is_face[c] || box[c] || seen_bg[c]) continue;
    // flood this background component through the 18-neighbourhood
    ++comp_bg;
    if (comp_bg > 1) return false;
    std::array<int, 18> stack;
    int top = 0;
    stack[top++] = c;
    seen_bg[c] = 1;
    while (top) {
      int a = stack[--top];
      for (int b : t.adj6_n18[a])
        if (!box[b] && !seen_bg[b]) {
          seen_bg[b] = 1;
          stack[top++] = b;
        }
    }
  }
  return comp_bg == 1;
}

inline int count_object_neighbours(const bool box[27]) {
  int n = 0;
  for (int c = 0; c < 27; ++c)
    if (c != 13 && box[c]) ++n;
  return n;
}

}  // namespace detail

/// Sequential directional curve thinning: per sub-iteration, border voxels
/// of one face direction are deleted when they are simple points and
/// neither anchors nor curve endpoints. Runs on the voxel grid with no
/// anisotropy correction; downstream smoothing recentres metrically.
inline CentrelineTree thin_to_centreline(const BinaryMask& m, Index3 start,
                                         const std::vector<Index3>& distals) {
  auto inside = [&](const Index3& v) {
    return m.contains(v) && m(v.x, v.y, v.z);
  };
  if (!inside(start)) throw std::invalid_argument("start anchor outside mask");
  for (const auto& d : distals)
    if (!inside(d)) throw std::invalid_argument("distal anchor outside mask");

  std::unordered_set<Index3, Index3Hash> anchors;
  anchors.insert(start);
  for (const auto& d : distals) anchors.insert(d);

  BinaryMask skel = m;

  // bounding box of the object, padded one voxel
  Index3 lo{skel.dims.x, skel.dims.y, skel.dims.z}, hi{0, 0, 0};
  for (int k = 0; k < skel.dims.z; ++k)
    for (int j = 0; j < skel.dims.y; ++j)
      for (int i = 0; i < skel.dims.x; ++i)
        if (skel(i, j, k)) {
          lo = {std::min(lo.x, i), std::min(lo.y, j), std::min(lo.z, k)};
          hi = {std::max(hi.x, i), std::max(hi.y, j), std::max(hi.z, k)};
        }
  lo = {std::max(lo.x - 1, 0), std::max(lo.y - 1, 0), std::max(lo.z - 1, 0)};
  hi = {std::min(hi.x + 1, skel.dims.x - 1), std::min(hi.y + 1, skel.dims.y - 1),
        std::min(hi.z + 1, skel.dims.z - 1)};

  static const Index3 directions[6] = {{0, 0, 1},  {0, 0, -1}, {0, -1, 0},
                                       {0, 1, 0},  {1, 0, 0},  {-1, 0, 0}};

  bool box[27];
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& dir : directions) {
      std::vector<Index3> candidates;
      for (int k = lo.z; k <= hi.z; ++k)
        for (int j = lo.y; j <= hi.y; ++j)
          for (int i = lo.x; i <= hi.x; ++i) {
            if (!skel(i, j, k)) continue;
            Index3 v{i, j, k};
            if (anchors.count(v)) continue;
            int bx = i + dir.x, by = j + dir.y, bz = k + dir.z;
            if (skel.contains(bx, by, bz) && skel(bx, by, bz)) continue;
            detail::gather_box(skel, v, box);
            if (detail::count_object_neighbours(box) <= 1) continue;  // endpoint
            if (detail::is_simple(box)) candidates.push_back(v);
          }
      // sequential deletion: conditions are re-checked against the current
      // object so earlier removals cannot break topology
      for (const auto& v : candidates) {
        detail::gather_box(skel, v, box);
        if (detail::count_object_neighbours(box) <= 1) continue;
        if (!detail::is_simple(box)) continue;
        skel(v.x, v.y, v.z) = 0;
        changed = true;
      }
    }
  }

  return CentrelineTree{std::move(skel), start, distals};
}

namespace detail {

inline std::vector<Index3> neighbours26(const BinaryMask& g, const Index3& v) {
  std::vector<Index3> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy && !dz) continue;
        int x = v.x + dx, y = v.y + dy, z = v.z + dz;
        if (g.contains(x, y, z) && g(x, y, z)) out.push_back({x, y, z});
      }
  return out;
}

}  // namespace detail

/// Breadth-first search from the trachea start. The carina is the first
/// voxel in BFS order with three or more skeleton neighbours; each distal
/// point yields the unique BFS route truncated to start there. Skeleton
/// branches carrying no distal label are dropped. An unbranched tree keeps
/// its whole path with the start standing in for the carina.
inline std::vector<AirwayPath> extract_paths(const CentrelineTree& t) {
  const BinaryMask& g = t.skeleton;
  if (!g.contains(t.start) || !g(t.start.x, t.start.y, t.start.z))
    throw std::invalid_argument("start voxel not on the skeleton");

  std::unordered_map<Index3, Index3, Index3Hash> pred;
  std::deque<Index3> queue;
  queue.push_back(t.start);
  pred[t.start] = t.start;
  bool have_carina = false;
  Index3 carina = t.start;
  while (!queue.empty()) {
    Index3 v = queue.front();
    queue.pop_front();
    auto nbrs = detail::neighbours26(g, v);
    if (!have_carina && nbrs.size() >= 3) {
      carina = v;
      have_carina = true;
    }
    for (const auto& n : nbrs)
      if (!pred.count(n)) {
        pred[n] = v;
        queue.push_back(n);
      }
  }

  std::vector<AirwayPath> paths;
  for (size_t di = 0; di < t.distals.size(); ++di) {
    const Index3& distal = t.distals[di];
    if (!pred.count(distal))
      throw std::runtime_error("distal point unreachable from the trachea start");
    std::vector<Index3> route;
    for (Index3 v = distal; ; v = pred[v]) {
      route.push_back(v);
      if (v == t.start) break;
    }
    std::reverse(route.begin(), route.end());
    if (have_carina) {
      auto it = std::find(route.begin(), route.end(), carina);
      if (it != route.end()) route.erase(route.begin(), it);
    }
    AirwayPath p;
    p.id = "airway_" + std::to_string(di);
    p.voxels = std::move(route);
    paths.push_back(std::move(p));
  }
  return paths;
}

}  // namespace airtaper

#endif
