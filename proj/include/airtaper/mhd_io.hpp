#ifndef AIRTAPER_MHD_IO_HPP
#define AIRTAPER_MHD_IO_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "airtaper/grid.hpp"

// MetaImage-style volume I/O: a text header (.mhd) naming a little-endian
// raw payload. Supported element types: MET_SHORT (HU volumes) and
// MET_UCHAR (masks).

namespace airtaper {

namespace detail {

struct MhdHeader {
  Index3 dims;
  Vec3 spacing{1, 1, 1};
  Vec3 origin{0, 0, 0};
  std::string element_type;
  std::string data_file;
};

inline MhdHeader parse_mhd(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open header: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      throw std::runtime_error("malformed header line: " + line);
    }
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r\n");
      size_t b = s.find_last_not_of(" \t\r\n");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("header missing key: " + key);
    return it->second;
  };
  MhdHeader h;
  if (need("NDims") != "3") throw std::runtime_error("only NDims = 3 supported");
  {
    std::istringstream ss(need("DimSize"));
    if (!(ss >> h.dims.x >> h.dims.y >> h.dims.z) || h.dims.x <= 0 ||
        h.dims.y <= 0 || h.dims.z <= 0)
      throw std::runtime_error("bad DimSize");
  }
  {
    std::istringstream ss(need("ElementSpacing"));
    if (!(ss >> h.spacing.x >> h.spacing.y >> h.spacing.z) || h.spacing.x <= 0 ||
        h.spacing.y <= 0 || h.spacing.z <= 0)
      throw std::runtime_error("bad ElementSpacing");
  }
  if (kv.count("Offset")) {
    std::istringstream ss(kv["Offset"]);
    if (!(ss >> h.origin.x >> h.origin.y >> h.origin.z))
      throw std::runtime_error("bad Offset");
  }
  if (kv.count("BinaryDataByteOrderMSB") && kv["BinaryDataByteOrderMSB"] == "True")
    throw std::runtime_error("big-endian payloads not supported");
  h.element_type = need("ElementType");
  h.data_file = need("ElementDataFile");
  return h;
}

inline std::string sibling_path(const std::string& header_path,
                                const std::string& data_file) {
  std::filesystem::path p(header_path);
  return (p.parent_path() / data_file).string();
}

template <typename T>
std::vector<T> read_raw(const std::string& path, size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open payload: " + path);
  in.seekg(0, std::ios::end);
  size_t bytes = static_cast<size_t>(in.tellg());
  if (bytes != count * sizeof(T))
    throw std::runtime_error("payload size does not match DimSize");
  in.seekg(0);
  std::vector<T> out(count);
  in.read(reinterpret_cast<char*>(out.data()), bytes);
  if (!in) throw std::runtime_error("short read on payload: " + path);
  return out;
}

template <typename T>
void write_pair(const Grid3<T>& g, const std::string& path,
                const std::string& element_type) {
  std::filesystem::path hp(path);
  if (hp.extension() != ".mhd") hp += ".mhd";
  std::filesystem::path rp = hp;
  rp.replace_extension(".raw");

  std::ofstream raw(rp, std::ios::binary);
  if (!raw) throw std::runtime_error("cannot write payload: " + rp.string());
  raw.write(reinterpret_cast<const char*>(g.data.data()),
            static_cast<std::streamsize>(g.data.size() * sizeof(T)));
  if (!raw) throw std::runtime_error("write failed: " + rp.string());
  raw.close();

  std::ofstream hdr(hp);
  if (!hdr) throw std::runtime_error("cannot write header: " + hp.string());
  char buf[256];
  hdr << "NDims = 3\n";
  std::snprintf(buf, sizeof buf, "DimSize = %d %d %d\n", g.dims.x, g.dims.y,
                g.dims.z);
  hdr << buf;
  std::snprintf(buf, sizeof buf, "ElementSpacing = %.17g %.17g %.17g\n",
                g.spacing.x, g.spacing.y, g.spacing.z);
  hdr << buf;
  std::snprintf(buf, sizeof buf, "Offset = %.17g %.17g %.17g\n", g.origin.x,
                g.origin.y, g.origin.z);
  hdr << buf;
  hdr << "BinaryDataByteOrderMSB = False\n";
  hdr << "ElementType = " << element_type << "\n";
  hdr << "ElementDataFile = " << rp.filename().string() << "\n";
  if (!hdr) throw std::runtime_error("write failed: " + hp.string());
}

}  // namespace detail

inline CTVolume load_volume(const std::string& path) {
  auto h = detail::parse_mhd(path);
  if (h.element_type != "MET_SHORT")
    throw std::runtime_error("unsupported ElementType for volume: " + h.element_type);
  CTVolume v(h.dims, h.spacing, h.origin);
  v.data = detail::read_raw<int16_t>(detail::sibling_path(path, h.data_file),
                                     v.size());
  return v;
}

inline void save_volume(const CTVolume& v, const std::string& path) {
  detail::write_pair(v, path, "MET_SHORT");
}

inline BinaryMask load_mask(const std::string& path) {
  auto h = detail::parse_mhd(path);
  if (h.element_type != "MET_UCHAR")
    throw std::runtime_error("unsupported ElementType for mask: " + h.element_type);
  BinaryMask m(h.dims, h.spacing, h.origin);
  m.data = detail::read_raw<uint8_t>(detail::sibling_path(path, h.data_file),
                                     m.size());
  for (auto& b : m.data) b = b ? 1 : 0;
  return m;
}

inline void save_mask(const BinaryMask& m, const std::string& path) {
  detail::write_pair(m, path, "MET_UCHAR");
}

}  // namespace airtaper

#endif
