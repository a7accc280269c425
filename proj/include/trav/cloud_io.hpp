#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trav/point_cloud.hpp"

namespace trav {

using Rgb = std::array<std::uint8_t, 3>;

/// Optional per-point channels carried alongside a PLY cloud.
struct PlyExtras {
  std::vector<Rgb> colors;        // red/green/blue uchar
  std::vector<float> cost;        // "cost" float property (-1 = unknown)
  std::vector<std::string> comments;
};

enum class PlyFormat { Ascii, BinaryLittleEndian };

namespace detail_io {

inline void write_f32(std::ostream& os, float v, bool binary) {
  if (binary) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(float));
  } else {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    os << buf;
  }
}

inline std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw std::runtime_error("ply: unsupported property type " + t);
}

}  // namespace detail_io

inline void write_ply(const std::string& path, const PointCloud& cloud,
                      PlyFormat format = PlyFormat::BinaryLittleEndian,
                      const PlyExtras& extras = {}) {
  const bool binary = format == PlyFormat::BinaryLittleEndian;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ply: cannot open " + path);

  const bool with_rgb = !extras.colors.empty();
  const bool with_cost = !extras.cost.empty();
  if (with_rgb && extras.colors.size() != cloud.size())
    throw std::invalid_argument("ply: color channel length mismatch");
  if (with_cost && extras.cost.size() != cloud.size())
    throw std::invalid_argument("ply: cost channel length mismatch");

  os << "ply\n"
     << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
  for (const std::string& c : extras.comments) os << "comment " << c << "\n";
  os << "element vertex " << cloud.size() << "\n"
     << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_normals())
    os << "property float nx\nproperty float ny\nproperty float nz\n";
  if (cloud.has_curvature()) os << "property float curvature\n";
  if (with_cost) os << "property float cost\n";
  if (with_rgb)
    os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  os << "end_header\n";

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::vector<float> row;
    const Vec3& p = cloud.points[i];
    row.insert(row.end(), {static_cast<float>(p.x()), static_cast<float>(p.y()),
                           static_cast<float>(p.z())});
    if (cloud.has_normals()) {
      const Vec3& n = cloud.normals[i];
      row.insert(row.end(), {static_cast<float>(n.x()),
                             static_cast<float>(n.y()),
                             static_cast<float>(n.z())});
    }
    if (cloud.has_curvature())
      row.push_back(static_cast<float>(cloud.curvature[i]));
    if (with_cost) row.push_back(extras.cost[i]);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!binary && j > 0) os << ' ';
      detail_io::write_f32(os, row[j], binary);
    }
    if (with_rgb) {
      const Rgb& c = extras.colors[i];
      if (binary) {
        os.write(reinterpret_cast<const char*>(c.data()), 3);
      } else {
        os << ' ' << int(c[0]) << ' ' << int(c[1]) << ' ' << int(c[2]);
      }
    }
    if (!binary) os << "\n";
  }
  if (!os) throw std::runtime_error("ply: write failed for " + path);
}

inline PointCloud read_ply(const std::string& path,
                           PlyExtras* extras = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ply: cannot open " + path);

  std::string line;
  if (!std::getline(is, line) || line.substr(0, 3) != "ply")
    throw std::runtime_error("ply: missing magic in " + path);

  bool binary = false;
  std::size_t vertex_count = 0;
  struct Prop {
    std::string name;
    std::string type;
  };
  std::vector<Prop> props;
  bool in_vertex_element = false;

  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt != "ascii") {
        throw std::runtime_error("ply: unsupported format " + fmt);
      }
    } else if (tok == "comment") {
      if (extras) {
        std::string rest;
        std::getline(ls, rest);
        if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
        extras->comments.push_back(rest);
      }
    } else if (tok == "element") {
      std::string name;
      std::size_t count;
      ls >> name >> count;
      in_vertex_element = name == "vertex";
      if (in_vertex_element) vertex_count = count;
    } else if (tok == "property") {
      if (!in_vertex_element) continue;
      std::string type, name;
      ls >> type >> name;
      if (type == "list")
        throw std::runtime_error("ply: list properties unsupported");
      props.push_back({name, type});
    } else if (tok == "end_header") {
      break;
    }
  }

  auto find = [&](const std::string& n) -> int {
    for (std::size_t i = 0; i < props.size(); ++i)
      if (props[i].name == n) return static_cast<int>(i);
    return -1;
  };
  const int ix = find("x"), iy = find("y"), iz = find("z");
  if (ix < 0 || iy < 0 || iz < 0)
    throw std::runtime_error("ply: missing x/y/z properties in " + path);
  const int inx = find("nx"), iny = find("ny"), inz = find("nz");
  const int icurv = find("curvature"), icost = find("cost");
  const int ir = find("red"), ig = find("green"), ib = find("blue");
  const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  if (with_normals) cloud.normals.reserve(vertex_count);
  if (icurv >= 0) cloud.curvature.reserve(vertex_count);

  std::vector<double> row(props.size());
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (binary) {
      for (std::size_t p = 0; p < props.size(); ++p) {
        const std::string& t = props[p].type;
        unsigned char buf[8];
        const std::size_t sz = detail_io::ply_type_size(t);
        if (!is.read(reinterpret_cast<char*>(buf), sz))
          throw std::runtime_error("ply: truncated vertex data in " + path);
        if (t == "float" || t == "float32") {
          float f;
          std::memcpy(&f, buf, 4);
          row[p] = f;
        } else if (t == "double" || t == "float64") {
          double d;
          std::memcpy(&d, buf, 8);
          row[p] = d;
        } else if (sz == 1) {
          row[p] = buf[0];
        } else if (sz == 2) {
          std::uint16_t u;
          std::memcpy(&u, buf, 2);
          row[p] = u;
        } else {
          std::uint32_t u;
          std::memcpy(&u, buf, 4);
          row[p] = u;
        }
      }
    } else {
      for (std::size_t p = 0; p < props.size(); ++p) {
        if (!(is >> row[p]))
          throw std::runtime_error("ply: truncated vertex data in " + path);
      }
    }
    cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    if (with_normals) cloud.normals.emplace_back(row[inx], row[iny], row[inz]);
    if (icurv >= 0) cloud.curvature.push_back(row[icurv]);
    if (extras) {
      if (icost >= 0) extras->cost.push_back(static_cast<float>(row[icost]));
      if (ir >= 0 && ig >= 0 && ib >= 0)
        extras->colors.push_back({static_cast<std::uint8_t>(row[ir]),
                                  static_cast<std::uint8_t>(row[ig]),
                                  static_cast<std::uint8_t>(row[ib])});
    }
  }
  return cloud;
}

/// ASCII PCD with fields x y z [normal_x normal_y normal_z curvature].
inline void write_pcd(const std::string& path, const PointCloud& cloud) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("pcd: cannot open " + path);
  const bool full = cloud.has_normals() && cloud.has_curvature();
  const int n_fields = full ? 7 : 3;
  os << "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\n";
  os << "FIELDS x y z";
  if (full) os << " normal_x normal_y normal_z curvature";
  os << "\nSIZE";
  for (int i = 0; i < n_fields; ++i) os << " 4";
  os << "\nTYPE";
  for (int i = 0; i < n_fields; ++i) os << " F";
  os << "\nCOUNT";
  for (int i = 0; i < n_fields; ++i) os << " 1";
  os << "\nWIDTH " << cloud.size() << "\nHEIGHT 1\n"
     << "VIEWPOINT 0 0 0 1 0 0 0\nPOINTS " << cloud.size() << "\nDATA ascii\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(static_cast<float>(v)));
    os << buf;
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    put(cloud.points[i].x());
    os << ' ';
    put(cloud.points[i].y());
    os << ' ';
    put(cloud.points[i].z());
    if (full) {
      for (int a = 0; a < 3; ++a) {
        os << ' ';
        put(cloud.normals[i][a]);
      }
      os << ' ';
      put(cloud.curvature[i]);
    }
    os << "\n";
  }
}

inline PointCloud read_pcd(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("pcd: cannot open " + path);
  std::string line;
  std::vector<std::string> fields;
  std::size_t count = 0;
  bool ascii = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "FIELDS") {
      std::string f;
      while (ls >> f) fields.push_back(f);
    } else if (tok == "POINTS") {
      ls >> count;
    } else if (tok == "DATA") {
      std::string mode;
      ls >> mode;
      ascii = mode == "ascii";
      break;
    }
  }
  if (!ascii) throw std::runtime_error("pcd: only ascii data supported");
  auto field_index = [&](const std::string& n) -> int {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i] == n) return static_cast<int>(i);
    return -1;
  };
  const int ix = field_index("x"), iy = field_index("y"), iz = field_index("z");
  if (ix < 0 || iy < 0 || iz < 0)
    throw std::runtime_error("pcd: missing x/y/z fields in " + path);
  const int inx = field_index("normal_x"), iny = field_index("normal_y"),
            inz = field_index("normal_z"), ic = field_index("curvature");
  const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;

  PointCloud cloud;
  std::vector<double> row(fields.size());
  for (std::size_t v = 0; v < count; ++v) {
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (!(is >> row[f]))
        throw std::runtime_error("pcd: truncated data in " + path);
    }
    cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    if (with_normals) cloud.normals.emplace_back(row[inx], row[iny], row[inz]);
    if (ic >= 0) cloud.curvature.push_back(row[ic]);
  }
  return cloud;
}

}  // namespace trav
