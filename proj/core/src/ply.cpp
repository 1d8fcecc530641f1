#include <sstream>

#include "occlusym/error.hpp"
#include "occlusym/io.hpp"
#include "occlusym/metrics.hpp"

namespace occlusym {

std::string encode_ply(const PointCloud& cloud) {
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.rows()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  out.precision(9);
  for (Eigen::Index i = 0; i < cloud.rows(); ++i)
    out << static_cast<float>(cloud(i, 0)) << ' ' << static_cast<float>(cloud(i, 1)) << ' '
        << static_cast<float>(cloud(i, 2)) << '\n';
  return out.str();
}

PointCloud decode_ply(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw IoError("PLY: missing magic");
  long count = -1;
  std::vector<std::string> props;
  std::vector<bool> single;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw IoError("PLY: only ASCII format is supported");
    } else if (tag == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) ls >> count;
    } else if (tag == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
      single.push_back(type == "float" || type == "float32");
    } else if (tag == "end_header") {
      break;
    }
  }
  if (count < 0) throw IoError("PLY: no vertex element");
  int ix = -1, iy = -1, iz = -1;
  for (int i = 0; i < static_cast<int>(props.size()); ++i) {
    if (props[static_cast<std::size_t>(i)] == "x") ix = i;
    if (props[static_cast<std::size_t>(i)] == "y") iy = i;
    if (props[static_cast<std::size_t>(i)] == "z") iz = i;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw IoError("PLY: missing x/y/z properties");
  PointCloud cloud(count, 3);
  std::vector<double> row(props.size());
  for (long i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!(in >> row[k])) throw IoError("PLY: truncated vertex list");
      // Match what a float reader would see for single-precision properties.
      if (single[k]) row[k] = static_cast<float>(row[k]);
    }
    cloud(i, 0) = row[static_cast<std::size_t>(ix)];
    cloud(i, 1) = row[static_cast<std::size_t>(iy)];
    cloud(i, 2) = row[static_cast<std::size_t>(iz)];
  }
  return cloud;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) { write_file_atomic(path, encode_ply(cloud)); }

PointCloud read_ply(const std::filesystem::path& path) { return decode_ply(read_file(path)); }

}  // namespace occlusym
