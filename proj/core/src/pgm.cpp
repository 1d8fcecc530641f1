#include <cctype>
#include <fstream>
#include <sstream>

#include "occlusym/error.hpp"
#include "occlusym/io.hpp"

namespace occlusym {

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_pgm(int width, int height, const std::vector<std::uint8_t>& levels) {
  if (width <= 0 || height <= 0 || levels.size() != static_cast<std::size_t>(width) * height)
    throw ShapeError("encode_pgm: level buffer does not match dimensions");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(levels.data()), levels.size());
  return out;
}

std::string encode_pgm(const BinaryMask& mask) {
  std::vector<std::uint8_t> levels(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) levels[i] = mask[i] ? 255 : 0;
  return encode_pgm(mask.width(), mask.height(), levels);
}

void write_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  write_file_atomic(path, encode_pgm(mask));
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& levels) {
  write_file_atomic(path, encode_pgm(width, height, levels));
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return std::string(bytes.substr(start, pos - start));
}

}  // namespace

GreyImage decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw IoError("PGM: missing P5 magic");
  GreyImage img;
  try {
    img.width = std::stoi(next_token(bytes, pos));
    img.height = std::stoi(next_token(bytes, pos));
    if (std::stoi(next_token(bytes, pos)) != 255) throw IoError("PGM: only maxval 255 is supported");
  } catch (const std::logic_error&) {
    throw IoError("PGM: malformed header");
  }
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (img.width <= 0 || img.height <= 0 || bytes.size() < pos + n) throw IoError("PGM: truncated raster");
  img.levels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return img;
}

GreyImage read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

BinaryMask read_pgm_mask(const std::filesystem::path& path) {
  const auto img = read_pgm(path);
  BinaryMask m(img.width, img.height);
  for (std::size_t i = 0; i < img.levels.size(); ++i) m.set_index(i, img.levels[i] != 0);
  return m;
}

std::vector<std::uint8_t> composite_levels(const BinaryMask& visible, const BinaryMask& occluded) {
  if (visible.width() != occluded.width() || visible.height() != occluded.height())
    throw ShapeError("composite_levels: dimension mismatch");
  std::vector<std::uint8_t> levels(visible.size(), 0);
  for (std::size_t i = 0; i < visible.size(); ++i) {
    if (visible[i])
      levels[i] = 255;
    else if (occluded[i])
      levels[i] = 128;
  }
  return levels;
}

}  // namespace occlusym
