#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "radsym/grid.hpp"

namespace radsym {

// Binary layout ("SYMF" v1), all multi-byte fields little-endian:
//   0  magic "SYMF"
//   4  version u8, N u8, shape tag u8 (0 box, 1 ball)
//   7  h, L, R as f64
//  31  cell count u64
//  39  values as f64, row-major (last axis fastest)
inline constexpr std::uint8_t kGridFormatVersion = 1;

std::vector<std::uint8_t> encode_grid(const GridFunction& u);

/// Throws IoError naming the byte offset of the first bad field.
GridFunction decode_grid(std::span<const std::uint8_t> bytes);

void save_grid(const GridFunction& u, const std::string& path);
GridFunction load_grid(const std::string& path);

/// One line per cell: "i,j[,k],x1,x2[,x3],value".
void write_csv(const GridFunction& u, std::ostream& out);

/// Plain PGM (P2) heatmap plus `path + ".json"` holding min/max. 3D fields
/// are sliced at the middle index of the last axis.
void write_pgm(std::span<const double> values, const GridDomain& domain, const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_text(const std::string& path, const std::string& text);

}  // namespace radsym
