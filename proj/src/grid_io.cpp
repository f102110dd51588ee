#include "radsym/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "radsym/error.hpp"
#include "radsym/json_out.hpp"

namespace radsym {

namespace {

constexpr std::size_t kHeaderBytes = 39;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(in[offset + b]) << (8 * b);
  return v;
}

double get_f64(std::span<const std::uint8_t> in, std::size_t offset) {
  return std::bit_cast<double>(get_u64(in, offset));
}

[[noreturn]] void bad(std::size_t offset, const std::string& what) {
  std::ostringstream msg;
  msg << "grid file: offset " << offset << ": " << what;
  throw IoError(msg.str());
}

}  // namespace

std::vector<std::uint8_t> encode_grid(const GridFunction& u) {
  const GridDomain& d = u.domain();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * u.size());
  for (char c : std::string("SYMF")) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kGridFormatVersion);
  out.push_back(static_cast<std::uint8_t>(d.dim()));
  out.push_back(static_cast<std::uint8_t>(d.shape()));
  put_f64(out, d.spacing());
  put_f64(out, d.half_extent());
  put_f64(out, d.radius());
  put_u64(out, u.size());
  for (double v : u.values()) put_f64(out, v);
  return out;
}

GridFunction decode_grid(std::span<const std::uint8_t> in) {
  if (in.size() < 4 || std::memcmp(in.data(), "SYMF", 4) != 0) bad(0, "bad magic (expected SYMF)");
  if (in.size() < kHeaderBytes) bad(in.size(), "truncated header");
  if (in[4] != kGridFormatVersion) bad(4, "unsupported version " + std::to_string(in[4]));
  const int dim = in[5];
  if (dim != 2 && dim != 3) bad(5, "dimension must be 2 or 3, got " + std::to_string(dim));
  if (in[6] > 1) bad(6, "unknown shape tag " + std::to_string(in[6]));
  const Shape shape = static_cast<Shape>(in[6]);
  const double h = get_f64(in, 7);
  const double L = get_f64(in, 15);
  const double R = get_f64(in, 23);
  DomainPtr domain;
  try {
    domain = make_domain(dim, shape, L, h, R);
  } catch (const UsageError& e) {
    bad(7, std::string("invalid domain: ") + e.what());
  }
  const std::uint64_t count = get_u64(in, 31);
  if (count != domain->cell_count()) {
    bad(31, "cell count " + std::to_string(count) + " does not match lattice (" +
                std::to_string(domain->cell_count()) + ")");
  }
  if (in.size() != kHeaderBytes + 8 * count) {
    bad(std::min<std::size_t>(in.size(), kHeaderBytes + 8 * count),
        "payload size " + std::to_string(in.size() - kHeaderBytes) + " bytes, expected " +
            std::to_string(8 * count));
  }
  std::vector<double> values(count);
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t off = kHeaderBytes + 8 * c;
    values[c] = get_f64(in, off);
    if (!std::isfinite(values[c])) bad(off, "non-finite value");
  }
  return GridFunction(std::move(domain), std::move(values));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), {});
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void save_grid(const GridFunction& u, const std::string& path) { write_file(path, encode_grid(u)); }

GridFunction load_grid(const std::string& path) { return decode_grid(read_file(path)); }

void write_csv(const GridFunction& u, std::ostream& out) {
  const GridDomain& d = u.domain();
  for (std::size_t c = 0; c < u.size(); ++c) {
    const Index idx = d.index(c);
    for (int a = 0; a < d.dim(); ++a) out << idx[a] << ',';
    for (int a = 0; a < d.dim(); ++a) out << format_double(d.center(c, a)) << ',';
    out << format_double(u[c]) << '\n';
  }
}

void write_pgm(std::span<const double> values, const GridDomain& d, const std::string& path) {
  const int n = d.cells_per_axis();
  std::vector<double> slice;
  slice.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Index idx{i, j, n / 2};
      slice.push_back(values[d.linear(idx)]);
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(slice.begin(), slice.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::ostringstream img;
  img << "P2\n" << n << ' ' << n << "\n255\n";
  // Row 0 of the image is the largest x2 so that the picture has x2 pointing up.
  for (int j = n - 1; j >= 0; --j) {
    for (int i = 0; i < n; ++i) {
      const double v = slice[static_cast<std::size_t>(i) * n + j];
      const int level = hi > lo ? static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo))) : 0;
      img << level << (i + 1 < n ? ' ' : '\n');
    }
  }
  write_text(path, img.str());
  nlohmann::json side = {{"min", lo}, {"max", hi}, {"width", n}, {"height", n}};
  if (d.dim() == 3) side["slice_index"] = n / 2;
  write_text(path + ".json", dump_json(side) + "\n");
}

}  // namespace radsym
