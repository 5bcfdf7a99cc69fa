#include "hartree/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

constexpr std::array<char, 7> kMagic{'C', 'H', 'F', 'L', 'D', '1', '\0'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw FormatError("truncated snapshot");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_snapshot(std::ostream& out, const MultiField& mf) {
  const Grid& g = mf.grid();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(mf.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_dim()));
  put_le<double>(out, g.box_length());
  for (const Field& f : mf)
    for (Eigen::Index i = 0; i < f.data.size(); ++i) {
      put_le<double>(out, f.data[i].real());
      put_le<double>(out, f.data[i].imag());
    }
  if (!out) throw FormatError("failed writing snapshot");
}

MultiField read_snapshot(std::istream& in) {
  std::array<char, 7> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("bad snapshot magic");
  const auto dim = get_le<std::uint32_t>(in);
  const auto m = get_le<std::uint32_t>(in);
  const auto n = get_le<std::uint32_t>(in);
  const auto length = get_le<double>(in);
  if (dim < 1 || dim > 3 || m < 1 || m > 3 || n < 2 || n > 1u << 16)
    throw FormatError("snapshot header out of range");
  const Grid g(static_cast<int>(dim), static_cast<int>(n), length);
  std::vector<Field> comps;
  for (std::uint32_t j = 0; j < m; ++j) {
    Field f(g);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      f.data[i] = Complex(re, im);
    }
    comps.push_back(std::move(f));
  }
  return MultiField(std::move(comps));
}

void save_snapshot(const std::filesystem::path& path, const MultiField& mf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_snapshot(out, mf);
}

MultiField load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace hartree
