#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "omm/hjb.hpp"

namespace omm::hjb {

namespace {

constexpr std::array<char, 16> kMagic = {'O', 'M', 'M', '-', 'V', 'A', 'L', 'U', 'E', 'F', 'N', 0, 0, 0, 0, 0};

template <typename T>
void put(std::ofstream& os, T x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T x{};
  is.read(reinterpret_cast<char*>(&x), sizeof(T));
  if (!is) throw std::runtime_error("value function file truncated");
  return x;
}

}  // namespace

void write_binary(const ValueFunction& vf, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto& g = vf.grid();
  os.write(kMagic.data(), kMagic.size());
  put<std::uint8_t>(os, kValueFileVersion);
  put<std::uint64_t>(os, g.n_time);
  put<std::uint64_t>(os, g.nu.n);
  put<std::uint64_t>(os, g.vega.n);
  put<double>(os, vf.horizon());
  put<double>(os, g.nu.lo);
  put<double>(os, g.nu.hi);
  put<double>(os, g.vega.lo);
  put<double>(os, g.vega.hi);
  const auto values = vf.values();
  os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

ValueFunction read_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 16> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw std::runtime_error(path.string() + " is not a value function file");
  const auto version = get<std::uint8_t>(is);
  if (version != kValueFileVersion)
    throw std::runtime_error("unsupported value function file version " + std::to_string(version));
  SolverGrid g;
  g.n_time = get<std::uint64_t>(is);
  g.nu.n = get<std::uint64_t>(is);
  g.vega.n = get<std::uint64_t>(is);
  const double horizon = get<double>(is);
  g.nu.lo = get<double>(is);
  g.nu.hi = get<double>(is);
  g.vega.lo = get<double>(is);
  g.vega.hi = get<double>(is);
  g.validate();
  std::vector<double> values((g.n_time + 1) * g.nodes_per_slice());
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!is) throw std::runtime_error("value function file truncated");
  return ValueFunction(g, horizon, std::move(values));
}

void write_csv(const ValueFunction& vf, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto& g = vf.grid();
  std::fprintf(f, "t_index,nu_index,vega_index,value\n");
  for (std::size_t n = 0; n <= g.n_time; ++n)
    for (std::size_t k = 0; k < g.nu.n; ++k)
      for (std::size_t m = 0; m < g.vega.n; ++m) std::fprintf(f, "%zu,%zu,%zu,%.17g\n", n, k, m, vf.at(n, k, m));
  std::fclose(f);
}

ValueFunction read_csv(const std::filesystem::path& path, const SolverGrid& grid, double horizon) {
  grid.validate();
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != "t_index,nu_index,vega_index,value") throw std::runtime_error("unexpected CSV header: " + line);
  const std::size_t total = (grid.n_time + 1) * grid.nodes_per_slice();
  std::vector<double> values(total);
  std::vector<bool> seen(total, false);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t n, k, m;
    double v;
    char c1, c2, c3;
    std::istringstream row(line);
    if (!(row >> n >> c1 >> k >> c2 >> m >> c3 >> v) || c1 != ',' || c2 != ',' || c3 != ',')
      throw std::runtime_error("malformed CSV row: " + line);
    if (n > grid.n_time || k >= grid.nu.n || m >= grid.vega.n) throw std::runtime_error("CSV index out of grid");
    const std::size_t j = (n * grid.nu.n + k) * grid.vega.n + m;
    values[j] = v;
    if (!seen[j]) ++rows;
    seen[j] = true;
  }
  if (rows != total) throw std::runtime_error("CSV does not cover every grid node");
  return ValueFunction(grid, horizon, std::move(values));
}

}  // namespace omm::hjb
