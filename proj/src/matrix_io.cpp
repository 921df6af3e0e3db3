#include "rmtlab/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rmtlab::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary matrix format assumes a little-endian host");

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ParameterError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw ParameterError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void write_matrix_text(const std::filesystem::path& path, const Matrix& m) {
  if (m.rows() != m.cols()) throw ParameterError("matrix file format requires a square matrix");
  std::ostringstream os;
  os << m.rows() << '\n' << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
  auto out = open_out(path);
  out << os.str();
  if (!out) throw ParameterError("write failed for '" + path.string() + "'");
}

Matrix read_matrix_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  long long n = 0;
  if (!(in >> n) || n < 1) throw ParameterError("'" + path.string() + "': missing or invalid dimension header");
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (!(in >> m(i, j)))
        throw ParameterError("'" + path.string() + "': truncated matrix at row " + std::to_string(i));
  return m;
}

void write_matrix_binary(const std::filesystem::path& path, const Matrix& m) {
  if (m.rows() != m.cols()) throw ParameterError("matrix file format requires a square matrix");
  auto out = open_out(path, std::ios::binary);
  const auto n = static_cast<std::uint64_t>(m.rows());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  if (!out) throw ParameterError("write failed for '" + path.string() + "'");
}

Matrix read_matrix_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::uint64_t n = 0;
  if (!in.read(reinterpret_cast<char*>(&n), sizeof n) || n < 1 || n > (1u << 20))
    throw ParameterError("'" + path.string() + "': invalid binary matrix header");
  Matrix m(static_cast<Index>(n), static_cast<Index>(n));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      double v;
      if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw ParameterError("'" + path.string() + "': truncated binary matrix");
      m(i, j) = v;
    }
  return m;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  if (path.extension() == ".bin")
    write_matrix_binary(path, m);
  else
    write_matrix_text(path, m);
}

Matrix read_matrix(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? read_matrix_binary(path) : read_matrix_text(path);
}

std::vector<double> read_reals(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string token;
    while (ls >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) throw ParameterError("'" + path.string() + "': cannot parse '" + token + "'");
      values.push_back(v);
    }
  }
  return values;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".partial";
  {
    auto out = open_out(tmp, std::ios::binary);
    out << contents;
    out.flush();
    if (!out) throw ParameterError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rmtlab::io
