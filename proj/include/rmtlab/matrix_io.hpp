#pragma once

#include <filesystem>
#include <vector>

#include "rmtlab/linalg.hpp"

namespace rmtlab::io {

/// Text format: a line holding N, then N lines of N whitespace-separated
/// decimals (written with 17 significant digits).
void write_matrix_text(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_text(const std::filesystem::path& path);

/// Binary format: little-endian uint64 dimension N, then N*N little-endian
/// IEEE-754 doubles in row-major order.
void write_matrix_binary(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_binary(const std::filesystem::path& path);

/// Dispatches on extension: ".bin" is binary, everything else text.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Whitespace-separated reals; '#' starts a comment.
std::vector<double> read_reals(const std::filesystem::path& path);

/// Writes `contents` to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace rmtlab::io
