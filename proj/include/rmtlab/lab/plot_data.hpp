#pragma once

#include <filesystem>
#include <string>

#include "rmtlab/lab/config.hpp"

namespace rmtlab::lab {

enum class PlotKind { Histogram, Envelope, Trend };

PlotKind parse_plot_kind(const std::string& tag);

/// CSV with a header row, built from a persisted aggregate document:
///   histogram: bin_left,bin_right,empirical_density,chisq1_density
///   envelope:  eta,error,envelope (eta ascending)
///   trend:     N,statistic
/// Throws ParameterError when the aggregate is incomplete or lacks the
/// section the kind needs.
std::string emit_plot_data(const json& aggregate, PlotKind kind);
void emit_plot_file(const std::filesystem::path& aggregate_path, PlotKind kind, const std::filesystem::path& out);

}  // namespace rmtlab::lab
