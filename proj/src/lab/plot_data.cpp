#include "rmtlab/lab/plot_data.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rmtlab/errors.hpp"
#include "rmtlab/matrix_io.hpp"
#include "rmtlab/statistics.hpp"

namespace rmtlab::lab {

PlotKind parse_plot_kind(const std::string& tag) {
  if (tag == "histogram") return PlotKind::Histogram;
  if (tag == "envelope") return PlotKind::Envelope;
  if (tag == "trend") return PlotKind::Trend;
  throw ParameterError("unknown plot kind '" + tag + "'");
}

namespace {

const json& section(const json& aggregate, const char* key) {
  if (!aggregate.contains(key)) throw ParameterError(std::string("aggregate has no '") + key + "' section");
  return aggregate.at(key);
}

}  // namespace

std::string emit_plot_data(const json& aggregate, PlotKind kind) {
  if (!aggregate.is_object() || !aggregate.value("complete", false))
    throw ParameterError("aggregate report is incomplete");
  std::ostringstream out;
  out << std::setprecision(12);
  switch (kind) {
    case PlotKind::Histogram: {
      const json& h = section(aggregate, "histogram");
      const auto edges = h.at("bin_edges").get<std::vector<double>>();
      const auto counts = h.at("counts").get<std::vector<double>>();
      const double total = h.at("total").get<double>();
      if (edges.size() != counts.size() + 1 || total <= 0.0) throw ParameterError("malformed histogram section");
      out << "bin_left,bin_right,empirical_density,chisq1_density\n";
      for (std::size_t b = 0; b < counts.size(); ++b) {
        const double w = edges[b + 1] - edges[b];
        out << edges[b] << ',' << edges[b + 1] << ',' << counts[b] / (total * w) << ','
            << (chisq1_cdf(edges[b + 1]) - chisq1_cdf(edges[b])) / w << '\n';
      }
      break;
    }
    case PlotKind::Envelope: {
      std::vector<std::array<double, 3>> rows;
      for (const auto& r : section(aggregate, "envelope"))
        rows.push_back({r.at("eta").get<double>(), r.at("error").get<double>(), r.at("envelope").get<double>()});
      std::sort(rows.begin(), rows.end());
      out << "eta,error,envelope\n";
      for (const auto& r : rows) out << r[0] << ',' << r[1] << ',' << r[2] << '\n';
      break;
    }
    case PlotKind::Trend: {
      out << "N,statistic\n";
      for (const auto& r : section(aggregate, "trend"))
        out << r.at("N").get<long long>() << ',' << r.at("statistic").get<double>() << '\n';
      break;
    }
  }
  return out.str();
}

void emit_plot_file(const std::filesystem::path& aggregate_path, PlotKind kind, const std::filesystem::path& out) {
  std::ifstream in(aggregate_path);
  if (!in) throw ParameterError("cannot open " + aggregate_path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("aggregate is not valid JSON: ") + e.what());
  }
  io::write_file_atomic(out, emit_plot_data(doc, kind));
}

}  // namespace rmtlab::lab
