#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rmtlab/free_convolution.hpp"
#include "rmtlab/lab/config.hpp"
#include "rmtlab/spectral_stats.hpp"

namespace rmtlab::lab {

/// One seed is one task; aggregate() runs single-threaded after all seeds.
class SuiteRunner {
 public:
  virtual ~SuiteRunner() = default;
  virtual json run_seed(const json& params, std::uint64_t seed) const = 0;
  /// `per_seed` holds only the successful seed records, in seed-list order.
  virtual json aggregate(const json& params, const std::vector<json>& per_seed) const = 0;
};

std::unique_ptr<SuiteRunner> make_runner(Suite suite);

/// m_fc,t on an explicit (E0, r, eta_min, eta_max, nE, nEta) grid spanning
/// [E0 - r, E0 + r], plus the classical locations for N = #atoms. Residuals
/// are hard-asserted at 1e-12. Keys: t, grid, m_re, m_im, residual_max, gamma.
json fc_report(const EmpiricalMeasure& mu, double t, const std::vector<double>& grid, bool with_gamma = true);

struct LawSetup {
  SampleModel model = SampleModel::Goe;
  EnsembleParams params;
  double t = 0.3;
  double psi_exponent = 0.1;
  double kappa = 0.1;
  double E0 = 0.0;
  double r = 1.0;
  Index nE = 10;
  Index nEta = 10;
  bool laws = true;
};

struct LawResult {
  Index N = 0;
  double psi = 0.0;
  RigidityResult rigidity;
  LocalLawReport isotropic;
  LocalLawReport local;
  double fc_residual_max = 0.0;
};

/// H_0 drawn from the model at `seed`, H_t = H_0 + sqrt(t) W, rigidity over
/// the bulk window against gamma(t) of the H_0 spectrum and, when `laws` is
/// set, the averaged and isotropic laws on the standard domain.
LawResult law_seed(const LawSetup& setup, std::uint64_t seed);

json to_json(const NormalityReport& r);
json to_json(const JointMomentLine& line);
json to_json(const LocalLawReport& r, bool with_points);

/// Joint cross-moment tests on disjoint column pairs (0,1), (2,3), ...
std::vector<JointMomentLine> joint_pair_tests(const Matrix& values, std::size_t max_pairs = 20, double slack = 0.1);

/// Equal-width histogram of `samples` on [0, upper]; values above `upper`
/// still count toward `total`.
json histogram(const std::vector<double>& samples, double upper = 8.0, int bins = 40);

}  // namespace rmtlab::lab
