#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmtlab/dyson_flow.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/free_convolution.hpp"
#include "rmtlab/linalg.hpp"
#include "rmtlab/statistics.hpp"

namespace rmtlab {

/// 0-based inclusive index range for the 1-based window [kappa N, (1-kappa) N].
struct BulkWindow {
  Index lo = 0;
  Index hi = 0;

  Index size() const noexcept { return hi - lo + 1; }
  bool contains(Index i) const noexcept { return i >= lo && i <= hi; }
};

BulkWindow bulk_window(Index N, double kappa);
/// `count` distinct indices spread evenly across the bulk window.
std::vector<Index> bulk_indices(Index N, double kappa, Index count);

/// Seeded random unit vector, projected orthogonal to e = (1,...,1)/sqrt N
/// when `orthogonal_to_e` is set.
Vector default_direction(Index N, std::uint64_t seed, bool orthogonal_to_e = true);

enum class SampleModel { ErdosRenyi, Regular, Goe };

std::string to_string(SampleModel m);
SampleModel parse_sample_model(const std::string& name);

struct ProjectionRequest {
  SampleModel model = SampleModel::ErdosRenyi;
  EnsembleParams params;
  /// Flow time: OU flow for ER, constrained flow for regular, additive DBM for GOE.
  double t = 0.0;
  double kappa = 0.1;
  std::vector<Index> indices;
  std::vector<std::uint64_t> seeds;
  /// Unit direction; defaults to default_direction(N, direction_seed).
  std::optional<Vector> q;
  std::uint64_t direction_seed = 0;
  /// Allow q not orthogonal to e for graph models.
  bool allow_q_along_e = false;
  bool random_signs = false;
  unsigned threads = 0;  // 0 = worker_count()
};

struct ProjectionSampleSet {
  /// values(s, k) = N <q, u_{indices[k]}>^2 for seed s.
  Matrix values;
  std::vector<Index> indices;
  BulkWindow window;
  SampleModel model = SampleModel::ErdosRenyi;
  Index N = 0;
  double p = 0.0;
  double t = 0.0;
  std::vector<std::uint64_t> seeds;
  /// Largest |sum_i N <q,u_i>^2 - N| over seeds.
  double parseval_max_error = 0.0;
  Vector q;

  std::vector<double> pooled() const;
  std::vector<double> column(Index k) const;
};

/// Sample one normalized matrix of the requested model and flow it.
SymmetricMatrix sample_model_matrix(SampleModel model, const EnsembleParams& params, double t, std::uint64_t seed);

ProjectionSampleSet projection_samples(const ProjectionRequest& request);

struct MomentLine {
  int degree = 0;
  double target = 0.0;
  double empirical = 0.0;
  double standard_error = 0.0;
  double deviation = 0.0;
  double slack = 0.0;
  double sigmas = 3.0;
  bool pass = false;
};

struct NormalityReport {
  std::vector<MomentLine> moments;
  KsResult ks;
  double ks_threshold = 0.01;
  bool ks_pass = false;
  std::size_t samples = 0;
  bool pass() const;
};

/// Default slack per degree: 0.05, 0.2, 3.0.
double default_moment_slack(int degree);

/// Empirical E[X^j] against (2j-1)!!; passes when |dev| <= sigmas*SE + slack.
/// Needs at least 1000 samples.
std::vector<MomentLine> moment_test(const std::vector<double>& samples, const std::vector<int>& degrees = {1, 2, 3},
                                    const std::vector<double>& slack = {}, double sigmas = 3.0);

struct JointMomentLine {
  Index first = 0;
  Index second = 0;
  int degree_first = 1;
  int degree_second = 1;
  double target = 1.0;
  double empirical = 0.0;
  double standard_error = 0.0;
  double slack = 0.1;
  bool pass = false;
};

/// E[X^j1 Y^j2] against (2j1-1)!!(2j2-1)!! for seed-aligned samples.
JointMomentLine joint_moment_test(const std::vector<double>& x, const std::vector<double>& y, int j1 = 1, int j2 = 1,
                                  double slack = 0.1, double sigmas = 3.0);

/// KS against erf(sqrt(x/2)). Needs at least 1000 samples.
KsResult ks_test_chisq(const std::vector<double>& samples);

NormalityReport normality_report(const std::vector<double>& samples, double ks_threshold = 0.01);

/// (N/||a||_1) sum_i a_i u_i^2 with sum a = 0 and max|a| <= 1.
double que_statistic(const Vector& u, const Vector& a);
/// a_i = (-1)^i, trailing entry zeroed for odd N.
Vector alternating_weights(Index N);

struct RigidityResult {
  double max_scaled_error = 0.0;  // max N |lambda_i - gamma_i| over the window
  Index argmax = 0;
};
RigidityResult rigidity_error(const Vector& eigenvalues, const ClassicalLocations& gamma, const BulkWindow& window);

struct LawPoint {
  double E = 0.0;
  double eta = 0.0;
  double error = 0.0;
  double envelope = 0.0;
  double ratio = 0.0;
};

struct LocalLawReport {
  double psi = 0.0;
  std::vector<LawPoint> points;
  double max_ratio = 0.0;
  double max_error = 0.0;
};

/// |m_t(z) - m_fc,t(z)| against psi/(N eta) on the state's grid.
LocalLawReport local_law_error(const SpectralDecomposition& s, const FreeConvolutionState& fc, double psi);

/// |<q,G(t,z)q> - sum <u_i(0),q>^2 g_i| against
/// (psi^2/sqrt(N eta)) Im[sum <u_i(0),q>^2 g_i]. `initial` must hold the
/// eigenpairs of H_0 whose spectrum is the atom set of `mu`.
LocalLawReport isotropic_law_error(const SpectralDecomposition& s, const Vector& q,
                                   const SpectralDecomposition& initial, const EmpiricalMeasure& mu,
                                   const FreeConvolutionState& fc, double psi);

double q_quantity(const Vector& eigenvalues, Index i);

struct PerturbationDerivatives {
  double dlambda = 0.0;
  double dQ = 0.0;
  double dprojection = 0.0;
};

/// First derivatives of lambda_i, Q_i and <q,u_i>^2 along the symmetric
/// direction V = E_ab + E_ba (a != b) or E_aa.
PerturbationDerivatives perturbation_derivatives(const SpectralDecomposition& s, const Vector& q, Index i, Index a,
                                                 Index b);

struct GeneralReport {
  double max_entry_overlap = 0.0;
  double max_direction_overlap = 0.0;
  double delocalization_bound = 0.0;
  double max_count_ratio = 0.0;  // max over dyadic intervals of #/(N |I|)
  bool delocalized = false;
  bool direction_delocalized = false;
  bool no_accumulation = false;
  bool general() const { return delocalized && direction_delocalized && no_accumulation; }
};

GeneralReport general_check(const SpectralDecomposition& s, const Vector& q, double c_exponent, double C);

struct ImBoundReport {
  double norm = 0.0;
  double min_im = 0.0;
  double max_im = 0.0;
  bool pass = false;
};

/// ||H_0|| <= N^a and a^{-1} <= Im m_0 <= a on [E0-r, E0+r] x [eta_star, 1].
ImBoundReport check_bounded_im(const SpectralDecomposition& s, double E0, double r, double eta_star, double a,
                               Index nE = 20, Index nEta = 10);

struct DirectionReport {
  double max_deviation = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// |<q,G(0,z)q> - m_0(z)| <= N^{-b} on [E0-r, E0+r] x [eta_star, r].
DirectionReport check_direction_delocalized(const SpectralDecomposition& s, const Vector& q, double E0, double r,
                                            double eta_star, double b, Index nE = 20, Index nEta = 10);

}  // namespace rmtlab
