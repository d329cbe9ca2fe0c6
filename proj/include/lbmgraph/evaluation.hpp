#pragma once

#include "lbmgraph/common.hpp"
#include "lbmgraph/estimation.hpp"
#include "lbmgraph/graph.hpp"
#include "lbmgraph/model.hpp"
#include "lbmgraph/selectors.hpp"
#include "lbmgraph/tuning.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lbm {

/// Misclassification rates of an estimated edge set against the truth.
struct ErrorReport {
  double type1 = 0.0;  // false edges / true non-edges
  double type2 = 0.0;  // missed edges / true edges
  double total = 0.0;  // misclassified pairs / C(K,2)
  long long false_positives = 0;
  long long false_negatives = 0;
  long long true_edges = 0;
  long long non_edges = 0;
  long long pairs = 0;
};

ErrorReport error_rates(const EdgeSet& estimated, const EdgeSet& truth, int K);

struct ExperimentConfig {
  CovarianceSpec model = CovarianceSpec::ar1(30, 0.7);
  int n = 100;
  long long m_min = 45;
  int replicates = 20;
  std::vector<Method> methods{Method::Lasso, Method::Dantzig, Method::MU};
  std::vector<Rule> rules{Rule::Or, Rule::And};
  TuningConfig tuning;
  std::uint64_t seed = 1;
  bool mean_known = false;
  OffDiagonalSpec off_diagonal;
  std::optional<double> truncation;  // default_truncation(n) if unset
  int threads = 1;
  bool se_of_mean = false;  // report SD/sqrt(replicates) instead of SD
  std::function<void(int done, int total)> progress;

  int K() const { return model.K; }
  double T() const;
  void validate() const;
};

/// Model label used in result files, e.g. "ar1(rho=0.7)".
std::string model_label(const CovarianceSpec& spec);

/// One simulated data set: truth, panel and centered panel.
struct ReplicateData {
  std::uint64_t seed = 0;
  TrueGraph truth;
  EtaPanel panel;
  Vector mu;        // mean used for centering
  Vector mu_hat;    // estimated mean
  Matrix centered;
};

std::uint64_t replicate_seed(std::uint64_t master, int replicate);

/// Simulates replicate r. `fixed` supplies the covariance model for
/// non-random designs; RandomPrecision draws a new one per replicate.
ReplicateData simulate_replicate(const ExperimentConfig& config, const CovarianceModel* fixed, int replicate);

/// Per-node CV-tuned solutions for one method.
std::vector<SelectorSolution> tuned_solutions(const ReplicateData& data, Method method, const TuningConfig& tuning,
                                              std::uint64_t seed);

struct ResultRow {
  std::string model;
  int K = 0;
  int n = 0;
  Method method = Method::Lasso;
  Rule rule = Rule::Or;
  double total_mean = 0, total_se = 0;
  double type1_mean = 0, type1_se = 0;
  double type2_mean = 0, type2_se = 0;
};

/// Replicated simulation with CV-tuned lambda and BIC-tuned tau; one row per
/// method x rule. Deterministic in the master seed for any thread count.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

struct RocPoint {
  double lambda = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  Method method = Method::Lasso;
  std::vector<RocPoint> points;  // sorted by FPR, includes (0, 0)
};

/// size-1 log-spaced values from lambda_top down to 1e-3 * lambda_top, then 0.
std::vector<double> roc_lambda_grid(double lambda_top, int size);

/// Per-replicate (FPR, TPR) at each grid lambda, without thresholding.
/// The Lasso is solved along the grid with warm starts.
std::vector<RocPoint> replicate_roc_path(const ReplicateData& data, Method method, const std::vector<double>& grid,
                                         Rule rule);

/// Replicate-averaged ROC points plus the (0, 0) endpoint, sorted by FPR.
std::vector<RocPoint> roc_points(const std::vector<ReplicateData>& replicates, Method method,
                                 const std::vector<double>& grid, Rule rule, int threads = 1);

/// Simulates the replicates and traces one curve per configured method. The
/// lambda grid is shared across replicates, scaled by the first replicate's
/// largest per-node lambda_max.
std::vector<RocCurve> run_roc(const ExperimentConfig& config, int grid_size, Rule rule);

/// Trapezoidal area under sorted ROC points, closed at (1, 1).
double trapezoid_auc(const std::vector<RocPoint>& points);

struct DiagnosticConfig {
  CovarianceSpec model = CovarianceSpec::ar1(5, 0.8);
  long long m_min = 105;
  int networks = 5000;            // sign check sample size
  double sign_threshold = 0.2;
  std::vector<long long> normality_m_min{10, 100, 1000, 4000};
  int normality_draws = 2000;
  long long concentration_m_small = 105;
  long long concentration_m_large = 1770;
  int concentration_replicates = 200;
  int concentration_n = 20;
  std::uint64_t seed = 1;
  OffDiagonalSpec off_diagonal;
  int threads = 1;
  static constexpr int kMaxK = 10;
};

struct SignCheck {
  int k = 0, l = 0;
  double sigma = 0.0;
  double covariance = 0.0;
  bool agree = false;
};

struct NormalityRow {
  long long m_min = 0;
  Vector skewness;
  Vector excess_kurtosis;
  double mean_abs_skewness = 0.0;
  double mean_abs_kurtosis = 0.0;
};

struct ConcentrationResult {
  long long m_small = 0, m_large = 0;
  double median_small = 0.0, median_large = 0.0;
  double ratio = 0.0;
};

struct DiagnosticReport {
  std::vector<SignCheck> sign_checks;  // qualifying pairs only
  double sign_agreement = 1.0;         // fraction; 1 when no pair qualifies
  std::vector<NormalityRow> normality;
  ConcentrationResult concentration;
};

/// Sign agreement of Cov(S_k, S_l) with sigma_kl, normality of the
/// within-block log-odds estimates as blocks grow, and the m_min^-1/2 scaling
/// of the worst-case estimation error. K must be <= 10.
DiagnosticReport run_diagnostics(const DiagnosticConfig& config);

// Individual diagnostics, exposed for testing.
std::vector<SignCheck> sign_agreement_check(const CovarianceModel& cov, long long m_min, int networks,
                                            double threshold, const OffDiagonalSpec& off_diagonal,
                                            std::uint64_t seed);
NormalityRow normality_check(const Matrix& sigma, long long m_min, int draws, std::uint64_t seed);
ConcentrationResult concentration_check(const Matrix& sigma, long long m_small, long long m_large, int replicates,
                                        int n, std::uint64_t seed, int threads = 1);

}  // namespace lbm
