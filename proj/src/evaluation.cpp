#include "lbmgraph/evaluation.hpp"

#include "lbmgraph/parallel.hpp"
#include "lbmgraph/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lbm {

ErrorReport error_rates(const EdgeSet& estimated, const EdgeSet& truth, int K) {
  for (const EdgeSet* s : {&estimated, &truth})
    for (const Edge& e : s->edges())
      if (e.a < 0 || e.b >= K) throw ParameterError("edge outside 1..K");
  ErrorReport r;
  r.pairs = static_cast<long long>(K) * (K - 1) / 2;
  r.true_edges = static_cast<long long>(truth.size());
  r.non_edges = r.pairs - r.true_edges;
  for (const Edge& e : estimated.edges())
    if (!truth.contains(e.a, e.b)) ++r.false_positives;
  for (const Edge& e : truth.edges())
    if (!estimated.contains(e.a, e.b)) ++r.false_negatives;
  r.type1 = r.non_edges > 0 ? static_cast<double>(r.false_positives) / r.non_edges : 0.0;
  r.type2 = r.true_edges > 0 ? static_cast<double>(r.false_negatives) / r.true_edges : 0.0;
  r.total = r.pairs > 0 ? static_cast<double>(r.false_positives + r.false_negatives) / r.pairs : 0.0;
  return r;
}

double ExperimentConfig::T() const { return truncation ? *truncation : default_truncation(n); }

void ExperimentConfig::validate() const {
  if (model.K < 2) throw ParameterError("K must be >= 2");
  if (n < 1) throw ParameterError("n must be >= 1");
  if (m_min < 1) throw ParameterError("m_min must be >= 1");
  if (replicates < 1) throw ParameterError("replicates must be >= 1");
  if (methods.empty()) throw ParameterError("at least one method is required");
  if (rules.empty()) throw ParameterError("at least one rule is required");
  if (truncation && !(*truncation > 0.0)) throw ParameterError("truncation level T must be positive");
  if (model.kind == CovarianceKind::AR1 && !(model.rho > -1.0 && model.rho < 1.0))
    throw ParameterError("AR1 rho must lie in (-1, 1)");
  if (model.kind == CovarianceKind::RandomPrecision && !(model.alpha >= 0.0 && model.alpha <= 1.0))
    throw ParameterError("random precision alpha must lie in [0, 1]");
  tuning.validate();
}

std::string model_label(const CovarianceSpec& spec) {
  std::ostringstream os;
  os << covariance_kind_name(spec.kind);
  if (spec.kind == CovarianceKind::AR1) os << "(rho=" << spec.rho << ")";
  if (spec.kind == CovarianceKind::RandomPrecision) os << "(alpha=" << spec.alpha << ")";
  return os.str();
}

std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
  return derive_seed(master, {stream::kReplicate, static_cast<std::uint64_t>(replicate)});
}

ReplicateData simulate_replicate(const ExperimentConfig& config, const CovarianceModel* fixed, int replicate) {
  ReplicateData data;
  data.seed = replicate_seed(config.seed, replicate);

  CovarianceModel cov;
  if (fixed) {
    cov = *fixed;
  } else {
    CovarianceSpec spec = config.model;
    spec.seed = derive_seed(data.seed, stream::kCovariance);
    cov = build_covariance(spec);
  }
  const BlockPartition partition = make_partition(config.K(), config.m_min);
  const LatentBlockModel model = LatentBlockModel::centered(cov.sigma, partition, config.off_diagonal);
  const Matrix H = sample_eta_panel(model, config.n, data.seed);

  // Networks are generated and counted one at a time; same streams as
  // sample_networks(H, partition, off_diagonal, data.seed).
  const std::uint64_t net_base = derive_seed(data.seed, stream::kNetworks);
  Eigen::MatrixXi counts(config.n, config.K());
  for (int t = 0; t < config.n; ++t) {
    const NetworkSample net = sample_network(H.row(t).transpose(), partition, config.off_diagonal,
                                             derive_seed(net_base, static_cast<std::uint64_t>(t)));
    const auto S = count_within_edges(net, partition);
    for (int k = 0; k < config.K(); ++k) counts(t, k) = static_cast<int>(S[k]);
  }
  data.panel = panel_from_counts(counts, partition.pairs, config.T());
  data.mu_hat = estimate_mean_and_beta(data.panel, model.design).mu_hat;
  data.mu = config.mean_known ? model.mean() : data.mu_hat;
  data.centered = center_panel(data.panel, data.mu);
  data.truth = std::move(cov.graph);
  return data;
}

std::vector<SelectorSolution> tuned_solutions(const ReplicateData& data, Method method, const TuningConfig& tuning,
                                              std::uint64_t seed) {
  const int K = data.panel.K();
  std::vector<SelectorSolution> out;
  out.reserve(K);
  for (int a = 0; a < K; ++a) {
    const SelectorProblem prob = make_problem(data.centered, a);
    const CvResult cv = cv_select_lambda(
        prob, method, tuning, derive_seed(seed, {stream::kCrossValidation, static_cast<std::uint64_t>(method),
                                                 static_cast<std::uint64_t>(a)}));
    out.push_back(solve_selector(prob, method, cv.lambda));
  }
  return out;
}

namespace {

struct Moments {
  double mean = 0.0;
  double spread = 0.0;
};

Moments summarize(const std::vector<double>& values, bool se_of_mean) {
  Moments m;
  const double count = static_cast<double>(values.size());
  for (double v : values) m.mean += v;
  m.mean /= count;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.spread = std::sqrt(ss / (count - 1.0));
    if (se_of_mean) m.spread /= std::sqrt(count);
  }
  return m;
}

std::string failure_context(int replicate, std::uint64_t seed, const std::exception& e) {
  std::ostringstream os;
  os << "replicate " << replicate + 1 << " (seed " << seed << ") failed: " << e.what();
  return os.str();
}

std::optional<CovarianceModel> fixed_covariance(const ExperimentConfig& config) {
  if (config.model.kind == CovarianceKind::RandomPrecision) return std::nullopt;
  return build_covariance(config.model);
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto fixed = fixed_covariance(config);
  const std::size_t methods = config.methods.size();
  const std::size_t rules = config.rules.size();

  // reports[r][method * rules + rule]
  std::vector<std::vector<ErrorReport>> reports(config.replicates);
  std::atomic<int> done{0};
  std::mutex progress_mutex;

  parallel_for(static_cast<std::size_t>(config.replicates), config.threads, [&](std::size_t r) {
    const int rep = static_cast<int>(r);
    const std::uint64_t seed = replicate_seed(config.seed, rep);
    try {
      const ReplicateData data = simulate_replicate(config, fixed ? &*fixed : nullptr, rep);
      std::vector<ErrorReport> row(methods * rules);
      for (std::size_t mi = 0; mi < methods; ++mi) {
        const auto solutions = tuned_solutions(data, config.methods[mi], config.tuning, data.seed);
        for (std::size_t ri = 0; ri < rules; ++ri) {
          const TauSelection sel = select_tau(solutions, data.panel, data.mu_hat, config.tuning, config.rules[ri]);
          row[mi * rules + ri] = error_rates(sel.edges, data.truth.edges, config.K());
        }
      }
      reports[r] = std::move(row);
    } catch (const ParameterError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericalError(failure_context(rep, seed, e));
    }
    const int finished = ++done;
    if (config.progress) {
      std::lock_guard lock(progress_mutex);
      config.progress(finished, config.replicates);
    }
  });

  std::vector<ResultRow> rows;
  const std::string label = model_label(config.model);
  for (std::size_t mi = 0; mi < methods; ++mi) {
    for (std::size_t ri = 0; ri < rules; ++ri) {
      std::vector<double> total, t1, t2;
      for (const auto& rep : reports) {
        const ErrorReport& e = rep[mi * rules + ri];
        total.push_back(e.total);
        t1.push_back(e.type1);
        t2.push_back(e.type2);
      }
      ResultRow row;
      row.model = label;
      row.K = config.K();
      row.n = config.n;
      row.method = config.methods[mi];
      row.rule = config.rules[ri];
      const Moments mt = summarize(total, config.se_of_mean);
      const Moments m1 = summarize(t1, config.se_of_mean);
      const Moments m2 = summarize(t2, config.se_of_mean);
      row.total_mean = mt.mean;
      row.total_se = mt.spread;
      row.type1_mean = m1.mean;
      row.type1_se = m1.spread;
      row.type2_mean = m2.mean;
      row.type2_se = m2.spread;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<double> roc_lambda_grid(double lambda_top, int size) {
  if (size < 1) throw ParameterError("ROC grid size must be >= 1");
  if (!(lambda_top >= 0.0)) throw ParameterError("ROC grid top must be >= 0");
  std::vector<double> grid;
  const int positive = size - 1;
  if (lambda_top > 0.0) {
    for (int i = 0; i < positive; ++i) {
      const double frac = positive > 1 ? static_cast<double>(i) / (positive - 1) : 0.0;
      grid.push_back(lambda_top * std::pow(1e-3, frac));
    }
  }
  grid.push_back(0.0);
  return grid;
}

std::vector<RocPoint> replicate_roc_path(const ReplicateData& data, Method method, const std::vector<double>& grid,
                                         Rule rule) {
  const int K = data.panel.K();
  // neighborhoods[g][a]
  std::vector<std::vector<std::vector<int>>> ne(grid.size(), std::vector<std::vector<int>>(K));
  for (int a = 0; a < K; ++a) {
    const SelectorProblem prob = make_problem(data.centered, a);
    Vector warm = Vector::Zero(prob.p());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const SelectorSolution sol = solve_selector(prob, method, grid[g], &warm);
      if (method == Method::Lasso) warm = prob.restrict(sol.theta);
      ne[g][a] = sol.neighborhood();
    }
  }
  std::vector<RocPoint> path;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const ErrorReport e = error_rates(assemble_edge_set(ne[g], rule), data.truth.edges, K);
    path.push_back({grid[g], e.type1, 1.0 - e.type2});
  }
  return path;
}

std::vector<RocPoint> roc_points(const std::vector<ReplicateData>& replicates, Method method,
                                 const std::vector<double>& grid, Rule rule, int threads) {
  if (grid.empty()) throw ParameterError("ROC grid must be nonempty");
  if (replicates.empty()) throw ParameterError("ROC needs at least one replicate");
  std::vector<std::vector<RocPoint>> paths(replicates.size());
  parallel_for(replicates.size(), threads,
               [&](std::size_t r) { paths[r] = replicate_roc_path(replicates[r], method, grid, rule); });

  std::vector<RocPoint> points;
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (std::size_t g = 0; g < grid.size(); ++g) {
    RocPoint p{grid[g], 0.0, 0.0};
    for (const auto& path : paths) {
      p.fpr += path[g].fpr;
      p.tpr += path[g].tpr;
    }
    p.fpr /= static_cast<double>(paths.size());
    p.tpr /= static_cast<double>(paths.size());
    points.push_back(p);
  }
  std::stable_sort(points.begin(), points.end(), [](const RocPoint& x, const RocPoint& y) {
    return x.fpr < y.fpr || (x.fpr == y.fpr && x.tpr < y.tpr);
  });
  return points;
}

std::vector<RocCurve> run_roc(const ExperimentConfig& config, int grid_size, Rule rule) {
  config.validate();
  const auto fixed = fixed_covariance(config);
  std::vector<ReplicateData> reps(config.replicates);
  parallel_for(reps.size(), config.threads, [&](std::size_t r) {
    try {
      reps[r] = simulate_replicate(config, fixed ? &*fixed : nullptr, static_cast<int>(r));
    } catch (const ParameterError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericalError(failure_context(static_cast<int>(r), replicate_seed(config.seed, static_cast<int>(r)), e));
    }
  });

  std::vector<RocCurve> curves;
  for (Method method : config.methods) {
    double top = 0.0;
    for (int a = 0; a < config.K(); ++a) top = std::max(top, lambda_max(make_problem(reps[0].centered, a), method));
    const auto grid = roc_lambda_grid(top, grid_size);
    curves.push_back({method, roc_points(reps, method, grid, rule, config.threads)});
  }
  return curves;
}

double trapezoid_auc(const std::vector<RocPoint>& points) {
  double area = 0.0;
  double px = 0.0, py = 0.0;
  for (const RocPoint& p : points) {
    area += (p.fpr - px) * (p.tpr + py) * 0.5;
    px = p.fpr;
    py = p.tpr;
  }
  area += (1.0 - px) * (1.0 + py) * 0.5;
  return area;
}

std::vector<SignCheck> sign_agreement_check(const CovarianceModel& cov, long long m_min, int networks,
                                            double threshold, const OffDiagonalSpec& off_diagonal,
                                            std::uint64_t seed) {
  const int K = static_cast<int>(cov.sigma.rows());
  const BlockPartition partition = make_partition(K, m_min);
  const LatentBlockModel model = LatentBlockModel::centered(cov.sigma, partition, off_diagonal);
  const Matrix H = sample_eta_panel(model, networks, seed);
  const std::uint64_t net_base = derive_seed(seed, stream::kNetworks);
  Matrix S(networks, K);
  for (int t = 0; t < networks; ++t) {
    const auto counts = count_within_edges(
        sample_network(H.row(t).transpose(), partition, off_diagonal, derive_seed(net_base, static_cast<std::uint64_t>(t))),
        partition);
    for (int k = 0; k < K; ++k) S(t, k) = static_cast<double>(counts[k]);
  }
  const Matrix centered = S.rowwise() - S.colwise().mean();
  const Matrix C = centered.transpose() * centered / std::max(1, networks - 1);

  std::vector<SignCheck> out;
  for (int k = 0; k < K; ++k)
    for (int l = k + 1; l < K; ++l) {
      const double s = cov.sigma(k, l);
      if (std::fabs(s) < threshold) continue;
      const double c = C(k, l);
      out.push_back({k, l, s, c, (s > 0 && c > 0) || (s < 0 && c < 0)});
    }
  return out;
}

NormalityRow normality_check(const Matrix& sigma, long long m_min, int draws, std::uint64_t seed) {
  const int K = static_cast<int>(sigma.rows());
  const BlockPartition partition = make_partition(K, m_min);
  const LatentBlockModel model = LatentBlockModel::centered(sigma, partition);
  const Matrix H = sample_eta_panel(model, draws, seed);
  const EtaPanel panel = panel_from_counts(sample_block_counts(H, partition, seed), partition.pairs,
                                           default_truncation(draws));
  NormalityRow row;
  row.m_min = partition.m_min;
  row.skewness.resize(K);
  row.excess_kurtosis.resize(K);
  for (int k = 0; k < K; ++k) {
    const Vector z = (panel.H_hat.col(k).array() - model.mean()(k)) / std::sqrt(sigma(k, k));
    const double mean = z.mean();
    const Eigen::ArrayXd d = z.array() - mean;
    const double m2 = d.square().mean();
    const double m3 = d.cube().mean();
    const double m4 = d.square().square().mean();
    row.skewness(k) = m3 / std::pow(m2, 1.5);
    row.excess_kurtosis(k) = m4 / (m2 * m2) - 3.0;
  }
  row.mean_abs_skewness = row.skewness.cwiseAbs().mean();
  row.mean_abs_kurtosis = row.excess_kurtosis.cwiseAbs().mean();
  return row;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ConcentrationResult concentration_check(const Matrix& sigma, long long m_small, long long m_large, int replicates,
                                        int n, std::uint64_t seed, int threads) {
  const int K = static_cast<int>(sigma.rows());
  const BlockPartition small = make_partition(K, m_small);
  const BlockPartition large = make_partition(K, m_large);
  const double T = default_truncation(n);
  std::vector<double> err_small(replicates), err_large(replicates);
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    const std::uint64_t rs = derive_seed(seed, {stream::kReplicate, static_cast<std::uint64_t>(r)});
    const LatentBlockModel model = LatentBlockModel::centered(sigma, small);
    const Matrix H = sample_eta_panel(model, n, rs);
    const EtaPanel ps = panel_from_counts(sample_block_counts(H, small, rs), small.pairs, T);
    const EtaPanel pl = panel_from_counts(sample_block_counts(H, large, rs), large.pairs, T);
    err_small[r] = (ps.H_hat - H).cwiseAbs().maxCoeff();
    err_large[r] = (pl.H_hat - H).cwiseAbs().maxCoeff();
  });
  ConcentrationResult out;
  out.m_small = small.m_min;
  out.m_large = large.m_min;
  out.median_small = median(err_small);
  out.median_large = median(err_large);
  out.ratio = out.median_small / out.median_large;
  return out;
}

DiagnosticReport run_diagnostics(const DiagnosticConfig& config) {
  if (config.model.K > DiagnosticConfig::kMaxK)
    throw ParameterError("diagnostics are limited to K <= " + std::to_string(DiagnosticConfig::kMaxK) + " (got " +
                         std::to_string(config.model.K) + ")");
  if (config.networks < 2 || config.normality_draws < 4 || config.concentration_replicates < 1)
    throw ParameterError("diagnostic sample sizes are too small");
  const CovarianceModel cov = build_covariance(config.model);

  DiagnosticReport rep;
  rep.sign_checks = sign_agreement_check(cov, config.m_min, config.networks, config.sign_threshold,
                                         config.off_diagonal, derive_seed(config.seed, 1));
  if (!rep.sign_checks.empty()) {
    const auto agree = std::count_if(rep.sign_checks.begin(), rep.sign_checks.end(),
                                     [](const SignCheck& c) { return c.agree; });
    rep.sign_agreement = static_cast<double>(agree) / static_cast<double>(rep.sign_checks.size());
  }
  for (std::size_t i = 0; i < config.normality_m_min.size(); ++i)
    rep.normality.push_back(normality_check(cov.sigma, config.normality_m_min[i], config.normality_draws,
                                            derive_seed(config.seed, {2, i})));
  rep.concentration = concentration_check(cov.sigma, config.concentration_m_small, config.concentration_m_large,
                                          config.concentration_replicates, config.concentration_n,
                                          derive_seed(config.seed, 3), config.threads);
  return rep;
}

}  // namespace lbm
