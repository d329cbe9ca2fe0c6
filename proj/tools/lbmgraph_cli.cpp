// lbmgraph: simulate block-model networks, estimate log-odds panels, select
// and tune neighborhood graphs, and run the replicated experiments.
//
// Every setting has a key ("section.key"). Values come from built-in
// defaults, then --config FILE, then command-line flags. The resolved
// settings are echoed to stderr and written to <out>/resolved_config.txt;
// passing that file back through --config reproduces the run.

#include "lbmgraph/config.hpp"
#include "lbmgraph/evaluation.hpp"
#include "lbmgraph/io.hpp"
#include "lbmgraph/kernels.hpp"
#include "lbmgraph/parallel.hpp"
#include "lbmgraph/rng.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace lbm;

namespace {

constexpr int kExitParameter = 2;
constexpr int kExitFailure = 1;

struct Param {
  std::string flag;  // without leading dashes
  std::string key;
  std::string value;  // default; empty means unset
  std::string help;
  bool boolean = false;
};

using ParamList = std::vector<Param>;

ParamList common_params() {
  return {
      {"seed", "seed", "1", "master seed"},
      {"out", "out", "", "output directory"},
      {"threads", "threads", std::to_string(default_threads()), "worker threads"},
  };
}

// n <= 0 leaves out the network count and node override.
ParamList model_params(const std::string& kind, int K, double rho, long long m_min, int n) {
  ParamList p{
      {"model", "model.kind", kind, "covariance model: ar1, ar4, random or explicit"},
      {"k", "model.K", std::to_string(K), "number of blocks"},
      {"rho", "model.rho", io::format_number(rho), "AR(1) correlation"},
      {"alpha", "model.alpha", "0.1", "edge probability of the random precision model"},
      {"covariance", "model.covariance", "", "K x K covariance CSV for the explicit model"},
      {"beta", "model.beta", "0", "common latent mean (design = column of ones)"},
      {"m-min", "data.m_min", std::to_string(m_min), "minimum within-block pair count"},
      {"offdiag", "data.offdiag", "constant", "between-block probabilities: constant or logit"},
      {"offdiag-p", "data.offdiag_p", "0.3", "constant between-block probability"},
      {"offdiag-mean", "data.offdiag_mean", "0", "mean of the logit-normal between-block law"},
      {"offdiag-sd", "data.offdiag_sd", "1", "sd of the logit-normal between-block law"},
  };
  if (n > 0) {
    p.push_back({"n", "data.n", std::to_string(n), "number of networks"});
    p.push_back({"nodes", "data.nodes", "", "total node count (multiple of K); default smallest meeting m-min"});
  }
  return p;
}

ParamList input_params() {
  return {
      {"input", "input.dir", "", "directory with network_*.txt and blocks.txt"},
      {"blocks", "input.blocks", "", "block file (default <input>/blocks.txt)"},
      {"panel", "input.panel", "", "panel CSV (with .meta sidecar) instead of networks"},
      {"design", "input.design", "", "K x L design CSV (default column of ones)"},
      {"T", "data.T", "auto", "truncation level; auto = 2 log(max(n, 10))"},
  };
}

ParamList tuning_params() {
  return {
      {"folds", "tuning.folds", "5", "cross-validation folds"},
      {"lambda-grid", "tuning.lambda_grid", "50", "lambda grid size"},
      {"tau-step", "tuning.tau_step", "0.02", "tau grid step"},
      {"bic-tie", "tuning.bic_tie_tolerance", "1e-08", "BIC tie tolerance"},
  };
}

ParamList experiment_params() {
  return {
      {"replicates", "experiment.replicates", "20", "number of replicates"},
      {"methods", "experiment.methods", "lasso,dantzig,mu", "comma-separated methods"},
      {"mean-known", "experiment.mean_known", "false", "center by the true mean", true},
      {"T", "data.T", "auto", "truncation level; auto = 2 log(max(n, 10))"},
  };
}

ParamList concat(std::initializer_list<ParamList> lists) {
  ParamList out;
  for (const auto& l : lists) out.insert(out.end(), l.begin(), l.end());
  return out;
}

// ---------------------------------------------------------------------------
// Settings -> library types

std::optional<std::string> optional_value(const Settings& s, const std::string& key) {
  if (!s.has(key) || s.get(key).empty()) return std::nullopt;
  return s.get(key);
}

std::string required_value(const Settings& s, const std::string& key, const std::string& flag) {
  auto v = optional_value(s, key);
  if (!v) throw ParameterError("missing required setting --" + flag + " (" + key + ")");
  return *v;
}

int get_int(const Settings& s, const std::string& key) {
  const long long v = s.get_int(key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ParameterError("setting '" + key + "' is out of range");
  return static_cast<int>(v);
}

std::uint64_t get_seed(const Settings& s) {
  const std::string v = s.get("seed");
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ParameterError("seed must be a non-negative integer (got '" + v + "')");
  return out;
}

int get_threads(const Settings& s) {
  const int t = get_int(s, "threads");
  if (t < 1) throw ParameterError("threads must be >= 1");
  return t;
}

CovarianceSpec covariance_spec(const Settings& s, std::uint64_t seed) {
  const std::string kind = s.get("model.kind");
  const int K = get_int(s, "model.K");
  if (kind == "ar1") {
    const double rho = s.get_double("model.rho");
    if (!(rho > -1.0 && rho < 1.0)) throw ParameterError("--rho must lie in (-1, 1) (got " + s.get("model.rho") + ")");
    return CovarianceSpec::ar1(K, rho);
  }
  if (kind == "ar4") return CovarianceSpec::ar4(K);
  if (kind == "random") {
    const double alpha = s.get_double("model.alpha");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("--alpha must lie in [0, 1]");
    return CovarianceSpec::random_precision(K, alpha, derive_seed(seed, stream::kCovariance));
  }
  if (kind == "explicit") {
    const Matrix sigma = io::read_matrix_csv(required_value(s, "model.covariance", "covariance"));
    if (sigma.rows() != K) throw ParameterError("--covariance has " + std::to_string(sigma.rows()) + " rows but K is " +
                                                std::to_string(K));
    return CovarianceSpec::from_matrix(sigma);
  }
  throw ParameterError("unknown model '" + kind + "' (expected ar1, ar4, random or explicit)");
}

OffDiagonalSpec off_diagonal(const Settings& s) {
  OffDiagonalSpec o;
  const std::string kind = s.get("data.offdiag");
  if (kind == "constant") {
    o.kind = OffDiagonalSpec::Kind::Constant;
  } else if (kind == "logit") {
    o.kind = OffDiagonalSpec::Kind::LogitGaussian;
  } else {
    throw ParameterError("unknown --offdiag '" + kind + "' (expected constant or logit)");
  }
  o.probability = s.get_double("data.offdiag_p");
  if (!(o.probability > 0.0 && o.probability < 1.0)) throw ParameterError("--offdiag-p must lie in (0, 1)");
  o.logit_mean = s.get_double("data.offdiag_mean");
  o.logit_sd = s.get_double("data.offdiag_sd");
  if (!(o.logit_sd >= 0.0)) throw ParameterError("--offdiag-sd must be >= 0");
  return o;
}

std::optional<double> truncation(const Settings& s) {
  const std::string v = s.get("data.T");
  if (v == "auto") return std::nullopt;
  const double T = s.get_double("data.T");
  if (!(T > 0.0)) throw ParameterError("--T must be positive or 'auto'");
  return T;
}

TuningConfig tuning_config(const Settings& s) {
  TuningConfig t;
  t.folds = get_int(s, "tuning.folds");
  t.lambda_grid_size = get_int(s, "tuning.lambda_grid");
  t.tau_grid = TuningConfig::default_tau_grid(s.get_double("tuning.tau_step"));
  t.bic_tie_tolerance = s.get_double("tuning.bic_tie_tolerance");
  t.validate();
  return t;
}

template <class T, class Parse>
std::vector<T> parse_list(const Settings& s, const std::string& key, Parse parse) {
  std::vector<T> out;
  for (const auto& item : s.get_list(key)) out.push_back(parse(item));
  if (out.empty()) throw ParameterError("setting '" + key + "' must list at least one value");
  return out;
}

ExperimentConfig experiment_config(const Settings& s) {
  ExperimentConfig c;
  c.seed = get_seed(s);
  c.model = covariance_spec(s, c.seed);
  c.n = get_int(s, "data.n");
  c.m_min = s.get_int("data.m_min");
  c.replicates = get_int(s, "experiment.replicates");
  c.methods = parse_list<Method>(s, "experiment.methods", [](const std::string& m) { return parse_method(m); });
  if (s.has("experiment.rules"))
    c.rules = parse_list<Rule>(s, "experiment.rules", [](const std::string& r) { return parse_rule(r); });
  c.tuning = tuning_config(s);
  c.mean_known = s.get_bool("experiment.mean_known");
  c.off_diagonal = off_diagonal(s);
  c.truncation = truncation(s);
  c.threads = get_threads(s);
  if (s.has("output.se_of_mean")) c.se_of_mean = s.get_bool("output.se_of_mean");
  if (s.get_double("model.beta") != 0.0)
    throw ParameterError("experiments use the centered model; --beta is only supported by simulate");
  if (optional_value(s, "data.nodes")) throw ParameterError("experiments choose the node count from --m-min");
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Input helpers

struct LoadedPanel {
  EtaPanel panel;
  Matrix design;
};

std::vector<NetworkSample> load_networks(const fs::path& dir, const BlockPartition& partition) {
  const auto files = io::list_network_files(dir);
  if (files.empty()) throw ParameterError("no network_*.txt files in '" + dir.string() + "'");
  std::vector<NetworkSample> nets;
  nets.reserve(files.size());
  for (const auto& f : files) {
    int K = 0;
    NetworkSample net = io::read_network(f, &K);
    if (net.nodes() != partition.N)
      throw io::FormatError(f.string() + ": " + std::to_string(net.nodes()) + " nodes but the block file lists " +
                            std::to_string(partition.N));
    if (K != partition.K)
      throw io::FormatError(f.string() + ": header says K=" + std::to_string(K) + " but the block file has " +
                            std::to_string(partition.K) + " blocks");
    nets.push_back(std::move(net));
  }
  return nets;
}

LoadedPanel load_panel(const Settings& s) {
  LoadedPanel out;
  const auto panel_path = optional_value(s, "input.panel");
  const auto dir = optional_value(s, "input.dir");
  if (panel_path && dir) throw ParameterError("give either --panel or --input, not both");
  if (panel_path) {
    out.panel = io::read_panel(*panel_path);
  } else if (dir) {
    const fs::path blocks = optional_value(s, "input.blocks").value_or((fs::path(*dir) / "blocks.txt").string());
    const BlockPartition partition = io::read_blocks(blocks);
    const auto nets = load_networks(*dir, partition);
    const auto T = truncation(s);
    out.panel = assemble_panel(nets, partition, T ? *T : default_truncation(static_cast<int>(nets.size())));
  } else {
    throw ParameterError("missing input: give --input DIR or --panel FILE");
  }
  if (const auto design = optional_value(s, "input.design")) {
    out.design = io::read_matrix_csv(*design);
    if (out.design.rows() != out.panel.K()) throw ParameterError("--design must have K rows");
  } else {
    out.design = Matrix::Ones(out.panel.K(), 1);
  }
  return out;
}

fs::path prepare_out(const Settings& s) {
  const fs::path out = required_value(s, "out", "out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ParameterError("cannot create output directory '" + out.string() + "'");
  return out;
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  return f;
}

std::string node_file(const std::string& prefix, int index, int count) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(count).size());
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + "_" + digits;
}

void write_coefficients(const fs::path& dir, const std::vector<SelectorSolution>& solutions) {
  fs::create_directories(dir);
  const int K = static_cast<int>(solutions.size());
  for (const auto& sol : solutions) io::write_solution(dir / (node_file("node", sol.target + 1, K) + ".csv"), sol);
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_simulate(const Settings& s, const fs::path& out) {
  const std::uint64_t seed = get_seed(s);
  const CovarianceSpec spec = covariance_spec(s, seed);
  const CovarianceModel cov = build_covariance(spec);
  const int n = get_int(s, "data.n");
  if (n < 1) throw ParameterError("--n must be >= 1");
  std::optional<int> nodes;
  if (const auto v = optional_value(s, "data.nodes")) nodes = get_int(s, "data.nodes");
  const BlockPartition partition = make_partition(static_cast<int>(cov.sigma.rows()), s.get_int("data.m_min"), nodes);
  LatentBlockModel model = LatentBlockModel::centered(cov.sigma, partition, off_diagonal(s));
  model.beta(0) = s.get_double("model.beta");

  const Matrix H = sample_eta_panel(model, n, seed);
  const std::uint64_t net_base = derive_seed(seed, stream::kNetworks);
  for (int t = 0; t < n; ++t) {
    const NetworkSample net = sample_network(H.row(t).transpose(), partition, model.off_diagonal,
                                             derive_seed(net_base, static_cast<std::uint64_t>(t)));
    io::write_network(out / (node_file("network", t + 1, n) + ".txt"), net, partition.K);
  }
  io::write_blocks(out / "blocks.txt", partition);
  io::write_edges(out / "truth_edges.csv", cov.graph.edges);
  io::write_matrix_csv(out / "covariance.csv", cov.sigma);
  io::write_matrix_csv(out / "precision.csv", cov.graph.precision);
  io::write_matrix_csv(out / "latent.csv", H);

  auto meta = open_file(out / "metadata.txt");
  meta << "model=" << model_label(spec) << "\nK=" << partition.K << "\nN=" << partition.N
       << "\nn=" << n << "\nm_min=" << partition.m_min << "\nseed=" << seed
       << "\ntrue_edges=" << cov.graph.edges.size() << "\nredraws=" << cov.redraws << '\n';
  std::cout << "wrote " << n << " networks (K=" << partition.K << ", N=" << partition.N << ", m_min=" << partition.m_min
            << ") to " << out.string() << '\n';
}

void cmd_estimate(const Settings& s, const fs::path& out) {
  const LoadedPanel in = load_panel(s);
  const MeanEstimate est = estimate_mean_and_beta(in.panel, in.design);
  io::write_panel(out / "panel.csv", in.panel);
  if (in.panel.counts.size() > 0) io::write_matrix_csv(out / "counts.csv", in.panel.counts.cast<double>());
  io::write_matrix_csv(out / "mean.csv", est.mu_hat);
  io::write_matrix_csv(out / "beta.csv", est.beta_hat);
  if (est.rank_deficient)
    std::cerr << "warning: design matrix is rank deficient (rank " << est.rank << "); beta is the minimum-norm solution\n";
  std::cout << "panel " << in.panel.n() << " x " << in.panel.K() << ", T=" << io::format_number(in.panel.T) << '\n';
}

Method selected_method(const Settings& s) { return parse_method(s.get("select.method")); }

void cmd_select(const Settings& s, const fs::path& out) {
  const LoadedPanel in = load_panel(s);
  const Method method = selected_method(s);
  const Rule rule = parse_rule(s.get("select.rule"));
  required_value(s, "select.lambda", "lambda");
  const double lambda = s.get_double("select.lambda");
  if (!(lambda >= 0.0)) throw ParameterError("--lambda must be >= 0");
  double mu = method == Method::MU ? lambda : 0.0;
  if (optional_value(s, "select.mu")) {
    if (method == Method::Lasso) throw ParameterError("--mu applies to dantzig and mu only");
    mu = s.get_double("select.mu");
    if (!(mu >= 0.0)) throw ParameterError("--mu must be >= 0");
  }
  const double t = s.get_double("select.t");
  if (t < 0.0) throw ParameterError("--t must be >= 0");

  const Vector mu_hat = estimate_mean_and_beta(in.panel, in.design).mu_hat;
  const Matrix centered = center_panel(in.panel, mu_hat);
  const int K = in.panel.K();
  std::vector<SelectorSolution> sols(K);
  parallel_for(K, get_threads(s), [&](std::size_t a) {
    const SelectorProblem prob = make_problem(centered, static_cast<int>(a));
    SelectorSolution sol = method == Method::Lasso ? solve_lasso(prob, lambda) : solve_dantzig_type(prob, lambda, mu);
    sol.method = method;
    sols[a] = t > 0.0 ? threshold_absolute(sol, t) : sol;
  });
  const EdgeSet edges = edges_from_solutions(sols, rule);
  io::write_edges(out / "edges.csv", edges);
  write_coefficients(out / "coefficients", sols);
  std::cout << method_name(method) << " lambda=" << io::format_number(lambda) << " mu=" << io::format_number(mu)
            << " rule=" << rule_name(rule) << ": " << edges.size() << " edges\n";
}

void cmd_tune(const Settings& s, const fs::path& out) {
  const LoadedPanel in = load_panel(s);
  const Method method = selected_method(s);
  const Rule rule = parse_rule(s.get("select.rule"));
  const TuningConfig tuning = tuning_config(s);
  const std::uint64_t seed = get_seed(s);

  ReplicateData data;
  data.seed = seed;
  data.panel = in.panel;
  data.mu_hat = estimate_mean_and_beta(in.panel, in.design).mu_hat;
  data.mu = data.mu_hat;
  data.centered = center_panel(in.panel, data.mu);
  const auto sols = tuned_solutions(data, method, tuning, seed);
  const TauSelection sel = select_tau(sols, in.panel, data.mu_hat, tuning, rule);

  std::vector<double> lambdas;
  for (const auto& sol : sols) lambdas.push_back(sol.lambda);
  io::write_tuning_report(out / "tuning.csv", lambdas, sel.tau, rule, sel.bic);
  io::write_edges(out / "edges.csv", sel.edges);
  write_coefficients(out / "coefficients", sols);
  auto curve = open_file(out / "bic.csv");
  curve << "tau,bic\n";
  for (std::size_t i = 0; i < tuning.tau_grid.size(); ++i)
    curve << io::format_number(tuning.tau_grid[i]) << ',' << io::format_number(sel.bic_curve[i]) << '\n';
  std::cout << method_name(method) << " tau=" << io::format_number(sel.tau) << (sel.flat ? " (flat BIC)" : "")
            << " rule=" << rule_name(rule) << ": " << sel.edges.size() << " edges\n";
}

std::function<void(int, int)> progress_printer(const Settings& s) {
  if (!s.get_bool("output.progress")) return {};
  return [](int done, int total) { std::cerr << "replicate " << done << "/" << total << " done\n"; };
}

void cmd_experiment(const Settings& s, const fs::path& out) {
  ExperimentConfig c = experiment_config(s);
  c.progress = progress_printer(s);
  const auto rows = run_experiment(c);
  const bool percent = s.get_bool("output.percent");
  auto f = open_file(out / "results.csv");
  io::write_results(f, rows, percent);
  io::write_results(std::cout, rows, percent);
}

void cmd_roc(const Settings& s, const fs::path& out) {
  ExperimentConfig c = experiment_config(s);
  const int grid = get_int(s, "roc.grid_size");
  if (grid < 1) throw ParameterError("--grid-size must be >= 1");
  const auto curves = run_roc(c, grid, parse_rule(s.get("roc.rule")));
  auto f = open_file(out / "roc.csv");
  io::write_roc(f, curves);
  auto a = open_file(out / "auc.csv");
  a << "method,auc\n";
  std::cout << "method,auc\n";
  for (const auto& curve : curves) {
    const std::string line = std::string(method_name(curve.method)) + "," + io::format_number(trapezoid_auc(curve.points));
    a << line << '\n';
    std::cout << line << '\n';
  }
}

void cmd_diagnose(const Settings& s, const fs::path& out) {
  DiagnosticConfig d;
  d.seed = get_seed(s);
  d.model = covariance_spec(s, d.seed);
  d.m_min = s.get_int("data.m_min");
  d.networks = get_int(s, "diagnose.networks");
  d.sign_threshold = s.get_double("diagnose.sign_threshold");
  d.normality_m_min = parse_list<long long>(s, "diagnose.normality_m_min", [](const std::string& v) {
    long long x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || x < 1)
      throw ParameterError("--normality-m-min entries must be positive integers");
    return x;
  });
  d.normality_draws = get_int(s, "diagnose.draws");
  d.concentration_m_small = s.get_int("diagnose.concentration_m_small");
  d.concentration_m_large = s.get_int("diagnose.concentration_m_large");
  d.concentration_replicates = get_int(s, "diagnose.concentration_replicates");
  d.concentration_n = get_int(s, "diagnose.concentration_n");
  d.off_diagonal = off_diagonal(s);
  d.threads = get_threads(s);
  const DiagnosticReport rep = run_diagnostics(d);

  auto sign = open_file(out / "sign_check.csv");
  sign << "k,l,sigma,covariance,agree\n";
  for (const auto& c : rep.sign_checks)
    sign << c.k + 1 << ',' << c.l + 1 << ',' << io::format_number(c.sigma) << ',' << io::format_number(c.covariance)
         << ',' << (c.agree ? 1 : 0) << '\n';
  auto norm = open_file(out / "normality.csv");
  norm << "m_min,block,skewness,excess_kurtosis\n";
  for (const auto& row : rep.normality)
    for (int k = 0; k < row.skewness.size(); ++k)
      norm << row.m_min << ',' << k + 1 << ',' << io::format_number(row.skewness(k)) << ','
           << io::format_number(row.excess_kurtosis(k)) << '\n';
  auto conc = open_file(out / "concentration.csv");
  conc << "m_small,m_large,median_small,median_large,ratio\n";
  const auto& c = rep.concentration;
  conc << c.m_small << ',' << c.m_large << ',' << io::format_number(c.median_small) << ','
       << io::format_number(c.median_large) << ',' << io::format_number(c.ratio) << '\n';

  std::cout << "sign agreement: " << rep.sign_checks.size() << " qualifying pairs, "
            << io::format_number(100.0 * rep.sign_agreement) << "% agree\n";
  for (const auto& row : rep.normality)
    std::cout << "m_min=" << row.m_min << ": mean |skewness| " << io::format_number(row.mean_abs_skewness)
              << ", mean |excess kurtosis| " << io::format_number(row.mean_abs_kurtosis) << '\n';
  std::cout << "concentration ratio m_min " << c.m_small << " vs " << c.m_large << ": " << io::format_number(c.ratio)
            << '\n';
}

// ---------------------------------------------------------------------------
// Wiring

struct Command {
  std::string name;
  std::string help;
  ParamList params;
  std::function<void(const Settings&, const fs::path&)> run;
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, bool> flag_switches;
  std::map<std::string, CLI::Option*> options;
};

std::vector<Command> commands() {
  const ParamList select_common{
      {"method", "select.method", "lasso", "lasso, dantzig or mu"},
      {"rule", "select.rule", "OR", "AND or OR"},
  };
  const ParamList percent{{"percent", "output.percent", "false", "report rates in percent", true},
                          {"progress", "output.progress", "false", "print replicate progress to stderr", true}};

  std::vector<Command> cmds;
  cmds.push_back({"simulate", "simulate networks from the latent block model",
                  concat({common_params(), model_params("ar1", 15, 0.5, 100, 20)}), cmd_simulate});
  cmds.push_back({"estimate", "estimate the truncated log-odds panel and mean",
                  concat({common_params(), input_params()}), cmd_estimate});
  cmds.push_back({"select", "neighborhood selection with fixed penalties",
                  concat({common_params(), input_params(), select_common,
                          {{"lambda", "select.lambda", "", "penalty lambda"},
                           {"mu", "select.mu", "", "Dantzig-type mu (default 0 for dantzig, lambda for mu)"},
                           {"t", "select.t", "0", "absolute threshold multiplier (0 = none)"}}}),
                  cmd_select});
  cmds.push_back({"tune", "cross-validated lambda and BIC-selected tau",
                  concat({common_params(), input_params(), select_common, tuning_params()}), cmd_tune});
  cmds.push_back({"experiment", "replicated error-rate experiment",
                  concat({common_params(), model_params("ar1", 30, 0.7, 45, 100), experiment_params(),
                          tuning_params(), percent,
                          {{"rules", "experiment.rules", "OR,AND", "comma-separated rules"},
                           {"se-of-mean", "output.se_of_mean", "false", "report SD/sqrt(replicates)", true}}}),
                  cmd_experiment});
  cmds.push_back({"roc", "replicate-averaged ROC curves",
                  concat({common_params(), model_params("ar1", 15, 0.5, 100, 20), experiment_params(),
                          tuning_params(),
                          {{"grid-size", "roc.grid_size", "30", "lambda grid size (including 0)"},
                           {"rule", "roc.rule", "OR", "AND or OR"}}}),
                  cmd_roc});
  cmds.push_back({"diagnose", "Monte Carlo checks of the estimation theory",
                  concat({common_params(), model_params("ar1", 5, 0.8, 105, 0),
                          {{"networks", "diagnose.networks", "5000", "networks for the sign check"},
                           {"sign-threshold", "diagnose.sign_threshold", "0.2", "minimum |sigma| for the sign check"},
                           {"normality-m-min", "diagnose.normality_m_min", "10,100,1000,4000",
                            "block sizes for the normality check"},
                           {"draws", "diagnose.draws", "2000", "draws per normality row"},
                           {"conc-small", "diagnose.concentration_m_small", "105", "small m_min"},
                           {"conc-large", "diagnose.concentration_m_large", "1770", "large m_min"},
                           {"conc-replicates", "diagnose.concentration_replicates", "200", "replicates"},
                           {"conc-n", "diagnose.concentration_n", "20", "networks per replicate"}}}),
                  cmd_diagnose});
  return cmds;
}

Settings resolve(const Command& cmd) {
  Settings defaults;
  for (const auto& p : cmd.params) defaults.set(p.key, p.value);
  Settings resolved = defaults;
  if (!cmd.config_path.empty()) {
    const Settings file = Settings::load(cmd.config_path);
    const auto unknown = file.unknown_keys(defaults);
    if (!unknown.empty()) {
      std::string list;
      for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
      throw ParameterError("unknown keys in " + cmd.config_path + " for '" + cmd.name + "': " + list);
    }
    resolved.merge(file);
  }
  for (const auto& p : cmd.params) {
    const CLI::Option* opt = cmd.options.at(p.flag);
    if (opt->count() == 0) continue;
    if (p.boolean)
      resolved.set(p.key, cmd.flag_switches.at(p.flag) ? "true" : "false");
    else
      resolved.set(p.key, cmd.flag_values.at(p.flag));
  }
  return resolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphical model selection for block-structured network panels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lbmgraph 1.0");

  std::vector<Command> cmds = commands();
  for (auto& cmd : cmds) {
    cmd.app = app.add_subcommand(cmd.name, cmd.help);
    cmd.app->add_option("--config", cmd.config_path, "settings file (key = value with [section] headers)");
    for (const auto& p : cmd.params) {
      if (cmd.options.count(p.flag)) continue;
      const std::string help = p.help + " [" + p.key + (p.value.empty() ? "" : ", default " + p.value) + "]";
      if (p.boolean)
        cmd.options[p.flag] = cmd.app->add_flag("--" + p.flag, cmd.flag_switches[p.flag], help);
      else
        cmd.options[p.flag] = cmd.app->add_option("--" + p.flag, cmd.flag_values[p.flag], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParameter;
  }

  for (auto& cmd : cmds) {
    if (!cmd.app->parsed()) continue;
    const std::string stage = "lbmgraph " + cmd.name;
    std::string seed_note;
    try {
      if (kernels::active_backend() != kernels::Backend::Scalar)
        std::cerr << "# kernels: " << kernels::backend_name(kernels::active_backend()) << '\n';
      const Settings settings = resolve(cmd);
      seed_note = " (seed " + settings.get("seed") + ")";
      get_seed(settings);
      const fs::path out = prepare_out(settings);
      const std::string dump = settings.dump();
      std::cerr << "# resolved configuration\n" << dump;
      auto log = open_file(out / "resolved_config.txt");
      log << dump;
      log.close();
      cmd.run(settings, out);
      return 0;
    } catch (const ParameterError& e) {
      std::cerr << stage << ": parameter error" << seed_note << ": " << e.what() << '\n';
      return kExitParameter;
    } catch (const io::FormatError& e) {
      std::cerr << stage << ": input error" << seed_note << ": " << e.what() << '\n';
      return kExitFailure;
    } catch (const std::exception& e) {
      std::cerr << stage << ": error" << seed_note << ": " << e.what() << '\n';
      return kExitFailure;
    }
  }
  return kExitFailure;
}
