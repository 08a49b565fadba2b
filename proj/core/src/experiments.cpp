#include "bpinn/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bpinn/datagen.hpp"
#include "bpinn/errors.hpp"
#include "bpinn/gp.hpp"
#include "bpinn/kl.hpp"
#include "bpinn/mlp.hpp"
#include "bpinn/rng.hpp"

#ifndef BPINN_VERSION
#define BPINN_VERSION "0.0.0"
#endif

namespace bpinn {
namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kEstimators{"hmc", "vi", "dnf", "dropout", "pinn", "gpr"};
const std::vector<std::string> kSurrogates{"bnn", "kl"};

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

bool contains(const std::vector<std::string>& names, const std::string& n) {
  return std::find(names.begin(), names.end(), n) != names.end();
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_adam(const json& obj, AdamConfig& adam) {
  read(obj, "lr", adam.lr);
  read(obj, "beta1", adam.beta1);
  read(obj, "beta2", adam.beta2);
  read(obj, "epsilon", adam.epsilon);
}

json adam_json(const AdamConfig& a) {
  return json{{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"epsilon", a.epsilon}};
}

std::string noise_tag(double noise) {
  std::ostringstream s;
  s << noise;
  return s.str();
}

struct Prediction {
  PredictiveStats u;
  std::optional<PredictiveStats> f;
  std::optional<double> k_mean, k_std;
};

// Mean and population std of every row of the unknown block.
void unknown_stats(const Matrix& unknown_draws, Prediction& p) {
  if (unknown_draws.rows() == 0 || unknown_draws.cols() == 0) return;
  const auto row = unknown_draws.row(0).array();
  const double mean = row.mean();
  p.k_mean = mean;
  p.k_std = std::sqrt((row - mean).square().mean());
}

Matrix tail_draws(const Matrix& draws, int limit) {
  const Eigen::Index m = std::min<Eigen::Index>(draws.cols(), limit);
  return draws.rightCols(m);
}

void write_prediction_csv(const std::filesystem::path& path, const Matrix& grid, const PredictiveStats& stats,
                          const Vector& exact) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << (grid.rows() == 1 ? "x" : "x,y") << ",mean,std,exact\n";
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    for (Eigen::Index i = 0; i < grid.rows(); ++i) out << format_double(grid(i, j)) << ',';
    out << format_double(stats.mean[j]) << ',' << format_double(stats.std[j]) << ','
        << format_double(exact[j]) << '\n';
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json trace_json(const std::vector<double>& trace) {
  json arr = json::array();
  for (double v : trace) arr.push_back(v);
  return arr;
}

}  // namespace

const char* engine_version() { return BPINN_VERSION; }

std::vector<std::string> estimator_names() { return kEstimators; }
std::vector<std::string> surrogate_names() { return kSurrogates; }

void ExperimentConfig::apply_seed() {
  hmc.seed = seed;
  vi.seed = seed;
  flow.seed = seed;
  dropout.seed = seed;
  pinn.seed = seed;
}

ExperimentConfig default_config(const std::string& experiment, const std::string& profile,
                                std::optional<double> noise) {
  const ProblemPtr problem = make_problem(experiment);
  if (profile != "desk" && profile != "paper")
    throw UsageError("unknown profile '" + profile + "' (available: desk, paper)");

  ExperimentConfig c;
  c.experiment = experiment;
  c.profile = profile;
  c.noise = noise ? *noise : experiment_noise_levels(experiment).front();
  c.flow.euler_steps = problem->unknown_count() > 0 ? 10 : 50;

  if (profile == "paper") {
    c.hmc.burn_in = 2000;
    c.hmc.total_samples = 15000;
    c.hmc.keep_last = 10000;
    c.vi.steps = 200000;
    c.flow.train_steps = 100000;
    c.dropout.train_steps = 200000;
    c.dropout.passes = 10000;
    c.pinn.steps = 200000;
    c.gpr_prior_samples = 100000;
    c.predictive_draws = 10000;
    c.grid_points_2d = 101;
  } else {
    c.hmc.burn_in = 500;
    c.hmc.total_samples = 2500;
    c.hmc.keep_last = 2000;
    c.vi.steps = 20000;
    c.flow.train_steps = 10000;
    c.dropout.train_steps = 20000;
    c.dropout.passes = 2000;
    c.pinn.steps = 20000;
    c.gpr_prior_samples = 20000;
    c.predictive_draws = 2000;
    c.grid_points_2d = 51;
  }
  c.apply_seed();
  return c;
}

void ExperimentConfig::validate() const {
  const ProblemPtr problem = make_problem(experiment);
  if (!contains(kEstimators, estimator))
    throw UsageError("unknown estimator '" + estimator + "' (available: " + join(kEstimators) + ")");
  if (!contains(kSurrogates, surrogate))
    throw UsageError("unknown surrogate '" + surrogate + "' (available: " + join(kSurrogates) + ")");
  if (estimator == "dnf" && surrogate != "kl") throw ConfigError("the dnf estimator requires the kl surrogate");
  if ((estimator == "dropout" || estimator == "pinn" || estimator == "gpr") && surrogate != "bnn")
    throw ConfigError("the " + estimator + " estimator requires the bnn surrogate");
  if (estimator == "gpr" && problem->has_residual())
    throw ConfigError("the gpr estimator requires regression-style data (no differential operator)");
  if (surrogate == "kl") {
    if (problem->dim() != 1) throw ConfigError("the kl surrogate is one-dimensional");
    if (kl_terms < 1 || !(kl_corr_length > 0.0)) throw ConfigError("kl needs terms >= 1 and corr_length > 0");
  }
  if (!(noise >= 0.0)) throw ConfigError("noise must be non-negative");
  if (hidden_widths.empty()) throw ConfigError("network needs at least one hidden layer");
  for (int w : hidden_widths)
    if (w < 1) throw ConfigError("hidden widths must be positive");
  if (hmc.step_size <= 0.0 || hmc.leapfrog_steps < 1 || hmc.burn_in < 0 || hmc.keep_last < 1 ||
      hmc.total_samples <= hmc.burn_in)
    throw ConfigError("hmc needs step_size > 0, leapfrog_steps >= 1, keep_last >= 1 and total_samples > burn_in");
  if (vi.steps < 0 || vi.batch < 1) throw ConfigError("vi needs steps >= 0 and batch >= 1");
  flow.validate();
  dropout.validate();
  if (pinn.steps < 0) throw ConfigError("pinn steps must be non-negative");
  if (gpr_prior_samples < 2) throw ConfigError("gpr needs at least two prior samples");
  if (predictive_draws < 2) throw ConfigError("predictive_draws must be at least 2");
  if (grid_points_1d < 2 || grid_points_2d < 2) throw ConfigError("grids need at least two points per axis");
}

ExperimentConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  reject_unknown_keys(doc,
                      {"experiment", "surrogate", "estimator", "profile", "noise", "seed", "data_seed", "rng",
                       "network", "kl", "hmc", "vi", "dnf", "dropout", "pinn", "gpr", "predictive_draws", "grid",
                       "output_dir"},
                      "config");
  if (!doc.contains("experiment")) throw ConfigError("config needs an 'experiment' name");
  std::string experiment, profile = "desk";
  read(doc, "experiment", experiment);
  read(doc, "profile", profile);
  std::optional<double> noise;
  if (doc.contains("noise")) {
    double n = 0.0;
    read(doc, "noise", n);
    noise = n;
  }
  ExperimentConfig c = default_config(experiment, profile, noise);
  if (doc.contains("rng") && doc.at("rng") != Rng::kAlgorithm)
    throw ConfigError(std::string("only the '") + Rng::kAlgorithm + "' generator is supported");

  read(doc, "surrogate", c.surrogate);
  read(doc, "estimator", c.estimator);
  read(doc, "seed", c.seed);
  c.apply_seed();
  read(doc, "data_seed", c.data_seed);
  read(doc, "predictive_draws", c.predictive_draws);
  read(doc, "output_dir", c.output_dir);

  if (doc.contains("network")) {
    const json& n = doc.at("network");
    reject_unknown_keys(n, {"hidden"}, "network");
    read(n, "hidden", c.hidden_widths);
  }
  if (doc.contains("kl")) {
    const json& k = doc.at("kl");
    reject_unknown_keys(k, {"terms", "corr_length"}, "kl");
    read(k, "terms", c.kl_terms);
    read(k, "corr_length", c.kl_corr_length);
  }
  if (doc.contains("hmc")) {
    const json& h = doc.at("hmc");
    reject_unknown_keys(h, {"step_size", "leapfrog_steps", "burn_in", "total_samples", "keep_last", "adapt_step_size", "seed"},
                        "hmc");
    read(h, "step_size", c.hmc.step_size);
    read(h, "leapfrog_steps", c.hmc.leapfrog_steps);
    read(h, "burn_in", c.hmc.burn_in);
    read(h, "total_samples", c.hmc.total_samples);
    read(h, "keep_last", c.hmc.keep_last);
    read(h, "adapt_step_size", c.hmc.adapt_step_size);
    read(h, "seed", c.hmc.seed);
  }
  if (doc.contains("vi")) {
    const json& v = doc.at("vi");
    reject_unknown_keys(v, {"steps", "batch", "lr", "beta1", "beta2", "epsilon", "init_rho", "seed"}, "vi");
    read(v, "steps", c.vi.steps);
    read(v, "batch", c.vi.batch);
    read_adam(v, c.vi.adam);
    read(v, "init_rho", c.vi_init_rho);
    read(v, "seed", c.vi.seed);
  }
  if (doc.contains("dnf")) {
    const json& f = doc.at("dnf");
    reject_unknown_keys(f, {"time_span", "euler_steps", "hidden", "train_steps", "batch", "lr", "beta1", "beta2",
                            "epsilon", "patience", "seed"},
                        "dnf");
    read(f, "time_span", c.flow.time_span);
    read(f, "euler_steps", c.flow.euler_steps);
    read(f, "hidden", c.flow.hidden_widths);
    read(f, "train_steps", c.flow.train_steps);
    read(f, "batch", c.flow.batch);
    read_adam(f, c.flow.adam);
    read(f, "patience", c.flow.patience);
    read(f, "seed", c.flow.seed);
  }
  if (doc.contains("dropout")) {
    const json& d = doc.at("dropout");
    reject_unknown_keys(d, {"rate", "train_steps", "passes", "unknown_window", "lr", "beta1", "beta2", "epsilon", "seed"},
                        "dropout");
    read(d, "rate", c.dropout.rate);
    read(d, "train_steps", c.dropout.train_steps);
    read(d, "passes", c.dropout.passes);
    read(d, "unknown_window", c.dropout.unknown_window);
    read_adam(d, c.dropout.adam);
    read(d, "seed", c.dropout.seed);
  }
  if (doc.contains("pinn")) {
    const json& p = doc.at("pinn");
    reject_unknown_keys(p, {"steps", "lr", "beta1", "beta2", "epsilon", "seed"}, "pinn");
    read(p, "steps", c.pinn.steps);
    read_adam(p, c.pinn.adam);
    read(p, "seed", c.pinn.seed);
  }
  if (doc.contains("gpr")) {
    const json& g = doc.at("gpr");
    reject_unknown_keys(g, {"prior_samples"}, "gpr");
    read(g, "prior_samples", c.gpr_prior_samples);
  }
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    reject_unknown_keys(g, {"points_1d", "points_2d"}, "grid");
    read(g, "points_1d", c.grid_points_1d);
    read(g, "points_2d", c.grid_points_2d);
  }
  c.validate();
  return c;
}

namespace {

json config_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["surrogate"] = c.surrogate;
  j["estimator"] = c.estimator;
  j["profile"] = c.profile;
  j["noise"] = c.noise;
  j["seed"] = c.seed;
  j["data_seed"] = c.data_seed;
  j["rng"] = Rng::kAlgorithm;
  j["network"] = {{"hidden", c.hidden_widths}};
  j["kl"] = {{"terms", c.kl_terms}, {"corr_length", c.kl_corr_length}};
  j["hmc"] = {{"step_size", c.hmc.step_size},         {"leapfrog_steps", c.hmc.leapfrog_steps},
              {"burn_in", c.hmc.burn_in},             {"total_samples", c.hmc.total_samples},
              {"keep_last", c.hmc.keep_last},         {"adapt_step_size", c.hmc.adapt_step_size},
              {"seed", c.hmc.seed}};
  json vi = {{"steps", c.vi.steps}, {"batch", c.vi.batch}, {"init_rho", c.vi_init_rho}, {"seed", c.vi.seed}};
  vi.update(adam_json(c.vi.adam));
  j["vi"] = vi;
  json dnf = {{"time_span", c.flow.time_span}, {"euler_steps", c.flow.euler_steps},
              {"hidden", c.flow.hidden_widths}, {"train_steps", c.flow.train_steps},
              {"batch", c.flow.batch},           {"patience", c.flow.patience},
              {"seed", c.flow.seed}};
  dnf.update(adam_json(c.flow.adam));
  j["dnf"] = dnf;
  json dropout = {{"rate", c.dropout.rate},
                  {"train_steps", c.dropout.train_steps},
                  {"passes", c.dropout.passes},
                  {"unknown_window", c.dropout.unknown_window},
                  {"seed", c.dropout.seed}};
  dropout.update(adam_json(c.dropout.adam));
  j["dropout"] = dropout;
  json pinn = {{"steps", c.pinn.steps}, {"seed", c.pinn.seed}};
  pinn.update(adam_json(c.pinn.adam));
  j["pinn"] = pinn;
  j["gpr"] = {{"prior_samples", c.gpr_prior_samples}};
  j["predictive_draws"] = c.predictive_draws;
  j["grid"] = {{"points_1d", c.grid_points_1d}, {"points_2d", c.grid_points_2d}};
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

std::filesystem::path output_root() {
  const char* env = std::getenv("BPINN_OUTPUT_ROOT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("runs");
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& c) {
  if (!c.output_dir.empty()) {
    std::filesystem::path p(c.output_dir);
    return p.is_absolute() ? p : output_root() / p;
  }
  return output_root() / (c.experiment + "_" + c.surrogate + "_" + c.estimator + "_noise" + noise_tag(c.noise) +
                          "_seed" + std::to_string(c.seed));
}

Matrix evaluation_grid(const PdeProblem& problem, const ExperimentConfig& config) {
  const Box& box = problem.domain();
  auto axis = [](double lo, double hi, int n) {
    Vector v = Vector::LinSpaced(n, lo, hi);
    v[n - 1] = hi;
    return v;
  };
  if (problem.dim() == 1) return axis(box.lower[0], box.upper[0], config.grid_points_1d).transpose();
  const int n = config.grid_points_2d;
  const Vector xs = axis(box.lower[0], box.upper[0], n), ys = axis(box.lower[1], box.upper[1], n);
  Matrix g(2, n * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) g.col(iy * n + ix) << xs[ix], ys[iy];
  return g;
}

double relative_l2(const Vector& mean, const Vector& exact) {
  if (mean.size() != exact.size()) throw DimensionError("relative_l2 needs equal lengths");
  const double denom = exact.norm();
  if (denom == 0.0) throw NumericalError("relative_l2 against an identically zero reference");
  return (mean - exact).norm() / denom;
}

RunSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const ProblemPtr problem = make_problem(config.experiment);
  auto data = std::make_shared<const SensorDataset>(experiment_dataset(*problem, config.noise, config.data_seed));
  const InferenceMode mode = problem->unknown_count() > 0 ? InferenceMode::kInverse : InferenceMode::kForward;
  const MlpArchitecture arch{problem->dim(), config.hidden_widths};

  std::shared_ptr<const Surrogate> surrogate;
  if (config.surrogate == "kl")
    surrogate = std::make_shared<KLSurrogate>(kl_eigenpairs(config.kl_corr_length, 1.0, config.kl_terms));
  else
    surrogate = std::make_shared<MlpSurrogate>(arch);

  const Matrix grid = evaluation_grid(*problem, config);
  const bool has_f = problem->has_residual();
  Vector exact_u(grid.cols()), exact_f(has_f ? grid.cols() : 0);
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    exact_u[j] = exact_eval(*problem, Quantity::kU, grid.col(j));
    if (has_f) exact_f[j] = exact_eval(*problem, Quantity::kF, grid.col(j));
  }

  json diag;
  json summary_diag;
  Prediction pred;
  const int ns = surrogate->param_count();

  auto from_draws = [&](const LogPosteriorTarget& target, const Matrix& draws) {
    const Matrix used = tail_draws(draws, config.predictive_draws);
    pred.u = predictive_stats(target.predict(used, grid, Quantity::kU));
    if (has_f) pred.f = predictive_stats(target.predict(used, grid, Quantity::kF));
    unknown_stats(draws.bottomRows(target.unknown_count()), pred);
  };

  if (config.estimator == "hmc" || config.estimator == "vi" || config.estimator == "dnf") {
    const LogPosteriorTarget target(problem, surrogate, data, mode);
    if (config.estimator == "hmc") {
      const HmcResult r = hmc_sample(target, config.hmc);
      from_draws(target, r.samples.draws);
      summary_diag = {{"acceptance_rate", r.diagnostics.acceptance_rate},
                      {"burn_in_acceptance_rate", r.diagnostics.burn_in_acceptance_rate},
                      {"final_step_size", r.diagnostics.final_step_size},
                      {"divergences", r.diagnostics.divergences},
                      {"max_abs_energy_error", r.diagnostics.max_abs_energy_error},
                      {"kept_draws", r.samples.count()}};
      diag["warnings"] = r.samples.warnings;
    } else if (config.estimator == "vi") {
      Rng init_rng(config.vi.seed, RngStream::kInit);
      const ViParams init(target.initial_state(init_rng), Vector::Constant(target.dim(), config.vi_init_rho));
      const ViResult r = vi_fit(target, init, config.vi);
      const PosteriorSamples s = vi_sample(r.params, config.predictive_draws, config.vi.seed);
      from_draws(target, s.draws);
      summary_diag = {{"final_objective", r.final_objective}, {"steps", config.vi.steps}};
      diag["objective_trace"] = trace_json(r.objective_trace);
    } else {
      const FlowResult r = flow_fit(target, config.flow);
      const PosteriorSamples s = flow_sample(r, config.flow, config.predictive_draws, config.flow.seed);
      from_draws(target, s.draws);
      summary_diag = {{"final_kl", r.final_kl}, {"train_steps", config.flow.train_steps}};
      diag["kl_trace"] = trace_json(r.kl_trace);
    }
  } else if (config.estimator == "pinn") {
    const PinnResult r = pinn_train(problem, data, arch, config.pinn);
    const LogPosteriorTarget target(problem, surrogate, data, mode);
    const Matrix draw = r.theta;
    pred.u = {target.predict(draw, grid, Quantity::kU).row(0).transpose(), Vector::Zero(grid.cols())};
    if (has_f) pred.f = PredictiveStats{target.predict(draw, grid, Quantity::kF).row(0).transpose(), Vector::Zero(grid.cols())};
    if (!r.unknowns.empty()) {
      pred.k_mean = r.unknowns.front();
      pred.k_std = 0.0;
    }
    summary_diag = {{"final_loss", r.final_loss}, {"steps", config.pinn.steps}};
    diag["loss_trace"] = trace_json(r.loss_trace);
  } else if (config.estimator == "dropout") {
    const DropoutModel m = dropout_train(problem, data, arch, config.dropout);
    pred.u = dropout_predict(*problem, m, grid, Quantity::kU, config.dropout.passes, config.dropout.seed);
    if (has_f) pred.f = dropout_predict(*problem, m, grid, Quantity::kF, config.dropout.passes, config.dropout.seed);
    unknown_stats(m.unknown_samples, pred);
    summary_diag = {{"final_loss", m.final_loss}, {"rate", m.rate}, {"passes", config.dropout.passes}};
    diag["loss_trace"] = trace_json(m.loss_trace);
  } else {  // gpr
    const Eigen::Index n = data->u.size();
    Vector points(n + grid.cols());
    points << data->u.points.row(0).transpose(), grid.row(0).transpose();
    const PriorKernelEstimate k = estimate_prior_kernel(arch, Vector::Ones(ns), points, config.gpr_prior_samples,
                                                        config.seed);
    const GpPrediction g = gp_regress(k.covariance, n, data->u.values, data->u.sigmas);
    pred.u = {g.mean, g.std};
    summary_diag = {{"jitter", g.jitter}, {"prior_samples", config.gpr_prior_samples}};
  }

  const std::filesystem::path dir = resolve_output_dir(config);
  std::filesystem::create_directories(dir);
  write_prediction_csv(dir / "prediction_u.csv", grid, pred.u, exact_u);
  if (pred.f) write_prediction_csv(dir / "prediction_f.csv", grid, *pred.f, exact_f);

  RunSummary s;
  s.experiment = config.experiment;
  s.surrogate = config.surrogate;
  s.estimator = config.estimator;
  s.noise = config.noise;
  s.seed = config.seed;
  s.k_mean = pred.k_mean;
  s.k_std = pred.k_std;
  s.rel_l2_u = relative_l2(pred.u.mean, exact_u);
  s.mean_std_u = pred.u.std.mean();
  if (pred.f) {
    s.rel_l2_f = relative_l2(pred.f->mean, exact_f);
    s.mean_std_f = pred.f->std.mean();
  }
  s.coverage_u = ((pred.u.mean - exact_u).array().abs() <= 3.0 * pred.u.std.array()).cast<double>().mean();
  for (const auto& item : summary_diag.items()) s.diagnostics[item.key()] = item.value().get<double>();
  s.output_dir = dir;

  json summary;
  summary["experiment"] = s.experiment;
  summary["surrogate"] = s.surrogate;
  summary["estimator"] = s.estimator;
  summary["noise"] = s.noise;
  summary["seed"] = s.seed;
  summary["k_mean"] = optional_json(s.k_mean);
  summary["k_std"] = optional_json(s.k_std);
  summary["rel_l2_u"] = s.rel_l2_u;
  summary["rel_l2_f"] = optional_json(s.rel_l2_f);
  summary["mean_std_u"] = s.mean_std_u;
  summary["mean_std_f"] = optional_json(s.mean_std_f);
  summary["coverage_3std_u"] = s.coverage_u;
  summary["sampler_diagnostics"] = summary_diag;
  summary["config"] = config_json(config);
  summary["engine_version"] = engine_version();
  s.summary_json = summary.dump(2) + "\n";
  write_text(dir / "summary.json", s.summary_json);

  s.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  diag["wall_time_seconds"] = s.wall_time_seconds;
  diag["sampler"] = summary_diag;
  diag["dataset"] = {{"u", data->u.size()}, {"f", data->f.size()}, {"b", data->b.size()}};
  write_text(dir / "diagnostics.json", diag.dump(2) + "\n");
  {
    std::ofstream out(dir / "dataset.csv", std::ios::binary);
    write_dataset_csv(*data, out);
  }
  return s;
}

}  // namespace bpinn
