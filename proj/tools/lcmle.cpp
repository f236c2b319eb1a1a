// Command-line front end: fit, density, loglik, sample, partition, oracle-fit.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcmle/error.hpp"
#include "lcmle/io.hpp"
#include "lcmle/mle.hpp"
#include "lcmle/partition.hpp"
#include "lcmle/rng.hpp"
#include "lcmle/sampler.hpp"

namespace {

using lcmle::Error;
using lcmle::ErrorKind;
using lcmle::format_real;

enum Exit : int {
  kOk = 0,
  kParse = 1,
  kDegenerate = 2,
  kBudget = 3,
  kUnsupported = 4,
  kNumerical = 5,
  kUsage = 64,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return kParse;
    case ErrorKind::DegenerateGeometry: return kDegenerate;
    case ErrorKind::UnsupportedDimension: return kUnsupported;
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch: return kUsage;
    default: return kNumerical;
  }
}

struct Common {
  std::uint64_t seed = 0;
  std::string output;
  std::string format = "csv";
};

// Writes to --output when given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorKind::ParseError, "cannot write " + path);
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void add_common(CLI::App* cmd, Common& c, bool with_output = true) {
  cmd->add_option("--seed", c.seed, "master RNG seed");
  if (with_output) cmd->add_option("--output", c.output, "output path (default stdout)");
  cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
}

lcmle::PointSet load_points(const std::string& path) {
  const lcmle::CsvTable table = lcmle::read_csv(path);
  return lcmle::PointSet::from_rows(table.rows);
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) throw Error(ErrorKind::ParseError, "bad coordinate '" + field + "' in --at");
    v.push_back(x);
  }
  return v;
}

void print_summary(std::ostream& os, const std::string& format,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
  if (format == "json") {
    nlohmann::json j;
    for (const auto& [k, v] : kv) j[k] = v;
    os << j.dump() << '\n';
    return;
  }
  for (const auto& [k, v] : kv) os << k << ',' << v << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-concave maximum likelihood estimation over tent densities"};
  app.require_subcommand(1);

  // fit
  Common fit_common;
  std::string fit_input;
  std::string fit_trace;
  lcmle::FitConfig cfg;
  double target_gap = 0.05;
  double radius_clip = 0.0;
  bool no_normalize = false;
  bool suffix_average = false;
  auto* fit = app.add_subcommand("fit", "fit the log-concave MLE by stochastic gradient ascent");
  fit->add_option("input", fit_input, "CSV of sample points (one row per point)")->required();
  add_common(fit, fit_common);
  fit->add_option("--trace", fit_trace, "trace TSV path (default <output>.trace.tsv)");
  fit->add_option("--iterations", cfg.iterations)->check(CLI::PositiveNumber);
  fit->add_option("--step-constant", cfg.step_constant)->check(CLI::PositiveNumber);
  fit->add_option("--chain-steps", cfg.chain_steps)->check(CLI::PositiveNumber);
  fit->add_option("--round-target", cfg.round_target_C);
  fit->add_option("--epsilon", cfg.epsilon)->check(CLI::Range(1e-300, 0.1));
  fit->add_option("--radius-clip", radius_clip)->check(CLI::PositiveNumber);
  fit->add_flag("--restarts", cfg.restart, "double the budget until the SGD bound certifies --target-gap");
  fit->add_option("--target-gap", target_gap)->check(CLI::PositiveNumber);
  fit->add_flag("--strict-tv", cfg.strict_tv, "literal per-iteration mixing budget");
  fit->add_option("--tv-exponent", cfg.tv_exponent)->check(CLI::PositiveNumber);
  fit->add_flag("--suffix-average", suffix_average, "return the suffix average of the iterates");
  fit->add_flag("--no-normalize", no_normalize, "keep the exponential-form heights");

  // density
  Common dens_common;
  std::string dens_model;
  std::vector<std::string> dens_at;
  std::string dens_points;
  bool dens_unscaled = false;
  auto* density = app.add_subcommand("density", "evaluate the fitted density");
  density->add_option("model", dens_model)->required();
  add_common(density, dens_common);
  density->add_option("--at", dens_at, "query point, comma-separated coordinates");
  density->add_option("--points", dens_points, "CSV of query points");
  density->add_flag("--unscaled", dens_unscaled, "print exp(h) without the log-partition");

  // loglik
  Common ll_common;
  std::string ll_model;
  std::string ll_data;
  auto* loglik = app.add_subcommand("loglik", "log-likelihood of a data set under a model");
  loglik->add_option("model", ll_model)->required();
  loglik->add_option("data", ll_data, "CSV of points (default: the model's own poles)");
  add_common(loglik, ll_common);

  // sample
  Common smp_common;
  std::string smp_model;
  int smp_count = 100;
  int smp_chain = 0;
  int smp_thin = 0;
  double smp_round = 2.0;
  auto* sample = app.add_subcommand("sample", "draw points by hit-and-run");
  sample->add_option("model", smp_model)->required();
  add_common(sample, smp_common);
  sample->add_option("--count", smp_count)->check(CLI::PositiveNumber);
  sample->add_option("--chain-steps", smp_chain, "burn-in steps")->check(CLI::PositiveNumber);
  sample->add_option("--thin", smp_thin, "steps between samples")->check(CLI::PositiveNumber);
  sample->add_option("--round-target", smp_round);

  // partition
  Common part_common;
  std::string part_model;
  double part_eps = 0.1;
  auto* partition = app.add_subcommand("partition", "estimate the log-partition by level-set slicing");
  partition->add_option("model", part_model)->required();
  add_common(partition, part_common);
  partition->add_option("--epsilon", part_eps)->check(CLI::Range(1e-300, 0.1));

  // oracle-fit
  Common orc_common;
  std::string orc_input;
  double orc_tol = 1e-6;
  auto* oracle = app.add_subcommand("oracle-fit", "deterministic quadrature fit (d <= 2, n <= 8)");
  oracle->add_option("input", orc_input)->required();
  add_common(oracle, orc_common);
  oracle->add_option("--tolerance", orc_tol)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*fit) {
      if (radius_clip > 0.0) cfg.radius_clip = radius_clip;
      if (suffix_average) cfg.iterate = lcmle::IterateMode::SuffixAverage;
      cfg.seed = fit_common.seed;
      if (!(cfg.round_target_C > 1.0)) throw Error(ErrorKind::InvalidArgument, "--round-target must exceed 1");
      const std::string model_path = fit_common.output.empty() ? "model.json" : fit_common.output;
      const std::string trace_path = fit_trace.empty() ? model_path + ".trace.tsv" : fit_trace;
      const lcmle::PointSet ps = load_points(fit_input);
      lcmle::Rng rng = lcmle::make_stream(fit_common.seed, "fit");
      const lcmle::FitReport report =
          cfg.restart ? lcmle::fit_with_restarts(rng, ps, cfg, target_gap) : lcmle::sgd_fit(rng, ps, cfg);
      const lcmle::Model model = no_normalize ? report.model : lcmle::normalize(report.model);
      lcmle::write_model(model_path, model, fit_common.seed, lcmle::config_to_json(cfg));
      std::ofstream trace(trace_path);
      if (!trace) throw Error(ErrorKind::ParseError, "cannot write " + trace_path);
      trace << "iter\teta\tgrad_norm\theight_sum\n";
      for (const auto& row : report.trace) {
        trace << row.iter << '\t' << format_real(row.eta) << '\t' << format_real(row.grad_norm) << '\t'
              << format_real(row.height_sum) << '\n';
      }
      print_summary(std::cout, fit_common.format,
                    {{"model", model_path},
                     {"trace", trace_path},
                     {"iterations", std::to_string(report.final_iterations)},
                     {"invocations", std::to_string(report.invocations)},
                     {"log_partition", format_real(report.model.log_partition)},
                     {"objective_estimate", format_real(report.objective_estimate)},
                     {"certified_gap", format_real(report.certified_gap)}});
      if (report.budget_exhausted) {
        std::cerr << "BudgetExhausted: iteration budget or wall-clock cap reached before the gap "
                     "bound certified --target-gap\n";
        return kBudget;
      }
      return kOk;
    }

    if (*density) {
      const lcmle::Model model = lcmle::read_model(dens_model);
      std::vector<Eigen::VectorXd> queries;
      for (const auto& text : dens_at) {
        const auto v = parse_point(text);
        queries.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
      if (!dens_points.empty()) {
        const auto table = lcmle::read_csv(dens_points);
        for (const auto& r : table.rows) {
          queries.emplace_back(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())));
        }
      }
      if (queries.empty()) throw Error(ErrorKind::InvalidArgument, "give --at or --points");
      Sink sink(dens_common.output);
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& q : queries) {
        double p = lcmle::density_unscaled(model.point_set, model.heights, q);
        if (!dens_unscaled) p *= std::exp(-model.log_partition);
        if (dens_common.format == "json") {
          arr.push_back(p);
        } else {
          sink.out() << format_real(p) << '\n';
        }
      }
      if (dens_common.format == "json") sink.out() << arr.dump() << '\n';
      return kOk;
    }

    if (*loglik) {
      const lcmle::Model model = lcmle::read_model(ll_model);
      const lcmle::PointSet data = ll_data.empty() ? model.point_set : load_points(ll_data);
      const double ll = lcmle::log_likelihood(model, data);
      Sink sink(ll_common.output);
      if (ll_common.format == "json") {
        sink.out() << nlohmann::json{{"log_likelihood", format_real(ll)}}.dump() << '\n';
      } else {
        sink.out() << format_real(ll) << '\n';
      }
      return kOk;
    }

    if (*sample) {
      const lcmle::Model model = lcmle::read_model(smp_model);
      const lcmle::PointSet& ps = model.point_set;
      const int d = ps.dim();
      lcmle::Rng rng = lcmle::make_stream(smp_common.seed, "sample");
      lcmle::RoundingOptions ropts;
      if (smp_chain > 0) ropts.burn_in = smp_chain;
      const lcmle::RoundingResult r =
          d == 1 ? lcmle::RoundingResult{lcmle::AffineMap::identity(1), 1.0, true, 0, ps.barycenter()}
                 : lcmle::round_to_isotropic(rng, ps, model.heights, smp_round, ropts);
      const int thin = smp_thin > 0 ? smp_thin : (d == 1 ? 1 : 2 * d);
      Eigen::VectorXd x = r.last_point;
      Sink sink(smp_common.output);
      nlohmann::json arr = nlohmann::json::array();
      for (int i = 0; i < smp_count; ++i) {
        x = lcmle::hit_and_run(rng, ps, model.heights, r.map, x, thin);
        if (smp_common.format == "json") {
          arr.push_back(std::vector<double>(x.data(), x.data() + d));
          continue;
        }
        for (int k = 0; k < d; ++k) sink.out() << (k ? "," : "") << format_real(x[k]);
        sink.out() << '\n';
      }
      if (smp_common.format == "json") sink.out() << arr.dump() << '\n';
      return kOk;
    }

    if (*partition) {
      const lcmle::Model model = lcmle::read_model(part_model);
      lcmle::Rng rng = lcmle::make_stream(part_common.seed, "partition");
      const lcmle::SliceEstimate est = lcmle::log_partition_sliced(rng, model.point_set, model.heights, part_eps);
      Sink sink(part_common.output);
      if (part_common.format == "json") {
        sink.out() << nlohmann::json{{"log_partition", est.log_partition},
                                     {"additive_error", est.additive_error},
                                     {"mc_error", est.mc_error},
                                     {"slice_count", est.slice_count},
                                     {"truncation_depth", est.truncation_depth},
                                     {"samples", est.samples}}
                          .dump()
                   << '\n';
      } else {
        sink.out() << format_real(est.log_partition) << " ± " << format_real(est.additive_error) << '\n';
      }
      return kOk;
    }

    if (*oracle) {
      const lcmle::PointSet ps = load_points(orc_input);
      if (ps.dim() > 2 || ps.count() > 8) {
        throw Error(ErrorKind::UnsupportedDimension, "oracle-fit supports d <= 2 and n <= 8");
      }
      lcmle::OracleOptions opts;
      opts.tolerance = orc_tol;
      const lcmle::Model model = lcmle::oracle_fit(ps, opts);
      const std::string model_path = orc_common.output.empty() ? "oracle_model.json" : orc_common.output;
      lcmle::write_model(model_path, model, orc_common.seed);
      print_summary(std::cout, orc_common.format,
                    {{"model", model_path},
                     {"iterations", std::to_string(model.diagnostics.iterations_run)},
                     {"stationarity", format_real(model.diagnostics.surrogate_trace.empty()
                                                       ? 0.0
                                                       : model.diagnostics.surrogate_trace.back())},
                     {"log_likelihood", format_real(lcmle::log_likelihood(model, ps))}});
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
