// occuthresh: command-line front end.
//
// Reports are JSON documents {"manifest": ..., "data": ...}; only the
// manifest carries timestamps, so the data section of two runs with the
// same parameters is byte-identical. CSV outputs hold data only and get
// a sidecar <out>.manifest.json.
//
// Exit codes: 0 success, 2 usage or domain error, 3 verification failure.

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "occuthresh/cycles.hpp"
#include "occuthresh/errors.hpp"
#include "occuthresh/instances.hpp"
#include "occuthresh/moments.hpp"
#include "occuthresh/occupancy.hpp"
#include "occuthresh/parallel.hpp"
#include "occuthresh/report.hpp"
#include "occuthresh/sdpi.hpp"

namespace {

using namespace occuthresh;
using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitVerification = 3;

// A check inside the tool failed; carries the text to print.
struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write output file '" + path + "'");
  out << text;
}

class Run {
 public:
  explicit Run(std::string subcommand) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.tool_version = OCCUTHRESH_VERSION;
    manifest_.started_at = utc_timestamp();
  }

  template <class T>
  void param(const std::string& key, const T& value) {
    std::ostringstream os;
    os << value;
    manifest_.parameters[key] = os.str();
  }
  void param(const std::string& key, double value) { manifest_.parameters[key] = format_double(value); }
  void param(const std::string& key, const std::vector<std::uint32_t>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + std::to_string(values[i]);
    manifest_.parameters[key] = s;
  }

  void seed(std::uint64_t s) {
    manifest_.master_seed = s;
    manifest_.has_seed = true;
  }
  void threads(unsigned t) { manifest_.threads = t; }

  std::string manifest_json() {
    manifest_.finished_at = utc_timestamp();
    return manifest_.to_json();
  }

  /// JSON report to `out`, or stdout when empty.
  void emit_report(const Json& data, const std::string& out) {
    Json doc;
    doc["manifest"] = Json::parse(manifest_json());
    doc["data"] = data;
    const std::string text = doc.dump(2) + "\n";
    if (out.empty())
      std::cout << text;
    else
      write_file(out, text);
  }

  /// Data file plus manifest sidecar, or data only on stdout.
  void emit_data(const std::string& text, const std::string& out) {
    if (out.empty()) {
      std::cout << text;
      return;
    }
    write_file(out, text);
    write_file(out + ".manifest.json", manifest_json() + "\n");
  }

 private:
  RunManifest manifest_;
};

struct Common {
  unsigned threads = 0;
  std::string out;
};

void add_threads(CLI::App* cmd, Common& c) {
  cmd->add_option("--threads", c.threads, "Worker threads (default: OCCUTHRESH_THREADS or all cores)");
}

void add_out(CLI::App* cmd, Common& c, const std::string& what) {
  cmd->add_option("--out", c.out, what);
}

unsigned threads_of(const Common& c) {
  return resolve_thread_count(c.threads > 0 ? std::optional<unsigned>(c.threads) : std::nullopt);
}

// ---- threshold -----------------------------------------------------------

void run_threshold(std::uint32_t k, const Common& c) {
  Run run("threshold");
  run.param("k", k);
  run.threads(1);
  const ThresholdReport t = threshold_dstar(k);
  Json data;
  data["k"] = t.k;
  data["w1_star"] = t.w1_star;
  data["w2_star"] = t.w2_star;
  data["d_star"] = t.d_star;
  data["lemma_residual"] = t.lemma_residual;
  data["lemma_ok"] = t.lemma_ok;
  data["bounds_ok"] = t.bounds_ok;
  data["is_integer"] = t.is_integer;
  run.emit_report(data, c.out);
}

// ---- satprob -------------------------------------------------------------

struct SatArgs {
  std::uint32_t k = 4, d = 2, r = 2, cap = kDefaultEnumerationCap;
  std::vector<std::uint32_t> n;
  std::uint64_t trials = 200, seed = 0;
};

void run_satprob(const SatArgs& a, const Common& c) {
  Run run("satprob");
  run.param("k", a.k);
  run.param("d", a.d);
  run.param("r", a.r);
  run.param("n", a.n);
  run.param("trials", a.trials);
  run.param("cap", a.cap);
  run.seed(a.seed);
  const unsigned threads = threads_of(c);
  run.threads(threads);
  const auto rows = estimate_sat_probability(a.k, a.d, a.r, a.n, a.trials, a.seed, threads, a.cap);
  run.emit_data(sat_table_csv(rows), c.out);
}

// ---- cycles --------------------------------------------------------------

struct CycleArgs {
  std::uint32_t k = 4, d = 3, n = 400, r = 2, l_max = kDefaultCycleLength;
  std::uint64_t samples = 1000, seed = 0;
};

void run_cycles(const CycleArgs& a, const Common& c) {
  Run run("cycles");
  run.param("k", a.k);
  run.param("d", a.d);
  run.param("n", a.n);
  run.param("r", a.r);
  run.param("l_max", a.l_max);
  run.param("samples", a.samples);
  run.seed(a.seed);
  const unsigned threads = threads_of(c);
  run.threads(threads);
  const Params p = Params::make(a.n, a.d, a.k, a.r);
  const auto censuses = sample_censuses(p, a.l_max, a.samples, a.seed, threads);
  const auto fits = poisson_gof(censuses, a.k, a.d);
  run.emit_data(poisson_fit_csv(fits), c.out);
  if (a.l_max >= 2)
    std::cerr << "corr(X1,X2) = " << format_double(census_correlation(censuses, 1, 2)) << "\n";
}

// ---- moments -------------------------------------------------------------

struct MomentArgs {
  std::uint32_t k = 4, d = 2, n = 4, l = 1;
  bool exact = false;
};

void run_moments(const MomentArgs& a, const Common& c) {
  Run run("moments");
  run.param("k", a.k);
  run.param("d", a.d);
  run.param("n", a.n);
  run.param("l", a.l);
  run.param("exact", a.exact ? "true" : "false");
  const unsigned threads = threads_of(c);
  run.threads(threads);

  const Params p = Params::make(a.n, a.d, a.k, 2);
  const ExactMoment ez = first_moment_exact(p);
  const ExactMoment ratio = second_moment_exact_ratio(p, threads);
  const ExactMoment joint = joint_moment_exact(p, a.l);

  Json data;
  data["k"] = a.k;
  data["d"] = a.d;
  data["n"] = a.n;
  data["surely_zero"] = ez.surely_zero;
  data["ln_EZ_exact"] = number(ez.value.log());
  data["ln_EZ_asymptotic"] = number(first_moment_asymptotic(a.k, a.d, a.n));
  data["ln_ratio_exact"] = number(ratio.value.log());
  if (a.d < a.k)
    data["ln_ratio_asymptotic"] = number(std::log(second_moment_asymptotic(a.k, a.d).ratio));
  else
    data["ln_ratio_asymptotic"] = number(kInf);
  data["l"] = a.l;
  data["ln_EZXl"] = number(joint.value.log());
  data["ln_EZXl_over_EZ"] = number(ez.surely_zero ? -kInf : joint.value.log() - ez.value.log());
  data["mu_l"] = mu_l(a.l, a.k, a.d);

  if (a.exact) {
    const EnumeratedMoments e = enumerate_moments(p, threads);
    Json en;
    en["configurations"] = e.configurations;
    en["sum_Z"] = e.sum_z;
    en["sum_Z2"] = e.sum_z2;
    en["sum_ZX1"] = e.sum_z_x1;
    en["sum_redundant_pairs"] = e.sum_redundant;
    en["ln_EZ"] = number(std::log(e.mean(e.sum_z)));
    en["ln_ratio"] = number(std::log(e.mean(e.sum_z2)) - 2.0 * std::log(e.mean(e.sum_z)));
    en["ln_EZX1"] = number(std::log(e.mean(e.sum_z_x1)));
    en["ln_redundant"] = number(std::log(e.mean(e.sum_redundant)));
    data["enumerated"] = en;
    data["ln_redundant_exact"] = number(expected_redundant_exact(p).log());
  }
  run.emit_report(data, c.out);
}

// ---- sdpi ----------------------------------------------------------------

struct SdpiArgs {
  std::string input;
  std::uint32_t grid_depth = 100;
  double refine_tol = 1e-10;
};

void run_sdpi(const SdpiArgs& a, const Common& c) {
  Run run("sdpi");
  run.param("input", a.input);
  run.param("grid_depth", a.grid_depth);
  run.param("refine_tol", a.refine_tol);
  const unsigned threads = threads_of(c);
  run.threads(threads);
  const ChannelInput in = parse_channel_input(read_file(a.input));
  const ContractionResult res = contraction_generic(in.reference, in.W, a.grid_depth, a.refine_tol, threads);
  Json data;
  data["n_in"] = in.W.n_in();
  data["n_out"] = in.W.n_out();
  data["d_star"] = res.d_star;
  data["argmax"] = std::vector<double>(res.argmax.weights().begin(), res.argmax.weights().end());
  run.emit_report(data, c.out);
}

// ---- verify-k4 -----------------------------------------------------------

struct K4Args {
  std::size_t grid = kDefaultK4Grid;
  double root_tol = 1e-14;
};

void run_verify_k4(const K4Args& a, const Common& c) {
  Run run("verify-k4");
  run.param("grid", a.grid);
  run.param("root_tol", a.root_tol);
  run.threads(1);
  const K4Certificate cert = evaluate_k4(a.grid, a.root_tol);
  const std::string out = c.out.empty() ? "k4_certificate.json" : c.out;
  run.emit_report(Json::parse(certificate_json(cert)), out);
  for (const auto& check : cert.checks) {
    if (!check.passed) {
      throw VerificationFailure("check '" + check.name + "' failed; witness w1 = " +
                                format_double(check.witness) +
                                ", margin = " + format_double(check.margin));
    }
  }
  std::cout << "k=4 certificate: all " << cert.checks.size() << " checks passed; w_bar = "
            << format_fixed(cert.w_bar, 8) << ", max ratio = " << format_fixed(cert.max_ratio_found, 8)
            << " (written to " << out << ")\n";
}

// ---- conjecture ----------------------------------------------------------

struct ConjectureArgs {
  std::uint32_t k = 4, grid = 200;
  double refine_tol = 1e-10;
};

void run_conjecture(const ConjectureArgs& a, const Common& c) {
  Run run("conjecture");
  run.param("k", a.k);
  run.param("grid", a.grid);
  run.param("refine_tol", a.refine_tol);
  const unsigned threads = threads_of(c);
  run.threads(threads);
  const OccupationSup s = contraction_occupation(a.k, a.grid, a.refine_tol, threads);
  Json data;
  data["k"] = a.k;
  data["sup"] = s.sup;
  data["argmax_w1"] = s.argmax.w1;
  data["argmax_w2"] = s.argmax.w2;
  data["conjectured"] = s.conjectured;
  data["gap"] = s.gap;
  run.emit_report(data, c.out);
}

// ---- sample / count ------------------------------------------------------

struct SampleArgs {
  std::uint32_t k = 4, d = 2, n = 8, r = 2;
  std::uint64_t seed = 0, max_attempts = 1000;
  bool simple = false;
};

void run_sample(const SampleArgs& a, const Common& c) {
  Run run("sample");
  run.param("k", a.k);
  run.param("d", a.d);
  run.param("n", a.n);
  run.param("r", a.r);
  run.param("simple", a.simple ? "true" : "false");
  run.param("max_attempts", a.max_attempts);
  run.seed(a.seed);
  run.threads(1);
  const Params p = Params::make(a.n, a.d, a.k, a.r);
  const Configuration cfg = a.simple ? sample_simple(p, a.seed, a.max_attempts)
                                     : sample_configuration(p, a.seed);
  run.emit_data(serialize(cfg), c.out);
}

struct CountArgs {
  std::string input;
  std::uint32_t cap = kDefaultEnumerationCap, l_max = 4;
};

void run_count(const CountArgs& a, const Common& c) {
  Run run("count");
  run.param("input", a.input);
  run.param("cap", a.cap);
  run.param("l_max", a.l_max);
  run.threads(1);
  const Configuration cfg = deserialize(read_file(a.input));
  const Params& p = cfg.params();
  Json data;
  data["n"] = p.n;
  data["d"] = p.d;
  data["k"] = p.k;
  data["r"] = p.r;
  data["m"] = p.m;
  data["solutions"] = count_solutions(cfg, a.cap);
  data["two_cycles"] = count_two_cycles(cfg);
  data["redundant_pairs"] = count_redundant_constraints(to_factor_graph(cfg));
  data["cycles"] = count_cycles(cfg, a.l_max).counts;
  run.emit_report(data, c.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random regular occupation problems: thresholds, moments, cycles and contraction "
               "coefficients"};
  app.set_version_flag("--version", std::string(OCCUTHRESH_VERSION));
  app.require_subcommand(1);

  Common common;
  std::optional<std::function<void()>> action;

  std::uint32_t threshold_k = 4;
  auto* threshold = app.add_subcommand("threshold", "Threshold d* for 2-in-k occupation");
  threshold->add_option("--k", threshold_k, "Constraint arity")->required();
  add_out(threshold, common, "Report file (default: stdout)");
  threshold->callback([&] { action = [&] { run_threshold(threshold_k, common); }; });

  SatArgs sat;
  auto* satprob = app.add_subcommand("satprob", "Monte Carlo satisfiability fractions");
  satprob->add_option("--k", sat.k, "Constraint arity")->required();
  satprob->add_option("--d", sat.d, "Variable degree")->required();
  satprob->add_option("--r", sat.r, "Ones per constraint");
  satprob->add_option("--n", sat.n, "Comma-separated instance sizes")->required()->delimiter(',');
  satprob->add_option("--trials", sat.trials, "Configurations per size");
  satprob->add_option("--seed", sat.seed, "Master seed")->required();
  satprob->add_option("--cap", sat.cap, "Largest n for exact search");
  add_threads(satprob, common);
  add_out(satprob, common, "CSV file (default: stdout)");
  satprob->callback([&] { action = [&] { run_satprob(sat, common); }; });

  CycleArgs cyc;
  auto* cycles = app.add_subcommand("cycles", "Short-cycle census versus Poisson limits");
  cycles->add_option("--k", cyc.k, "Constraint arity")->required();
  cycles->add_option("--d", cyc.d, "Variable degree")->required();
  cycles->add_option("--n", cyc.n, "Variables")->required();
  cycles->add_option("--r", cyc.r, "Ones per constraint");
  cycles->add_option("--samples", cyc.samples, "Configurations to sample");
  cycles->add_option("--l-max", cyc.l_max, "Longest half-length counted");
  cycles->add_option("--seed", cyc.seed, "Master seed")->required();
  add_threads(cycles, common);
  add_out(cycles, common, "CSV file (default: stdout)");
  cycles->callback([&] { action = [&] { run_cycles(cyc, common); }; });

  MomentArgs mom;
  auto* moments = app.add_subcommand("moments", "Exact and asymptotic moments of Z");
  moments->add_option("--k", mom.k, "Constraint arity")->required();
  moments->add_option("--d", mom.d, "Variable degree")->required();
  moments->add_option("--n", mom.n, "Variables")->required();
  moments->add_option("--l", mom.l, "Cycle half-length for E[Z X_l]");
  moments->add_flag("--exact", mom.exact, "Also enumerate every configuration (d*n <= 10)");
  add_threads(moments, common);
  add_out(moments, common, "Report file (default: stdout)");
  moments->callback([&] { action = [&] { run_moments(mom, common); }; });

  SdpiArgs sd;
  auto* sdpi = app.add_subcommand("sdpi", "Contraction coefficient of a channel");
  sdpi->add_option("--input", sd.input, "Channel JSON file")->required();
  sdpi->add_option("--grid-depth", sd.grid_depth, "Simplex grid depth");
  sdpi->add_option("--refine-tol", sd.refine_tol, "Refinement step tolerance");
  add_threads(sdpi, common);
  add_out(sdpi, common, "Report file (default: stdout)");
  sdpi->callback([&] { action = [&] { run_sdpi(sd, common); }; });

  K4Args k4a;
  auto* verify = app.add_subcommand("verify-k4", "Grid certificate for k = 4");
  verify->add_option("--grid", k4a.grid, "Grid points (>= 10000)");
  verify->add_option("--root-tol", k4a.root_tol, "Bisection tolerance");
  add_out(verify, common, "Certificate file (default: k4_certificate.json)");
  verify->callback([&] { action = [&] { run_verify_k4(k4a, common); }; });

  ConjectureArgs conj;
  auto* conjecture = app.add_subcommand("conjecture", "Occupation-channel supremum versus conjecture");
  conjecture->add_option("--k", conj.k, "Constraint arity")->required();
  conjecture->add_option("--grid", conj.grid, "Simplex grid depth");
  conjecture->add_option("--refine-tol", conj.refine_tol, "Refinement step tolerance");
  add_threads(conjecture, common);
  add_out(conjecture, common, "Report file (default: stdout)");
  conjecture->callback([&] { action = [&] { run_conjecture(conj, common); }; });

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "Draw a configuration");
  sample->add_option("--k", smp.k, "Constraint arity")->required();
  sample->add_option("--d", smp.d, "Variable degree")->required();
  sample->add_option("--n", smp.n, "Variables")->required();
  sample->add_option("--r", smp.r, "Ones per constraint");
  sample->add_option("--seed", smp.seed, "Seed")->required();
  sample->add_flag("--simple", smp.simple, "Reject configurations with two-cycles");
  sample->add_option("--max-attempts", smp.max_attempts, "Rejection attempts for --simple");
  add_out(sample, common, "Configuration file (default: stdout)");
  sample->callback([&] { action = [&] { run_sample(smp, common); }; });

  CountArgs cnt;
  auto* count = app.add_subcommand("count", "Count solutions and cycles of a configuration");
  count->add_option("--input", cnt.input, "Configuration JSON file")->required();
  count->add_option("--cap", cnt.cap, "Largest n for exact search");
  count->add_option("--l-max", cnt.l_max, "Longest half-length counted");
  add_out(count, common, "Report file (default: stdout)");
  count->callback([&] { action = [&] { run_count(cnt, common); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (action) (*action)();
    return kExitOk;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kExitVerification;
  } catch (const CertificateFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kExitVerification;
  } catch (const occuthresh::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::cerr << "internal check failed: " << e.what() << "\n";
    return kExitVerification;
  }
}
