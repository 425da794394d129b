#include "app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crnsim/convergence.hpp"
#include "crnsim/ensemble.hpp"
#include "crnsim/error.hpp"
#include "crnsim/leap.hpp"
#include "crnsim/moments.hpp"
#include "crnsim/parser.hpp"
#include "crnsim/rng.hpp"
#include "manifest.hpp"
#include "version.hpp"

namespace crnsim::cli {

namespace {

// Flag combinations the engine would accept but the command line does not.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Salts separating auxiliary ensembles from the main run's streams.
constexpr std::uint64_t kPilotSalt = 0x70696c6f74ULL;      // "pilot"
constexpr std::uint64_t kReferenceSalt = 0x726566ULL;      // "ref"
constexpr std::uint64_t kDefaultSeed = 1;

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_env_number(const char* name) {
  const char* raw = std::getenv(name);
  T value{};
  const std::string_view text(raw);
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError(std::string(name) + " must be a nonnegative integer, got '" +
                     std::string(text) + "'");
  }
  return value;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const PathFailure*>(&e)) return kRuntimeFailure;
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const UnsupportedError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const StructuralError*>(&e)) {
    return kUsageError;
  }
  return kRuntimeFailure;
}

// CSV destination: the --out file, or the caller's stream.
class CsvSink {
 public:
  CsvSink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }
  void close() {
    stream_->flush();
    if (file_) {
      file_->close();
      if (!*file_) throw std::runtime_error("write to output file failed");
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Options shared by the ensemble-running commands. The network file's first
// [experiment] block supplies defaults for anything not given on the command
// line.
struct RunFlags {
  std::string network;
  std::string method;
  std::string h;
  double theta = 0.5;
  bool rho_rounding = false;
  std::string clamp = "zero";
  double T = 1.0;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;
  std::uint64_t batch_size = kDefaultBatchSize;
  std::string out;

  CLI::Option* method_opt = nullptr;
  CLI::Option* h_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* T_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
};

void add_network_arg(CLI::App* sub, RunFlags& f) {
  sub->add_option("network", f.network, "Network file (.crn)")
      ->required()
      ->check(CLI::ExistingFile);
}

void add_scheme_options(CLI::App* sub, RunFlags& f) {
  f.theta_opt = sub->add_option("--theta", f.theta,
                                "Weak trapezoidal stage fraction in (0,1) "
                                "(default 0.5)");
  sub->add_flag("--rho-rounding", f.rho_rounding,
                "Round the midpoint predictor to integers");
  sub->add_option("--clamp", f.clamp,
                  "Negative-count policy: zero (set to 0) or strict (fail)")
      ->check(CLI::IsMember({"zero", "strict"}))
      ->capture_default_str();
}

void add_method_options(CLI::App* sub, RunFlags& f) {
  f.method_opt = sub->add_option(
      "--method", f.method,
      "exact | nrm | euler | midpoint | weaktrap");
  f.h_opt = sub->add_option(
      "--h", f.h, "Step size for leap methods, decimal or b^e (e.g. 3^-4)");
  add_scheme_options(sub, f);
}

void add_run_options(CLI::App* sub, RunFlags& f) {
  f.T_opt = sub->add_option("--T", f.T, "Final time");
  f.seed_opt = sub->add_option(
      "--seed", f.seed, "Master seed (default: file, then $CRNSIM_SEED, then 1)");
  f.workers_opt = sub->add_option(
      "--workers", f.workers,
      "Worker threads; 0 = all cores (default: $CRNSIM_WORKERS or 0)");
  sub->add_option("--batch-size", f.batch_size, "Paths per batch")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out", f.out,
                  "Output CSV (default stdout); also writes <out>.manifest.json");
}

struct Loaded {
  std::string text;
  NetworkDocument doc;
  ExperimentBlock defaults;
};

Loaded load(const RunFlags& f, RunManifest& manifest) {
  std::string text = read_file(f.network);
  manifest.set_network(f.network, text);
  NetworkDocument doc = parse_network(text);
  ExperimentBlock defaults;
  if (!doc.experiments.empty()) defaults = doc.experiments.front();
  return {std::move(text), std::move(doc), std::move(defaults)};
}

std::uint64_t resolve_seed(const RunFlags& f, const ExperimentBlock& d) {
  if (f.seed_opt->count()) return f.seed;
  if (d.seed) return *d.seed;
  if (std::getenv("CRNSIM_SEED")) return parse_env_number<std::uint64_t>("CRNSIM_SEED");
  return kDefaultSeed;
}

unsigned resolve_worker_flag(const RunFlags& f) {
  if (f.workers_opt->count()) return f.workers;
  if (std::getenv("CRNSIM_WORKERS")) return parse_env_number<unsigned>("CRNSIM_WORKERS");
  return 0;
}

double resolve_T(const RunFlags& f, const ExperimentBlock& d) {
  double T = f.T;
  if (!f.T_opt->count()) {
    if (!d.T) throw UsageError("--T is required (the network file sets no T)");
    T = *d.T;
  }
  if (!(T > 0.0) || !std::isfinite(T)) throw UsageError("--T must be positive");
  return T;
}

MethodConfig scheme_config(const RunFlags& f, const ExperimentBlock& d,
                           Method method) {
  MethodConfig c;
  c.method = method;
  c.theta = f.theta_opt->count() ? f.theta : d.theta.value_or(0.5);
  if (method == Method::WeakTrapezoidal) xi_coefficients(c.theta);
  c.rho_rounding = f.rho_rounding;
  c.clamp = f.clamp == "strict" ? ClampPolicy::StrictError : ClampPolicy::ZeroFloor;
  return c;
}

MethodConfig resolve_method(const RunFlags& f, const ExperimentBlock& d) {
  const std::string name = f.method_opt->count() ? f.method : d.method.value_or("");
  if (name.empty()) {
    throw UsageError("--method is required (the network file sets no method)");
  }
  const auto method = parse_method(name);
  if (!method) throw UsageError("unknown method '" + name + "'");
  MethodConfig c = scheme_config(f, d, *method);
  if (!is_leap(*method)) {
    if (f.h_opt->count()) {
      throw UsageError("--h is not accepted by the exact method '" + name + "'");
    }
  } else if (f.h_opt->count()) {
    c.h = parse_step_size(f.h);
  } else if (d.h) {
    c.h = *d.h;
  } else {
    throw UsageError("--h is required for leap method '" + name + "'");
  }
  return c;
}

void check_stability(const ReactionNetwork& net, const State& x0,
                     const MethodConfig& c, RunManifest& manifest,
                     std::ostream& err) {
  if (!is_leap(c.method)) return;
  if (auto w = stability_warning(net, x0, c.h)) {
    err << "warning: " << *w << '\n';
    manifest.warn(*w);
  }
}

std::string h_field(const MethodConfig& c) { return is_leap(c.method) ? fmt(c.h) : ""; }
std::string theta_field(const MethodConfig& c) {
  return c.method == Method::WeakTrapezoidal ? fmt(c.theta) : "";
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  RunFlags run;
  std::uint64_t paths = 0;
  CLI::Option* paths_opt = nullptr;
  bool summary = false;
  bool trajectory = false;
};

std::uint64_t resolve_paths(CLI::Option* opt, std::uint64_t flag,
                            const ExperimentBlock& d) {
  if (opt->count()) return flag;
  if (d.paths) return *d.paths;
  throw UsageError("--paths is required (the network file sets no paths)");
}

void cmd_simulate(const SimulateFlags& s, RunManifest& manifest,
                  std::ostream& out, std::ostream& err) {
  const RunFlags& f = s.run;
  const Loaded l = load(f, manifest);
  const MethodConfig config = resolve_method(f, l.defaults);
  const double T = resolve_T(f, l.defaults);
  const std::uint64_t n = resolve_paths(s.paths_opt, s.paths, l.defaults);
  const std::uint64_t seed = resolve_seed(f, l.defaults);
  const unsigned workers = resolve_worker_flag(f);
  manifest.set_seed(seed);
  manifest.set_workers(resolve_workers(workers));
  if (s.summary && s.trajectory) {
    throw UsageError("--summary and --trajectory are mutually exclusive");
  }
  check_stability(l.doc.network, l.doc.initial, config, manifest, err);

  const ReactionNetwork& net = l.doc.network;
  const Experiment ex{net, l.doc.initial, T, config};
  EnsembleOptions opts{workers, f.batch_size, s.trajectory};

  CsvSink sink(f.out, out);
  if (s.summary) {
    std::vector<Observable> fs;
    for (std::size_t i = 0; i < net.n_species(); ++i) fs.push_back(Observable::count(i));
    const auto stats = estimate_many(ex, fs, n, seed, opts);
    *sink << "method,h,theta,n_paths,species,mean,variance,ci_halfwidth,"
             "total_updates,clamp_events,seed\n";
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const auto& st = stats[i];
      *sink << method_name(config.method) << ',' << h_field(config) << ','
            << theta_field(config) << ',' << st.n_paths << ','
            << net.species()[i].name << ',' << fmt(st.mean) << ','
            << fmt(st.sample_variance) << ',' << fmt(st.ci_halfwidth) << ','
            << st.total_updates << ',' << st.total_clamp_events << ',' << seed
            << '\n';
    }
  } else if (s.trajectory) {
    *sink << "path,time";
    for (const auto& sp : net.species()) *sink << ',' << sp.name;
    *sink << '\n';
    for_each_path(ex, n, seed, opts, [&](std::uint64_t i, const PathResult& p) {
      for (const auto& point : p.trajectory) {
        *sink << i << ',' << fmt(point.time);
        for (const Count c : point.state) *sink << ',' << c;
        *sink << '\n';
      }
    });
  } else {
    *sink << "path";
    for (const auto& sp : net.species()) *sink << ',' << sp.name;
    *sink << ",update_count,clamp_events\n";
    for_each_path(ex, n, seed, opts, [&](std::uint64_t i, const PathResult& p) {
      *sink << i;
      for (const Count c : p.final_state) *sink << ',' << c;
      *sink << ',' << p.update_count << ',' << p.clamp_events << '\n';
    });
  }
  sink.close();
  if (!f.out.empty()) manifest.add_output(f.out);
}

// ---------------------------------------------------------------- estimate

struct EstimateFlags {
  RunFlags run;
  std::string observable;
  CLI::Option* observable_opt = nullptr;
  std::uint64_t paths = 0;
  CLI::Option* paths_opt = nullptr;
  double target_halfwidth = 0.0;
  CLI::Option* target_opt = nullptr;
  std::uint64_t pilot_paths = 1000;
  bool plan_only = false;
  bool timing = false;
};

Observable resolve_observable(CLI::Option* opt, const std::string& flag,
                              const Loaded& l) {
  const std::string text =
      opt->count() ? flag : l.defaults.observable.value_or("");
  if (text.empty()) {
    throw UsageError("--observable is required (the network file sets none)");
  }
  return parse_observable(text, l.doc.network);
}

void cmd_estimate(const EstimateFlags& e, RunManifest& manifest,
                  std::ostream& out, std::ostream& err) {
  const RunFlags& f = e.run;
  const Loaded l = load(f, manifest);
  const MethodConfig config = resolve_method(f, l.defaults);
  const double T = resolve_T(f, l.defaults);
  const Observable obs = resolve_observable(e.observable_opt, e.observable, l);
  const std::uint64_t seed = resolve_seed(f, l.defaults);
  const unsigned workers = resolve_worker_flag(f);
  manifest.set_seed(seed);
  manifest.set_workers(resolve_workers(workers));
  if (e.plan_only && !e.target_opt->count()) {
    throw UsageError("--plan-only needs --target-halfwidth");
  }
  check_stability(l.doc.network, l.doc.initial, config, manifest, err);

  const Experiment ex{l.doc.network, l.doc.initial, T, config};
  const EnsembleOptions opts{workers, f.batch_size};

  std::uint64_t n = 0;
  if (e.target_opt->count()) {
    if (!(e.target_halfwidth > 0.0)) {
      throw UsageError("--target-halfwidth must be positive");
    }
    const EnsembleStats pilot =
        estimate(ex, obs, e.pilot_paths, mix_seed(seed, kPilotSalt), opts);
    n = std::max<std::uint64_t>(required_paths(e.target_halfwidth, pilot.sample_variance), 2);
    err << "pilot: " << pilot.n_paths << " paths, variance "
        << fmt(pilot.sample_variance) << " -> " << n
        << " paths for half-width " << fmt(e.target_halfwidth) << '\n';
    if (e.plan_only) {
      CsvSink sink(f.out, out);
      *sink << "method,h,theta,pilot_paths,pilot_mean,pilot_variance,"
               "target_halfwidth,planned_paths,seed\n"
            << method_name(config.method) << ',' << h_field(config) << ','
            << theta_field(config) << ',' << pilot.n_paths << ','
            << fmt(pilot.mean) << ',' << fmt(pilot.sample_variance) << ','
            << fmt(e.target_halfwidth) << ',' << n << ',' << seed << '\n';
      sink.close();
      if (!f.out.empty()) manifest.add_output(f.out);
      return;
    }
  } else {
    n = resolve_paths(e.paths_opt, e.paths, l.defaults);
  }

  const EnsembleStats st = estimate(ex, obs, n, seed, opts);
  CsvSink sink(f.out, out);
  *sink << "method,h,theta,n_paths,mean,variance,ci_halfwidth,total_updates,"
           "clamp_events,"
        << (e.timing ? "wall_time," : "") << "seed\n";
  *sink << method_name(config.method) << ',' << h_field(config) << ','
        << theta_field(config) << ',' << st.n_paths << ',' << fmt(st.mean)
        << ',' << fmt(st.sample_variance) << ',' << fmt(st.ci_halfwidth) << ','
        << st.total_updates << ',' << st.total_clamp_events << ',';
  if (e.timing) *sink << fmt(st.wall_time) << ',';
  *sink << seed << '\n';
  sink.close();
  if (!f.out.empty()) manifest.add_output(f.out);
  if (st.total_clamp_events > 0) {
    manifest.warn(std::to_string(st.total_clamp_events) +
                  " clamp events (negative counts set to zero)");
  }
}

// ---------------------------------------------------------------- converge

struct ConvergeFlags {
  RunFlags run;
  std::string observable;
  CLI::Option* observable_opt = nullptr;
  std::string methods = "euler,midpoint,weaktrap";
  std::string h_grid = "3^-1:3^-7";
  std::string paths = "100000";
  CLI::Option* paths_opt = nullptr;
  std::string reference = "oracle";
  std::uint64_t reference_paths = 0;
  double window_split = 0.0;
  CLI::Option* split_opt = nullptr;
  std::string summary;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) {
    const auto a = part.find_first_not_of(" \t");
    const auto b = part.find_last_not_of(" \t");
    parts.push_back(a == std::string::npos ? "" : part.substr(a, b - a + 1));
  }
  return parts;
}

int parse_int(const std::string& text, const std::string& what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("bad " + what + " '" + text + "'");
  }
  return v;
}

// Either a comma list of step sizes or a range `b^p:b^q` expanding to every
// integer power of b between the two exponents.
std::vector<double> parse_h_grid(const std::string& text) {
  std::vector<double> grid;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const auto lo = split(text.substr(0, colon), '^');
    const auto hi = split(text.substr(colon + 1), '^');
    if (lo.size() != 2 || hi.size() != 2 || lo[0] != hi[0]) {
      throw UsageError("h range must look like 3^-1:3^-7");
    }
    const int base = parse_int(lo[0], "h range base");
    const int p = parse_int(lo[1], "h range exponent");
    const int q = parse_int(hi[1], "h range exponent");
    if (base < 2) throw UsageError("h range base must be >= 2");
    const int step = p <= q ? 1 : -1;
    for (int e = p;; e += step) {
      grid.push_back(std::pow(static_cast<double>(base), e));
      if (e == q) break;
    }
  } else {
    for (const auto& item : split(text, ',')) grid.push_back(parse_step_size(item));
  }
  if (grid.empty()) throw UsageError("empty h grid");
  return grid;
}

std::vector<std::uint64_t> parse_paths_list(const std::string& text,
                                            std::size_t grid_size) {
  std::vector<std::uint64_t> paths;
  for (const auto& item : split(text, ',')) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v < 2) {
      throw UsageError("--paths entries must be integers >= 2, got '" + item + "'");
    }
    paths.push_back(v);
  }
  if (paths.size() != 1 && paths.size() != grid_size) {
    throw UsageError("--paths needs one count or one per h in the grid");
  }
  return paths;
}

// The last line of the file whose first field parses as a number:
// `value[,ci_halfwidth]`.
Reference reference_from_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::optional<Reference> found;
  while (std::getline(in, line)) {
    const auto fields = split(line, ',');
    if (fields.empty() || fields[0].empty() || fields[0][0] == '#') continue;
    double value = 0.0;
    const auto& v = fields[0];
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc() || ptr != v.data() + v.size()) continue;
    Reference r;
    r.value = value;
    r.source = Reference::Source::File;
    if (fields.size() > 1 && !fields[1].empty()) {
      const auto& c = fields[1];
      const auto [p2, e2] = std::from_chars(c.data(), c.data() + c.size(), r.ci_halfwidth);
      if (e2 != std::errc() || p2 != c.data() + c.size() || r.ci_halfwidth < 0.0) {
        throw UsageError("bad reference CI half-width '" + c + "' in " + path);
      }
    }
    found = r;
  }
  if (!found) throw UsageError("no numeric reference value in " + path);
  return *found;
}

std::string summary_path(const ConvergeFlags& c) {
  if (!c.summary.empty()) return c.summary;
  const std::string& out = c.run.out;
  if (out.empty()) return {};
  if (out.size() > 4 && out.compare(out.size() - 4, 4, ".csv") == 0) {
    return out.substr(0, out.size() - 4) + "_summary.csv";
  }
  return out + "_summary.csv";
}

std::string join_h(const std::vector<double>& hs) {
  std::string s;
  for (const double h : hs) {
    if (!s.empty()) s += ' ';
    s += fmt(h);
  }
  return s;
}

void cmd_converge(const ConvergeFlags& c, RunManifest& manifest,
                  std::ostream& out, std::ostream& err) {
  const RunFlags& f = c.run;
  const Loaded l = load(f, manifest);
  const ReactionNetwork& net = l.doc.network;
  const double T = resolve_T(f, l.defaults);
  const Observable obs = resolve_observable(c.observable_opt, c.observable, l);
  const std::uint64_t seed = resolve_seed(f, l.defaults);
  const unsigned workers = resolve_worker_flag(f);
  manifest.set_seed(seed);
  manifest.set_workers(resolve_workers(workers));

  std::vector<MethodConfig> methods;
  for (const auto& name : split(c.methods, ',')) {
    const auto m = parse_method(name);
    if (!m) throw UsageError("unknown method '" + name + "'");
    methods.push_back(scheme_config(f, l.defaults, *m));
  }
  if (methods.empty()) throw UsageError("--methods is empty");
  const std::vector<double> grid = parse_h_grid(c.h_grid);
  const std::string paths_text =
      c.paths_opt->count() || !l.defaults.paths ? c.paths
                                                : std::to_string(*l.defaults.paths);
  const auto paths = parse_paths_list(paths_text, grid.size());
  const EnsembleOptions opts{workers, f.batch_size};

  Reference ref;
  if (c.reference == "oracle") {
    ref = oracle_reference(net, l.doc.initial, T, obs);
  } else if (c.reference == "exact") {
    const std::uint64_t n = c.reference_paths
                                ? c.reference_paths
                                : *std::max_element(paths.begin(), paths.end());
    const Experiment ex{net, l.doc.initial, T, MethodConfig::direct()};
    const EnsembleStats st = estimate(ex, obs, n, mix_seed(seed, kReferenceSalt), opts);
    ref = {st.mean, st.ci_halfwidth, Reference::Source::ExactEnsemble};
  } else if (c.reference.rfind("file:", 0) == 0) {
    ref = reference_from_file(c.reference.substr(5));
  } else {
    throw UsageError("--reference must be oracle, exact or file:<path>");
  }

  const std::string obs_text = to_string(obs, net);
  std::vector<ConvergenceReport> reports;
  for (const MethodConfig& m : methods) {
    for (const double h : grid) {
      check_stability(net, l.doc.initial, with_step(m, h), manifest, err);
    }
    ConvergenceReport r;
    r.method = std::string(method_name(m.method));
    r.observable = obs_text;
    r.T = T;
    r.reference = ref;
    r.points = bias_curve(m, net, l.doc.initial, T, obs, grid, paths, ref, seed, opts);
    if (r.points.size() >= 2) {
      try {
        r.fit = fit_slope(r.points);
      } catch (const InsufficientSignal& e) {
        manifest.warn(r.method + ": " + e.what());
        err << "warning: " << r.method << ": " << e.what() << '\n';
      }
    } else {
      const std::string w = r.method + ": a single step size gives no slope";
      manifest.warn(w);
      err << "warning: " << w << '\n';
    }
    reports.push_back(std::move(r));
  }

  CsvSink sink(f.out, out);
  *sink << "method,h,estimate,bias_abs,bias_ci,n_paths,total_updates,log10_h,"
           "log10_bias,in_fit\n";
  for (const auto& r : reports) {
    for (const auto& p : r.points) {
      const bool used = r.fit && std::find(r.fit->used_h.begin(), r.fit->used_h.end(),
                                           p.h) != r.fit->used_h.end();
      *sink << r.method << ',' << fmt(p.h) << ',' << fmt(p.estimate) << ','
            << fmt(p.bias_abs) << ',' << fmt(p.bias_ci) << ',' << p.n_paths << ','
            << p.total_updates << ',' << fmt(std::log10(p.h)) << ','
            << (p.bias_abs > 0.0 ? fmt(std::log10(p.bias_abs)) : "") << ','
            << (used ? 1 : 0) << '\n';
    }
  }
  sink.close();
  if (!f.out.empty()) manifest.add_output(f.out);

  const std::string spath = summary_path(c);
  std::ostringstream summary;
  summary << "method,observable,T,reference,reference_value,reference_ci,"
             "n_points,n_used,slope,intercept,residual,excluded_h";
  if (c.split_opt->count()) summary << ",large_h_slope,small_h_slope,crossover";
  summary << '\n';
  for (const auto& r : reports) {
    summary << r.method << ',' << r.observable << ',' << fmt(r.T) << ','
            << to_string(r.reference.source) << ',' << fmt(r.reference.value)
            << ',' << fmt(r.reference.ci_halfwidth) << ',' << r.points.size()
            << ',';
    if (r.fit) {
      summary << r.fit->used_h.size() << ',' << fmt(r.fit->slope) << ','
              << fmt(r.fit->intercept) << ',' << fmt(r.fit->residual) << ','
              << join_h(r.fit->excluded_h);
    } else {
      summary << "0,,,,";
    }
    if (c.split_opt->count()) {
      std::vector<BiasPoint> large, small;
      for (const auto& p : r.points) (p.h >= c.window_split ? large : small).push_back(p);
      std::optional<SlopeFit> fl, fs;
      try { fl = fit_slope(large); } catch (const InsufficientSignal&) {}
      try { fs = fit_slope(small); } catch (const InsufficientSignal&) {}
      summary << ',' << (fl ? fmt(fl->slope) : "") << ','
              << (fs ? fmt(fs->slope) : "") << ',';
      if (fl && fs) summary << (fl->slope - fs->slope >= kCrossoverMargin ? 1 : 0);
    }
    summary << '\n';
  }
  if (spath.empty()) {
    err << summary.str();
  } else {
    CsvSink ssink(spath, out);
    *ssink << summary.str();
    ssink.close();
    manifest.add_output(spath);
  }
}

// ---------------------------------------------------------------- moments

struct MomentFlags {
  RunFlags run;
  double dt = 0.0;
  unsigned points = 1;
};

void cmd_moments(const MomentFlags& mf, RunManifest& manifest,
                 std::ostream& out, std::ostream&) {
  const RunFlags& f = mf.run;
  const Loaded l = load(f, manifest);
  const double T = resolve_T(f, l.defaults);
  if (mf.dt < 0.0) throw UsageError("--dt must be nonnegative");
  const ReactionNetwork& net = l.doc.network;
  const MomentSystem system = build_moment_system(net);
  std::vector<double> times;
  for (unsigned i = 1; i <= mf.points; ++i) {
    times.push_back(i == mf.points ? T : T * i / mf.points);
  }
  const auto solutions = solve_moments_at(system, l.doc.initial, times, mf.dt);

  const std::size_t d = net.n_species();
  CsvSink sink(f.out, out);
  *sink << "time";
  for (std::size_t i = 0; i < d; ++i) *sink << ",mean_" << net.species()[i].name;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      *sink << ",second_" << net.species()[i].name << '_' << net.species()[j].name;
    }
  }
  *sink << '\n';
  for (const auto& s : solutions) {
    *sink << fmt(s.time);
    for (std::size_t i = 0; i < d; ++i) *sink << ',' << fmt(s.mean(static_cast<Eigen::Index>(i)));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        *sink << ',' << fmt(s.second_moment(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(j)));
      }
    }
    *sink << '\n';
  }
  sink.close();
  if (!f.out.empty()) manifest.add_output(f.out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic simulation of reaction networks: exact paths, "
               "tau-leaping, Monte Carlo estimates and weak-error sweeps",
               "crnsim"};
  // `-h` would collide with the step-size flag `--h`.
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate paths and write final states");
  add_network_arg(simulate, sim.run);
  add_method_options(simulate, sim.run);
  add_run_options(simulate, sim.run);
  sim.paths_opt = simulate->add_option("--paths", sim.paths, "Number of paths");
  simulate->add_flag("--summary", sim.summary,
                     "Write per-species mean/variance instead of per-path rows");
  simulate->add_flag("--trajectory", sim.trajectory,
                     "Write every recorded (time, state) of every path");

  EstimateFlags est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Monte Carlo estimate of E f(X(T))");
  add_network_arg(estimate_cmd, est.run);
  add_method_options(estimate_cmd, est.run);
  add_run_options(estimate_cmd, est.run);
  est.observable_opt = estimate_cmd->add_option(
      "--observable", est.observable,
      "count(X) | count2(X) | indicator(X >= n) | const(v)");
  est.paths_opt = estimate_cmd->add_option("--paths", est.paths, "Number of paths");
  est.target_opt = estimate_cmd->add_option(
      "--target-halfwidth", est.target_halfwidth,
      "Plan the path count for this 95% CI half-width from a pilot run");
  est.paths_opt->excludes(est.target_opt);
  estimate_cmd->add_option("--pilot-paths", est.pilot_paths, "Pilot run size")
      ->check(CLI::Range(std::uint64_t{2}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  estimate_cmd->add_flag("--plan-only", est.plan_only,
                         "Stop after the pilot run and report the planned path count");
  estimate_cmd->add_flag("--timing", est.timing,
                         "Add a wall_time column (makes the CSV run-dependent)");

  ConvergeFlags conv;
  auto* converge = app.add_subcommand("converge", "Weak-error sweep over step sizes");
  add_network_arg(converge, conv.run);
  add_scheme_options(converge, conv.run);
  add_run_options(converge, conv.run);
  conv.observable_opt = converge->add_option(
      "--observable", conv.observable,
      "count(X) | count2(X) | indicator(X >= n) | const(v)");
  converge->add_option("--methods", conv.methods, "Comma-separated methods")
      ->capture_default_str();
  converge->add_option("--h-grid", conv.h_grid,
                       "Comma list of step sizes or a range b^p:b^q")
      ->capture_default_str();
  conv.paths_opt = converge->add_option(
      "--paths", conv.paths, "Paths per point: one count or one per h");
  conv.paths_opt->capture_default_str();
  converge->add_option("--reference", conv.reference,
                       "oracle | exact | file:<path> (value[,ci_halfwidth])")
      ->capture_default_str();
  converge->add_option("--reference-paths", conv.reference_paths,
                       "Paths for --reference exact (default: largest --paths)");
  conv.split_opt = converge->add_option(
      "--window-split", conv.window_split,
      "Also fit h >= split and h < split separately (order crossover)");
  converge->add_option("--summary", conv.summary,
                       "Slope summary CSV (default: <out stem>_summary.csv, "
                       "stderr without --out)");

  MomentFlags mom;
  auto* moments = app.add_subcommand("moments", "Exact means and second moments "
                                                "of a first-order network");
  add_network_arg(moments, mom.run);
  mom.run.T_opt = moments->add_option("--T", mom.run.T, "Final time");
  moments->add_option("--dt", mom.dt, "RK4 step (default T/10^4)");
  moments->add_option("--points", mom.points, "Equally spaced output times in (0, T]")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  moments->add_option("--out", mom.run.out,
                      "Output CSV (default stdout); also writes <out>.manifest.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  std::vector<std::string> args(argv, argv + argc);
  auto execute = [&](const std::string& command, const std::string& out_path,
                     const std::function<void(RunManifest&)>& body) {
    RunManifest manifest(command, args);
    int code = kSuccess;
    try {
      body(manifest);
    } catch (const std::exception& e) {
      code = classify(e);
      manifest.fail(e.what(), code);
      err << "error: " << e.what() << '\n';
    }
    if (!out_path.empty()) {
      try {
        manifest.write(out_path + ".manifest.json");
      } catch (const std::exception& e) {
        err << "error: writing manifest: " << e.what() << '\n';
        if (code == kSuccess) code = kRuntimeFailure;
      }
    }
    return code;
  };

  if (simulate->parsed()) {
    return execute("simulate", sim.run.out,
                   [&](RunManifest& m) { cmd_simulate(sim, m, out, err); });
  }
  if (estimate_cmd->parsed()) {
    return execute("estimate", est.run.out,
                   [&](RunManifest& m) { cmd_estimate(est, m, out, err); });
  }
  if (converge->parsed()) {
    return execute("converge", conv.run.out,
                   [&](RunManifest& m) { cmd_converge(conv, m, out, err); });
  }
  return execute("moments", mom.run.out,
                 [&](RunManifest& m) { cmd_moments(mom, m, out, err); });
}

}  // namespace crnsim::cli
