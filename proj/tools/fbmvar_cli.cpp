// fbmvar: sigma constants, path simulation and the acceptance checks.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fbmvar/acceptance.hpp"
#include "fbmvar/error.hpp"
#include "fbmvar/fbmbt_engine.hpp"
#include "fbmvar/harness.hpp"
#include "fbmvar/variation_stats.hpp"

namespace fs = std::filesystem;
using fbmvar::Json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<double> h{0.25};
  std::vector<int> r{2};
  int n = 10;
  int m = 2;
  double t = 1.0;
  std::string f = "one";
  std::size_t replicates = 0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  std::string dump_paths;
  std::string dump_series;
  std::string dump_walk;
  double tol = 1e-10;
  bool verbose = false;
  std::string config;
  std::string target;  // verify suite
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"h",    "r",         "n",          "m",         "t",
                                          "f",    "replicates", "seed",      "threads",   "out",
                                          "dump-paths", "dump-series", "dump-walk", "tol", "verbose"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat "key = value" lines; '#' starts a comment. Keys are flag names
// without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    out.emplace_back(key, value);
  }
  return out;
}

// Appends file values for every flag not given on the command line, so
// flags always win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos
                                                            ? std::string::npos
                                                            : a.find('=') - 2));
  }
  for (const auto& [key, value] : read_config(path)) {
    if (given.count(key)) continue;
    if (key == "verbose") {
      if (value == "true" || value == "1") args.push_back("--verbose");
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

// Shortest text that round-trips to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json effective_config(const std::string& command, const Options& o) {
  Json j;
  j["version"] = fbmvar::artifact_version();
  j["command"] = command;
  j["h"] = o.h;
  j["r"] = o.r;
  j["n"] = o.n;
  j["m"] = o.m;
  j["t"] = o.t;
  j["f"] = o.f;
  j["replicates"] = o.replicates;
  j["seed"] = o.seed;
  j["tol"] = o.tol;
  if (!o.target.empty()) j["target"] = o.target;
  return j;
}

std::ofstream open_csv(const std::string& dir, const std::string& name, const Json& config) {
  fs::create_directories(dir);
  const fs::path p = fs::path(dir) / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << "# " << config.dump() << '\n';
  return out;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  const fs::path p(o.out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + o.out);
  out << text;
}

double single(const std::vector<double>& v, const char* name) {
  if (v.size() != 1) throw UsageError(std::string("--") + name + " takes one value here");
  return v.front();
}

int single(const std::vector<int>& v, const char* name) {
  if (v.size() != 1) throw UsageError(std::string("--") + name + " takes one value here");
  return v.front();
}

// ------------------------------------------------------------------ sigma

int cmd_sigma(const Options& o) {
  std::ostringstream os;
  os << "# " << effective_config("sigma", o).dump() << '\n';
  os << "r,h,sigma_r,sigma_r_sq,tail_bound,terms\n";
  fbmvar::SigmaOptions opts;
  opts.tol = o.tol;
  for (int r : o.r) {
    for (double h : o.h) {
      const auto s = fbmvar::sigma_r(r, fbmvar::HurstParam(h), opts);
      os << r << ',' << fmt(h) << ',' << fmt(s.value) << ',' << fmt(s.value_sq) << ','
         << fmt(s.tail_bound) << ',' << s.terms << '\n';
      if (o.verbose) {
        os << "# lag,rho,moment\n";
        for (const auto& term : fbmvar::sigma_r_terms(r, fbmvar::HurstParam(h), 16)) {
          os << "# " << term.lag << ',' << fmt(term.rho) << ',' << fmt(term.moment) << '\n';
        }
      }
    }
  }
  emit(o, os.str());
  return kExitPass;
}

// --------------------------------------------------------------- simulate

int cmd_simulate_fbm(const Options& o) {
  const double h = single(o.h, "h");
  const int r = single(o.r, "r");
  const Json config = effective_config("simulate fbm", o);
  const auto grid = fbmvar::GridSpec::dyadic(o.n, 0.0, o.t);
  const fbmvar::WeightFunction f = fbmvar::weight_from_registry(o.f);
  const fbmvar::SeedSpec seed{o.seed, 0};
  const fbmvar::FbmPath path =
      fbmvar::sample_fbm(fbmvar::HurstParam(h), grid, seed.for_role(fbmvar::role::path));
  const auto phi = fbmvar::midpoint_variation(path, f, r);
  const auto psi = fbmvar::trapezoidal_variation(path, f, r);

  Json j;
  j["config"] = config;
  j["points"] = grid.point_count();
  j["x_t"] = path.values.back();
  j["phi_t"] = phi.back();
  j["psi_t"] = psi.back();
  emit(o, j.dump(2) + "\n");

  if (!o.dump_paths.empty()) {
    auto csv = open_csv(o.dump_paths, "fbm_path.csv", config);
    csv << "k,t,x\n";
    for (std::int64_t k = grid.k_min(); k <= grid.k_max(); ++k) {
      csv << k << ',' << fmt(grid.time(k)) << ',' << fmt(path.at_index(k)) << '\n';
    }
  }
  if (!o.dump_series.empty()) {
    auto csv = open_csv(o.dump_series, "series.csv", config);
    csv << "k,t,phi,psi\n";
    for (std::size_t k = 0; k < phi.size(); ++k) {
      csv << k << ',' << fmt(phi.times[k]) << ',' << fmt(phi.values[k]) << ','
          << fmt(psi.values[k]) << '\n';
    }
  }
  return kExitPass;
}

int cmd_simulate_fbmbt(const Options& o) {
  const double h = single(o.h, "h");
  const int r = single(o.r, "r");
  const Json config = effective_config("simulate fbmbt", o);
  const fbmvar::WeightFunction f = fbmvar::weight_from_registry(o.f);
  const auto sample = fbmvar::sample_fbmbt(fbmvar::HurstParam(h), o.n, o.t, {o.seed, 0});
  const double v = fbmvar::vn_direct(sample, f, r, o.t);
  const double vc = fbmvar::vn_crossing(sample, f, r, o.t);
  const std::int64_t js = fbmvar::jstar(sample.walk, o.t);
  const double w = fbmvar::wn_index(sample.path, f, r, o.n, js);
  const double mnv = fbmvar::mn_index(sample.path, f, r, o.n, js);
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
  };
  const double residual = std::max(rel(v, vc), rel(v, w));

  Json j;
  j["config"] = config;
  j["steps"] = sample.walk.length();
  j["jstar"] = js;
  j["v_n"] = v;
  j["v_n_crossing"] = vc;
  j["w_n"] = w;
  j["m_n"] = mnv;
  j["identity_residual"] = residual;
  j["identity_tolerance"] = 1e-9;
  emit(o, j.dump(2) + "\n");

  if (!o.dump_walk.empty()) {
    auto csv = open_csv(o.dump_walk, "walk.csv", config);
    csv << "k,S_k,Z_k\n";
    for (std::size_t k = 0; k < sample.walk.s.size(); ++k) {
      csv << k << ',' << sample.walk.s[k] << ',' << fmt(sample.z[k]) << '\n';
    }
  }
  return residual <= 1e-9 ? kExitPass : kExitFail;
}

// ----------------------------------------------------------------- verify

int cmd_verify(const Options& o, bool replicates_given, bool n_given) {
  namespace acc = fbmvar::acceptance;
  std::vector<std::string> ids;
  if (o.target == "all") {
    ids = acc::criterion_ids();
  } else if (acc::is_criterion(o.target)) {
    ids = {o.target};
  } else {
    throw UsageError("unknown suite '" + o.target + "' (expected A1..A10 or all)");
  }
  acc::SuiteConfig suite;
  suite.base_seed = o.seed;
  suite.threads = o.threads;
  if (replicates_given) suite.replicates = o.replicates;
  if (n_given) suite.level = o.n;

  Json config = effective_config("verify", o);
  config["suite"] = suite.to_json();
  std::cout << "# " << config.dump() << '\n';
  bool all_pass = true;
  for (const auto& id : ids) {
    const auto result = acc::run_criterion(id, suite);
    std::cout << result.summary() << '\n';
    if (o.verbose) {
      for (const auto& a : result.attempts) {
        for (const auto& c : a.report.checks) {
          std::cout << "    seed " << a.seed << "  " << c.name << " = " << fmt(c.value) << ' '
                    << c.relation << ' ' << fmt(c.threshold) << (c.pass ? "  ok" : "  FAILED")
                    << '\n';
        }
      }
    }
    if (!o.out.empty()) {
      fs::create_directories(o.out);
      std::ofstream out(fs::path(o.out) / (id + ".json"), std::ios::binary);
      Json doc = result.to_json();
      doc["config"] = config;
      out << doc.dump(2) << '\n';
    }
    all_pass = all_pass && result.passed;
  }
  std::cout.flush();
  return all_pass ? kExitPass : kExitFail;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--h", o.h, "Hurst parameter(s)")->delimiter(',');
  app->add_option("--r", o.r, "odd power index r (power 2r-1)")->delimiter(',');
  app->add_option("--n", o.n, "dyadic level n");
  app->add_option("--m", o.m, "coarse level m");
  app->add_option("--t", o.t, "time horizon");
  app->add_option("--f", o.f, "weight function id: " + [] {
    std::string ids;
    for (const auto& id : fbmvar::weight_registry_ids()) ids += (ids.empty() ? "" : ", ") + id;
    return ids;
  }());
  app->add_option("--replicates", o.replicates, "replicate count");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  app->add_option("--out", o.out, "output file (verify: directory)");
  app->add_option("--dump-paths", o.dump_paths, "directory for path CSV");
  app->add_option("--dump-series", o.dump_series, "directory for variation series CSV");
  app->add_option("--dump-walk", o.dump_walk, "directory for walk CSV");
  app->add_option("--tol", o.tol, "series tolerance");
  app->add_flag("--verbose", o.verbose, "print intermediate values");
  app->add_option("--config", o.config, "flat key = value file; flags override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted power variations of fractional Brownian motion"};
  // --h is the Hurst parameter, so help is long-form only.
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  Options o;

  auto* sigma = app.add_subcommand("sigma", "print sigma_r(H)");
  add_common(sigma, o);
  auto* simulate = app.add_subcommand("simulate", "simulate a path and its statistics");
  simulate->require_subcommand(1);
  auto* sim_fbm = simulate->add_subcommand("fbm", "fBm path and variation series");
  add_common(sim_fbm, o);
  auto* sim_bt = simulate->add_subcommand("fbmbt", "fBm in Brownian time");
  add_common(sim_bt, o);
  auto* verify = app.add_subcommand("verify", "run acceptance checks");
  add_common(verify, o);
  verify->add_option("suite", o.target, "A1..A10 or all")->required();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (sigma->parsed()) return cmd_sigma(o);
    if (sim_fbm->parsed()) return cmd_simulate_fbm(o);
    if (sim_bt->parsed()) return cmd_simulate_fbmbt(o);
    if (verify->parsed()) {
      return cmd_verify(o, verify->count("--replicates") > 0 || o.replicates > 0,
                        verify->count("--n") > 0);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fbmvar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
