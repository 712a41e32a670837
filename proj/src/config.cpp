#include "dreamespase/config.hpp"

#include <fstream>
#include <set>

#include "dreamespase/errors.hpp"

namespace dreamespase::config {

namespace {

/// Typed, path-aware access to one JSON object. finish() rejects any key
/// that was never read.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_ + ": expected a JSON object");
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void get(const std::string& key, double& out) {
    if (const auto* v = find(key)) out = number(*v, at(key));
  }

  void get(const std::string& key, int& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer()) throw ValidationError(at(key) + ": expected an integer");
      const auto x = v->get<long long>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ValidationError(at(key) + ": integer out of range");
      }
      out = static_cast<int>(x);
    }
  }

  void get(const std::string& key, std::uint64_t& out) {
    if (const auto* v = find(key)) out = seed(*v, at(key));
  }

  void get(const std::string& key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) throw ValidationError(at(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }

  void get(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) throw ValidationError(at(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void get(const std::string& key, std::optional<double>& out) {
    if (const auto* v = find(key)) out = number(*v, at(key));
  }

  void get(const std::string& key, std::vector<double>& out) {
    if (const auto* v = find(key)) out = numbers(*v, at(key), 0);
  }

  void get(const std::string& key, sim::Range& out) {
    if (const auto* v = find(key)) {
      const auto x = numbers(*v, at(key), 2);
      out = {x[0], x[1]};
    }
  }

  void get(const std::string& key, std::array<double, 3>& out) {
    if (const auto* v = find(key)) {
      const auto x = numbers(*v, at(key), 3);
      std::copy(x.begin(), x.end(), out.begin());
    }
  }

  void get(const std::string& key, std::array<sim::Range, 3>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array() || v->size() != 3) throw ValidationError(at(key) + ": expected three [lo, hi] pairs");
      for (std::size_t k = 0; k < 3; ++k) {
        const auto x = numbers((*v)[k], at(key) + "[" + std::to_string(k) + "]", 2);
        out[k] = {x[0], x[1]};
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ValidationError(at(key) + ": unknown key");
    }
  }

  static double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ValidationError(where + ": expected a number");
    return v.get<double>();
  }

  static std::vector<double> numbers(const json& v, const std::string& where, std::size_t size) {
    if (!v.is_array() || (size > 0 && v.size() != size)) {
      throw ValidationError(where + ": expected an array" +
                            (size > 0 ? " of " + std::to_string(size) + " numbers" : std::string(" of numbers")));
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], where + "[" + std::to_string(k) + "]"));
    return out;
  }

  static std::uint64_t seed(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) throw ValidationError(where + ": must be non-negative");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ValidationError(where + ": expected a non-negative integer");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

gibbs::RhoGrid parse_rho_grid(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return gibbs::RhoGrid::parse(v.get<std::string>());
    } catch (const ValidationError& e) {
      const std::string m = e.what();
      throw ValidationError(where + m.substr(m.find(':')));
    }
  }
  Reader r(v, where);
  gibbs::RhoGrid grid;
  r.get("values", grid.values);
  r.get("probs", grid.probs);
  r.finish();
  if (grid.probs.empty() && !grid.values.empty()) {
    grid.probs.assign(grid.values.size(), 1.0 / static_cast<double>(grid.values.size()));
  }
  return grid;
}

void read_prior_schedule(Reader& r, gibbs::PriorConfig& prior, gibbs::Schedule& schedule) {
  r.get("iterations", schedule.iterations);
  r.get("burn_in", schedule.burn_in);
  r.get("thin", schedule.thin);
  r.get("phi", prior.phi);
  if (const auto* v = r.find("rho_grid")) prior.rho_grid = parse_rho_grid(*v, r.at("rho_grid"));
  r.get("sigma2_spike", prior.sigma2_spike);
  r.get("sigma2_slab", prior.sigma2_slab);
  r.get("xi2_spike", prior.xi2_spike);
  r.get("xi2_slab", prior.xi2_slab);
  r.get("a_tau", prior.a_tau);
  r.get("b_tau", prior.b_tau);
  r.get("a_nu", prior.a_nu);
  r.get("b_nu", prior.b_nu);
  r.get("beta_gamma_a", prior.beta_gamma_a);
  r.get("beta_gamma_b", prior.beta_gamma_b);
  r.get("beta_d_a", prior.beta_d_a);
  r.get("beta_d_b", prior.beta_d_b);
}

void write_prior_schedule(json& j, const gibbs::PriorConfig& prior, const gibbs::Schedule& schedule) {
  j["iterations"] = schedule.iterations;
  j["burn_in"] = schedule.burn_in;
  j["thin"] = schedule.thin;
  j["phi"] = prior.phi;
  j["rho_grid"] = {{"values", prior.rho_grid.values}, {"probs", prior.rho_grid.probs}};
  j["sigma2_spike"] = prior.sigma2_spike;
  j["sigma2_slab"] = prior.sigma2_slab;
  j["xi2_spike"] = prior.xi2_spike;
  j["xi2_slab"] = prior.xi2_slab;
  j["a_tau"] = prior.a_tau;
  j["b_tau"] = prior.b_tau;
  j["a_nu"] = prior.a_nu;
  j["b_nu"] = prior.b_nu;
  j["beta_gamma_a"] = prior.beta_gamma_a;
  j["beta_gamma_b"] = prior.beta_gamma_b;
  j["beta_d_a"] = prior.beta_d_a;
  j["beta_d_b"] = prior.beta_d_b;
}

// Re-raises component validation errors under the config path.
template <class F>
void checked(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    throw ValidationError(path + "." + e.what());
  }
}

json range_json(const sim::Range& r) { return json::array({r.lo, r.hi}); }

}  // namespace

FitConfig parse_fit(const json& j) {
  Reader r(j, "config");
  FitConfig c;
  read_prior_schedule(r, c.prior, c.schedule);
  r.get("seed", c.schedule.seed);
  std::string variant = to_string(c.variant);
  r.get("variant", variant);
  checked("config", [&] { c.variant = gibbs::parse_variant(variant); });
  r.get("standardize", c.standardize);
  r.get("threshold", c.threshold);
  r.finish();
  checked("config", [&] { c.prior.validate(); });
  checked("config", [&] { c.schedule.validate(); });
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ValidationError("config.threshold: must lie in (0, 1)");
  return c;
}

json to_json(const FitConfig& c) {
  json j;
  write_prior_schedule(j, c.prior, c.schedule);
  j["seed"] = c.schedule.seed;
  j["variant"] = to_string(c.variant);
  j["standardize"] = c.standardize;
  j["threshold"] = c.threshold;
  return j;
}

HsmFitConfig parse_hsm_fit(const json& j) {
  Reader r(j, "config");
  HsmFitConfig c;
  auto& p = c.partition;
  r.get("rows", p.rows);
  r.get("cols", p.cols);
  r.get("R", p.R);
  r.get("min_points", p.min_points);
  r.get("drop_isolated", p.drop_isolated);
  r.get("iterations", p.mh.iterations);
  r.get("burn_in", p.mh.burn_in);
  r.get("step", p.mh.step);
  r.get("quadrature_resolution", p.mh.quadrature_resolution);
  r.get("seed", p.mh.seed);
  std::array<double, 3> mean{p.prior[0].mean, p.prior[1].mean, p.prior[2].mean};
  std::array<double, 3> sd{p.prior[0].sd, p.prior[1].sd, p.prior[2].sd};
  r.get("prior_mean", mean);
  r.get("prior_sd", sd);
  r.finish();
  for (int k = 0; k < 3; ++k) p.prior[k] = {mean[k], sd[k]};
  if (p.rows < 1 || p.cols < 1) throw ValidationError("config.rows/cols: grid must be at least 1 x 1");
  if (!(p.R > 0.0)) throw ValidationError("config.R: must be positive");
  if (p.min_points < 0) throw ValidationError("config.min_points: must be non-negative");
  if (p.mh.burn_in < 0 || p.mh.iterations <= p.mh.burn_in) {
    throw ValidationError("config.iterations: must exceed burn_in (and burn_in must be non-negative)");
  }
  for (int k = 0; k < 3; ++k) {
    if (!(sd[k] > 0.0)) throw ValidationError("config.prior_sd[" + std::to_string(k) + "]: must be positive");
    if (!(p.mh.step[k] > 0.0)) throw ValidationError("config.step[" + std::to_string(k) + "]: must be positive");
  }
  if (p.mh.quadrature_resolution < 2) throw ValidationError("config.quadrature_resolution: must be at least 2");
  return c;
}

json to_json(const HsmFitConfig& c) {
  const auto& p = c.partition;
  json j;
  j["rows"] = p.rows;
  j["cols"] = p.cols;
  j["R"] = p.R;
  j["min_points"] = p.min_points;
  j["drop_isolated"] = p.drop_isolated;
  j["iterations"] = p.mh.iterations;
  j["burn_in"] = p.mh.burn_in;
  j["step"] = p.mh.step;
  j["quadrature_resolution"] = p.mh.quadrature_resolution;
  j["seed"] = p.mh.seed;
  j["prior_mean"] = {p.prior[0].mean, p.prior[1].mean, p.prior[2].mean};
  j["prior_sd"] = {p.prior[0].sd, p.prior[1].sd, p.prior[2].sd};
  return j;
}

sim::SimSetting parse_setting(const json& j, const std::string& path) {
  Reader r(j, path);
  sim::SimSetting s;
  if (const auto* v = r.find("ratio")) {
    const double ratio = Reader::number(*v, r.at("ratio"));
    checked(path, [&] { s = sim::SimSetting::for_ratio(ratio); });
  }
  r.get("n_biopsies", s.n_biopsies);
  r.get("p", s.p);
  r.get("rows", s.rows);
  r.get("cols", s.cols);
  r.get("fixed_per_size", s.fixed_per_size);
  r.get("random_per_size", s.random_per_size);
  r.get("fixed_ranges", s.fixed_ranges);
  r.get("random_ranges", s.random_ranges);
  r.get("rho", s.rho);
  r.get("snr_fixed_window", s.snr_fixed_window);
  r.get("snr_random_window", s.snr_random_window);
  r.get("tau2", s.tau2);
  r.get("nu2", s.nu2);
  r.get("seed", s.seed);
  r.finish();
  checked(path, [&] { s.validate(); });
  return s;
}

json to_json(const sim::SimSetting& s) {
  json j;
  j["n_biopsies"] = s.n_biopsies;
  j["p"] = s.p;
  j["rows"] = s.rows;
  j["cols"] = s.cols;
  j["fixed_per_size"] = s.fixed_per_size;
  j["random_per_size"] = s.random_per_size;
  j["fixed_ranges"] = json::array();
  j["random_ranges"] = json::array();
  for (int k = 0; k < 3; ++k) {
    j["fixed_ranges"].push_back(range_json(s.fixed_ranges[k]));
    j["random_ranges"].push_back(range_json(s.random_ranges[k]));
  }
  j["rho"] = s.rho;
  j["snr_fixed_window"] = range_json(s.snr_fixed_window);
  j["snr_random_window"] = range_json(s.snr_random_window);
  j["tau2"] = s.tau2 ? json(*s.tau2) : json(nullptr);
  j["nu2"] = s.nu2 ? json(*s.nu2) : json(nullptr);
  j["seed"] = s.seed;
  return j;
}

sim::BenchmarkConfig parse_benchmark(const json& j) {
  Reader r(j, "config");
  sim::BenchmarkConfig c;
  if (const auto* v = r.find("setting")) c.setting = parse_setting(*v, r.at("setting"));
  r.get("replicates", c.replicates);
  if (const auto* v = r.find("methods")) {
    if (!v->is_array() || v->empty()) throw ValidationError(r.at("methods") + ": expected a non-empty array");
    c.methods.clear();
    for (std::size_t k = 0; k < v->size(); ++k) {
      const auto& m = (*v)[k];
      const auto where = r.at("methods") + "[" + std::to_string(k) + "]";
      if (!m.is_string()) throw ValidationError(where + ": expected a string");
      checked(where, [&] { c.methods.push_back(sim::parse_method(m.get<std::string>())); });
    }
    std::set<sim::Method> unique(c.methods.begin(), c.methods.end());
    if (unique.size() != c.methods.size()) throw ValidationError(r.at("methods") + ": duplicate method");
  }
  if (const auto* v = r.find("fit")) {
    Reader f(*v, r.at("fit"));
    read_prior_schedule(f, c.prior, c.schedule);
    f.finish();
  }
  r.get("threshold", c.threshold);
  r.get("auc_fprs", c.auc_fprs);
  r.get("seed", c.seed);
  r.finish();
  if (c.replicates < 1) throw ValidationError("config.replicates: must be at least 1");
  checked("config.fit", [&] { c.prior.validate(); });
  checked("config.fit", [&] { c.schedule.validate(); });
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ValidationError("config.threshold: must lie in (0, 1)");
  for (double f : c.auc_fprs) {
    if (!(f > 0.0 && f <= 1.0)) throw ValidationError("config.auc_fprs: values must lie in (0, 1]");
  }
  return c;
}

json to_json(const sim::BenchmarkConfig& c) {
  json j;
  j["setting"] = to_json(c.setting);
  j["replicates"] = c.replicates;
  j["methods"] = json::array();
  for (auto m : c.methods) j["methods"].push_back(sim::to_string(m));
  json fit;
  write_prior_schedule(fit, c.prior, c.schedule);
  j["fit"] = fit;
  j["threshold"] = c.threshold;
  j["auc_fprs"] = c.auc_fprs;
  j["seed"] = c.seed;
  return j;
}

PreprocessConfig parse_preprocess(const json& j) {
  Reader r(j, "config");
  PreprocessConfig c;
  r.get("threshold", c.threshold);
  r.finish();
  if (!(c.threshold > -1.0 && c.threshold < 1.0)) throw ValidationError("config.threshold: must lie in (-1, 1)");
  return c;
}

json to_json(const PreprocessConfig& c) { return {{"threshold", c.threshold}}; }

DiagnoseConfig parse_diagnose(const json& j) {
  Reader r(j, "config");
  DiagnoseConfig c;
  r.get("column", c.column);
  r.get("first", c.first);
  r.get("last", c.last);
  r.finish();
  if (!(c.first > 0.0 && c.last > 0.0 && c.first + c.last <= 1.0)) {
    throw ValidationError("config.first/last: fractions must be positive and sum to at most 1");
  }
  return c;
}

json to_json(const DiagnoseConfig& c) { return {{"column", c.column}, {"first", c.first}, {"last", c.last}}; }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
}

}  // namespace dreamespase::config
