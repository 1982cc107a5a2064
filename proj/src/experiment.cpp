#include "irk/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "irk/fixture_io.hpp"
#include "irk/json_locations.hpp"

namespace irk {

using Json = nlohmann::ordered_json;

namespace {

std::string join_messages(const std::string& source, const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    if (i > 0) os << '\n';
    os << source;
    if (diags[i].line > 0) os << ':' << diags[i].line;
    os << ": " << (diags[i].path.empty() ? "/" : diags[i].path) << ": " << diags[i].message;
  }
  return os.str();
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ", ";
    out += names[i];
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ProblemDefaults {
  double restart_tol;
  Index max_basis_vectors;
};

ProblemDefaults defaults_for(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::spectra_1d: return {0.0, 0};
    case ProblemKind::blur_2d: return {0.1, 30};
    case ProblemKind::ct: return {0.1, 20};
  }
  return {0.1, 0};
}

ProblemParams problem_defaults(ProblemKind kind) {
  ProblemParams p;
  p.kind = kind;
  switch (kind) {
    case ProblemKind::spectra_1d:
      p.n = 64;
      p.noise_level = 0.01;
      break;
    case ProblemKind::blur_2d:
      p.nx = 64;
      p.noise_level = 0.5;
      break;
    case ProblemKind::ct:
      p.nx = 64;
      p.noise_level = 0.5;
      p.n_angles = 90;
      break;
  }
  return p;
}

const char* boundary_name(Boundary b) { return b == Boundary::zero ? "zero" : "reflexive"; }
const char* reg_name(RegKind k) {
  return k == RegKind::identity ? "identity" : "first_difference";
}
const char* projector_name(CorrectionProjector p) {
  return p == CorrectionProjector::image ? "image" : "solution";
}

class Validator {
 public:
  Validator(std::string_view text) : lines_(json_value_lines(text)) {}

  void error(const std::string& path, const std::string& message) {
    diags_.push_back({path, line_for(path), message});
  }

  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

  void check_keys(const Json& obj, const std::string& path,
                  const std::vector<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) != allowed.end()) continue;
      std::string msg = "unknown key '" + it.key() + "'";
      std::string best;
      std::size_t best_d = 4;
      for (const auto& a : allowed) {
        const std::size_t d = edit_distance(it.key(), a);
        if (d < best_d) {
          best_d = d;
          best = a;
        }
      }
      if (!best.empty()) {
        msg += "; did you mean '" + best + "'?";
      } else {
        msg += "; allowed keys: " + join_names(allowed);
      }
      error(path + "/" + json_pointer_escape(it.key()), msg);
    }
  }

  double number(const Json& obj, const std::string& key, const std::string& path, double def,
                double lo, double hi, bool lo_open = false, bool hi_open = false) {
    if (!obj.contains(key)) return def;
    const std::string p = path + "/" + key;
    const Json& v = obj.at(key);
    if (!v.is_number()) {
      error(p, "expected a number");
      return def;
    }
    const double x = v.get<double>();
    const bool below = lo_open ? !(x > lo) : !(x >= lo);
    const bool above = hi_open ? !(x < hi) : !(x <= hi);
    if (below || above) {
      std::ostringstream os;
      os << "value " << format_number(x) << " out of range " << (lo_open ? '(' : '[')
         << format_number(lo) << ", " << format_number(hi) << (hi_open ? ')' : ']');
      error(p, os.str());
      return def;
    }
    return x;
  }

  Index integer(const Json& obj, const std::string& key, const std::string& path, Index def,
                Index lo, Index hi) {
    if (!obj.contains(key)) return def;
    const std::string p = path + "/" + key;
    const Json& v = obj.at(key);
    if (!v.is_number_integer()) {
      error(p, "expected an integer");
      return def;
    }
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi) {
      error(p, "value " + std::to_string(x) + " out of range [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "]");
      return def;
    }
    return static_cast<Index>(x);
  }

  bool boolean(const Json& obj, const std::string& key, const std::string& path, bool def) {
    if (!obj.contains(key)) return def;
    const Json& v = obj.at(key);
    if (!v.is_boolean()) {
      error(path + "/" + key, "expected true or false");
      return def;
    }
    return v.get<bool>();
  }

  std::optional<std::string> choice(const Json& obj, const std::string& key,
                                    const std::string& path,
                                    const std::vector<std::string>& options) {
    if (!obj.contains(key)) return std::nullopt;
    const Json& v = obj.at(key);
    const std::string p = path + "/" + key;
    if (!v.is_string()) {
      error(p, "expected one of: " + join_names(options));
      return std::nullopt;
    }
    const auto s = v.get<std::string>();
    if (std::find(options.begin(), options.end(), s) == options.end()) {
      error(p, "unknown value '" + s + "'; expected one of: " + join_names(options));
      return std::nullopt;
    }
    return s;
  }

 private:
  int line_for(std::string path) const {
    while (true) {
      const auto it = lines_.find(path);
      if (it != lines_.end()) return it->second;
      if (path.empty()) return 0;
      path.erase(path.rfind('/'));
    }
  }

  std::map<std::string, int> lines_;
  std::vector<Diagnostic> diags_;
};

ProblemParams parse_problem(const Json& root, Validator& v, bool* ok) {
  *ok = false;
  if (!root.contains("problem")) {
    v.error("", "missing required key 'problem'");
    return {};
  }
  const Json& obj = root.at("problem");
  const std::string path = "/problem";
  if (!obj.is_object()) {
    v.error(path, "expected an object");
    return {};
  }
  const auto kind_name = v.choice(obj, "kind", path, {"spectra_1d", "blur_2d", "ct"});
  if (!kind_name) {
    if (!obj.contains("kind")) v.error(path, "missing required key 'kind'");
    return {};
  }
  const ProblemKind kind = *kind_name == "spectra_1d" ? ProblemKind::spectra_1d
                           : *kind_name == "blur_2d"  ? ProblemKind::blur_2d
                                                      : ProblemKind::ct;
  ProblemParams p = problem_defaults(kind);
  std::vector<std::string> allowed{"kind", "noise_level", "regularization"};
  p.noise_level = v.number(obj, "noise_level", path, p.noise_level, 0.0, 10.0);
  if (auto reg = v.choice(obj, "regularization", path, {"identity", "first_difference"})) {
    p.regularization = *reg == "identity" ? RegKind::identity : RegKind::first_difference;
  }
  switch (kind) {
    case ProblemKind::spectra_1d:
      allowed.push_back("n");
      p.n = v.integer(obj, "n", path, p.n, 16, 1 << 20);
      break;
    case ProblemKind::blur_2d:
      allowed.insert(allowed.end(), {"nx", "psf_sigma", "boundary", "density"});
      p.nx = v.integer(obj, "nx", path, p.nx, 4, 4096);
      p.psf_sigma = v.number(obj, "psf_sigma", path, p.psf_sigma, 0.0, 1e3, true);
      p.density = v.number(obj, "density", path, p.density, 0.0, 1.0, false, true);
      if (auto b = v.choice(obj, "boundary", path, {"zero", "reflexive"})) {
        p.boundary = *b == "zero" ? Boundary::zero : Boundary::reflexive;
      }
      break;
    case ProblemKind::ct:
      allowed.insert(allowed.end(), {"nx", "n_angles", "n_detectors"});
      p.nx = v.integer(obj, "nx", path, p.nx, 16, 4096);
      p.n_angles = v.integer(obj, "n_angles", path, p.n_angles, 2, 100000);
      p.n_detectors = v.integer(obj, "n_detectors", path, p.n_detectors, 0, 1000000);
      break;
  }
  v.check_keys(obj, path, allowed);
  *ok = true;
  return p;
}

std::vector<std::string> method_names() {
  std::vector<std::string> names;
  for (Method m : all_methods()) names.emplace_back(to_string(m));
  return names;
}

SolverConfig parse_solver(const Json& obj, const std::string& path, const ProblemParams& problem,
                          bool have_problem, Validator& v) {
  SolverConfig c;
  if (!obj.is_object()) {
    v.error(path, "expected an object");
    return c;
  }
  v.check_keys(obj, path,
               {"method", "label", "p", "tau_smooth", "lambda_rule", "tau_dp", "restart_tol",
                "max_basis_vectors", "kmax", "outer_tol", "projector", "inner_max",
                "fista_monotone"});
  const ProblemDefaults defaults = defaults_for(problem.kind);
  bool method_ok = false;
  if (!obj.contains("method")) {
    v.error(path, "missing required key 'method'");
  } else if (auto name = v.choice(obj, "method", path, method_names())) {
    c.method = *parse_method(*name);
    method_ok = true;
    if (have_problem && problem.kind == ProblemKind::ct && needs_square_operator(c.method)) {
      v.error(path + "/method", "method '" + *name +
                                    "' needs a square operator, but the ct problem is "
                                    "rectangular; use a Golub-Kahan based method");
    }
  }
  // An unusable method leaves no default label, so it cannot collide.
  c.label = method_ok ? to_string(c.method) : "";
  if (obj.contains("label")) {
    if (obj.at("label").is_string() && !obj.at("label").get<std::string>().empty()) {
      c.label = obj.at("label").get<std::string>();
      const bool safe = std::all_of(c.label.begin(), c.label.end(), [](char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' ||
               ch == '.';
      });
      if (!safe) v.error(path + "/label", "labels may only contain letters, digits, '_', '-', '.'");
    } else {
      v.error(path + "/label", "expected a non-empty string");
    }
  }
  c.p = v.number(obj, "p", path, c.p, 0.0, 2.0, true, false);
  if (obj.contains("tau_smooth")) {
    const Json& t = obj.at("tau_smooth");
    if (t.is_string() && t.get<std::string>() == "auto") {
      c.tau_smooth = 0.0;
    } else {
      c.tau_smooth = v.number(obj, "tau_smooth", path, 0.0, 0.0, 1e300, true);
    }
  }
  if (obj.contains("lambda_rule")) {
    const Json& r = obj.at("lambda_rule");
    const std::string p = path + "/lambda_rule";
    if (r.is_string() && r.get<std::string>() == "discrepancy") {
      c.lambda_rule = LambdaRule::discrepancy();
    } else if (r.is_string() && r.get<std::string>() == "optimal") {
      c.lambda_rule = LambdaRule::optimal();
    } else if (r.is_object() && r.size() == 1 && r.contains("fixed")) {
      const double value = v.number(r, "fixed", p, -1.0, 0.0, 1e300);
      if (value >= 0.0) c.lambda_rule = LambdaRule::fixed(value);
    } else {
      v.error(p, "expected \"discrepancy\", \"optimal\" or {\"fixed\": value}");
    }
  }
  c.tau_dp = v.number(obj, "tau_dp", path, c.tau_dp, 0.0, 1e3, true);
  c.restart_tol = v.number(obj, "restart_tol", path, defaults.restart_tol, 0.0, 1e300);
  c.max_basis_vectors =
      v.integer(obj, "max_basis_vectors", path, defaults.max_basis_vectors, 0, 100000);
  c.kmax = v.integer(obj, "kmax", path, c.kmax, 1, 1000000);
  c.outer_tol = v.number(obj, "outer_tol", path, c.outer_tol, 0.0, 1.0);
  c.inner_max = v.integer(obj, "inner_max", path, c.inner_max, 1, 100000);
  c.fista_monotone = v.boolean(obj, "fista_monotone", path, c.fista_monotone);
  if (auto proj = v.choice(obj, "projector", path, {"image", "solution"})) {
    c.projector = *proj == "image" ? CorrectionProjector::image : CorrectionProjector::solution;
    if (c.projector == CorrectionProjector::solution && have_problem &&
        problem.kind == ProblemKind::ct) {
      v.error(path + "/projector", "the solution projector needs a square operator");
    }
  }
  if (c.method == Method::fista) {
    if (c.lambda_rule.kind != LambdaRuleKind::fixed || !(c.lambda_rule.value > 0.0)) {
      v.error(path + "/lambda_rule", "fista needs {\"fixed\": value} with value > 0");
    }
    if (have_problem && problem.regularization != RegKind::identity) {
      v.error(path + "/method", "fista supports only the identity regularization");
    }
  }
  c.noise_level = problem.noise_level;
  return c;
}

Json solver_to_json(const SolverConfig& c) {
  Json j;
  j["method"] = to_string(c.method);
  j["label"] = c.label;
  j["p"] = c.p;
  if (c.tau_smooth > 0.0) {
    j["tau_smooth"] = c.tau_smooth;
  } else {
    j["tau_smooth"] = "auto";
  }
  switch (c.lambda_rule.kind) {
    case LambdaRuleKind::discrepancy: j["lambda_rule"] = "discrepancy"; break;
    case LambdaRuleKind::optimal: j["lambda_rule"] = "optimal"; break;
    case LambdaRuleKind::fixed: j["lambda_rule"] = Json{{"fixed", c.lambda_rule.value}}; break;
  }
  j["tau_dp"] = c.tau_dp;
  j["restart_tol"] = c.restart_tol;
  j["max_basis_vectors"] = c.max_basis_vectors;
  j["kmax"] = c.kmax;
  j["outer_tol"] = c.outer_tol;
  j["projector"] = projector_name(c.projector);
  j["inner_max"] = c.inner_max;
  j["fista_monotone"] = c.fista_monotone;
  return j;
}

Json problem_to_json(const ProblemParams& p) {
  Json j;
  j["kind"] = to_string(p.kind);
  j["noise_level"] = p.noise_level;
  j["regularization"] = reg_name(p.regularization);
  switch (p.kind) {
    case ProblemKind::spectra_1d:
      j["n"] = p.n;
      break;
    case ProblemKind::blur_2d:
      j["nx"] = p.nx;
      j["psf_sigma"] = p.psf_sigma;
      j["boundary"] = boundary_name(p.boundary);
      j["density"] = p.density;
      break;
    case ProblemKind::ct:
      j["nx"] = p.nx;
      j["n_angles"] = p.n_angles;
      j["n_detectors"] = p.n_detectors;
      break;
  }
  return j;
}

}  // namespace

ConfigError::ConfigError(std::string source, std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_messages(source, diagnostics)),
      source_(std::move(source)),
      diagnostics_(std::move(diagnostics)) {}

ExperimentSpec parse_experiment(std::string_view json_text, const std::string& source) {
  Json root;
  try {
    root = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError(source, {{"", line_of_offset(json_text, e.byte > 0 ? e.byte - 1 : 0),
                                std::string("invalid JSON: ") + e.what()}});
  }
  Validator v(json_text);
  ExperimentSpec spec;
  if (!root.is_object()) {
    v.error("", "the top level must be an object");
    throw ConfigError(source, v.diagnostics());
  }
  v.check_keys(root, "", {"problem", "seeds", "solvers", "output"});
  bool have_problem = false;
  spec.problem = parse_problem(root, v, &have_problem);

  if (root.contains("seeds")) {
    const Json& s = root.at("seeds");
    if (!s.is_array() || s.empty()) {
      v.error("/seeds", "expected a non-empty array of non-negative integers");
    } else {
      spec.seeds.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_number_unsigned()) {
          v.error("/seeds/" + std::to_string(i), "expected a non-negative integer");
          continue;
        }
        spec.seeds.push_back(s[i].get<std::uint64_t>());
      }
    }
  }

  if (!root.contains("solvers")) {
    v.error("", "missing required key 'solvers'");
  } else if (!root.at("solvers").is_array() || root.at("solvers").empty()) {
    v.error("/solvers", "expected a non-empty array of solver objects");
  } else {
    const Json& arr = root.at("solvers");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "/solvers/" + std::to_string(i);
      spec.solvers.push_back(parse_solver(arr[i], path, spec.problem, have_problem, v));
      for (std::size_t j = 0; j + 1 < spec.solvers.size(); ++j) {
        if (!spec.solvers.back().label.empty() &&
            spec.solvers[j].label == spec.solvers.back().label) {
          v.error(path, "duplicate label '" + spec.solvers.back().label +
                            "'; give each solver a distinct 'label'");
          break;
        }
      }
    }
  }

  if (root.contains("output")) {
    const Json& o = root.at("output");
    if (!o.is_object()) {
      v.error("/output", "expected an object");
    } else {
      v.check_keys(o, "/output",
                   {"dir", "history_csv", "reconstruction_pgm", "reconstruction_raw",
                    "summary_table"});
      if (o.contains("dir")) {
        if (o.at("dir").is_string() && !o.at("dir").get<std::string>().empty()) {
          spec.output_dir = o.at("dir").get<std::string>();
        } else {
          v.error("/output/dir", "expected a non-empty string");
        }
      }
      spec.output.history_csv = v.boolean(o, "history_csv", "/output", true);
      spec.output.reconstruction_pgm = v.boolean(o, "reconstruction_pgm", "/output", true);
      spec.output.reconstruction_raw = v.boolean(o, "reconstruction_raw", "/output", true);
      spec.output.summary_table = v.boolean(o, "summary_table", "/output", true);
    }
  }
  if (!v.diagnostics().empty()) throw ConfigError(source, v.diagnostics());
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), {{"", 0, "cannot read file"}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str(), path.string());
}

std::string effective_config_json(const ExperimentSpec& spec) {
  Json j;
  j["problem"] = problem_to_json(spec.problem);
  j["seeds"] = spec.seeds;
  Json solvers = Json::array();
  for (const auto& s : spec.solvers) solvers.push_back(solver_to_json(s));
  j["solvers"] = solvers;
  j["output"] = {{"dir", spec.output_dir.string()},
                 {"history_csv", spec.output.history_csv},
                 {"reconstruction_pgm", spec.output.reconstruction_pgm},
                 {"reconstruction_raw", spec.output.reconstruction_raw},
                 {"summary_table", spec.output.summary_table}};
  return j.dump(2) + "\n";
}

std::string describe_problems() {
  std::ostringstream os;
  for (ProblemKind kind : {ProblemKind::spectra_1d, ProblemKind::blur_2d, ProblemKind::ct}) {
    const ProblemParams p = problem_defaults(kind);
    const ProblemDefaults d = defaults_for(kind);
    os << to_string(kind) << "\n";
    switch (kind) {
      case ProblemKind::spectra_1d:
        os << "  1D Gaussian deblurring of a four-peak spectrum\n";
        os << "  n = " << p.n << "\n";
        break;
      case ProblemKind::blur_2d:
        os << "  2D Gaussian deblurring of a sparse star field\n";
        os << "  nx = " << p.nx << ", psf_sigma = " << p.psf_sigma
           << ", boundary = " << boundary_name(p.boundary) << ", density = " << p.density
           << "\n";
        break;
      case ProblemKind::ct:
        os << "  parallel-beam tomography of the Shepp-Logan phantom\n";
        os << "  nx = " << p.nx << ", n_angles = " << p.n_angles
           << ", n_detectors = auto (ceil(sqrt(2) nx))\n";
        break;
    }
    os << "  noise_level = " << p.noise_level << ", regularization = identity\n";
    os << "  solver defaults: restart_tol = " << d.restart_tol
       << ", max_basis_vectors = " << d.max_basis_vectors << " (0 = unlimited)\n";
  }
  return os.str();
}

std::optional<std::vector<std::uint64_t>> parse_seed_list(const std::string& text) {
  auto parse_one = [](const std::string& s) -> std::optional<std::uint64_t> {
    if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) return std::nullopt;
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto a = parse_one(text.substr(0, dots));
    const auto b = parse_one(text.substr(dots + 2));
    if (!a || !b || *b < *a || *b - *a > 100000) return std::nullopt;
    for (std::uint64_t s = *a; s <= *b; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto s = parse_one(item);
    if (!s) return std::nullopt;
    seeds.push_back(*s);
  }
  if (seeds.empty()) return std::nullopt;
  return seeds;
}

std::string history_csv(const RunHistory& history) {
  std::string out = "iter,rel_error,res_norm,lambda,subspace_dim,restarted,functional_T\n";
  for (const auto& h : history) {
    out += std::to_string(h.iter) + ',' + format_number(h.rel_error) + ',' +
           format_number(h.residual_norm) + ',' + format_number(h.lambda) + ',' +
           std::to_string(h.subspace_dim) + ',' + (h.restarted ? "1" : "0") + ',' +
           format_number(h.functional_T) + '\n';
  }
  return out;
}

std::string pgm16(const Vector& image, Index rows, Index cols, double* min_out,
                  double* max_out) {
  require_size(image.size(), rows * cols, "pgm16");
  const double lo = image.minCoeff();
  const double hi = image.maxCoeff();
  if (min_out) *min_out = lo;
  if (max_out) *max_out = hi;
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n65535\n";
  out.reserve(out.size() + static_cast<std::size_t>(2 * rows * cols));
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double v = image[i + rows * j];
      const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
      const auto q = static_cast<unsigned>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
      out += static_cast<char>((q >> 8) & 0xFFu);
      out += static_cast<char>(q & 0xFFu);
    }
  }
  return out;
}

namespace {

std::string gnuplot_script(const std::string& label) {
  return "# relative error history; run: gnuplot -p " + label + "_history.gp\n"
         "set datafile separator ','\n"
         "set key top right\n"
         "set logscale y\n"
         "set xlabel 'iteration'\n"
         "set ylabel 'relative error'\n"
         "plot '" + label + "_history.csv' using 1:2 every ::1 with linespoints title '" +
         label + "'\n";
}

RawHeader image_header(const TestProblem& tp, const std::string& description) {
  RawHeader h;
  if (tp.image_rows > 1) {
    h.shape = {tp.image_rows, tp.image_cols};
  } else {
    h.shape = {tp.x_true.size()};
  }
  h.description = description;
  return h;
}

}  // namespace

std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec, const RunOptions& options,
                                       std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir);
  write_file_atomic(spec.output_dir / "effective_config.json", effective_config_json(spec));

  std::vector<TestProblem> problems;
  problems.reserve(spec.seeds.size());
  for (std::uint64_t seed : spec.seeds) {
    problems.push_back(make_problem(spec.problem, seed));
    const TestProblem& tp = problems.back();
    const fs::path dir = spec.output_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    write_raw_vector(dir / "b.raw", tp.b, RawHeader{{tp.b.size()}, "column_major", "observed data"});
    write_raw_vector(dir / "x_true.raw", tp.x_true, image_header(tp, "ground truth"));
  }

  const std::size_t n_solvers = spec.solvers.size();
  const std::size_t n_tasks = problems.size() * n_solvers;
  std::vector<SummaryRow> rows(n_tasks);
  std::vector<std::string> errors(n_tasks);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      const TestProblem& tp = problems[task / n_solvers];
      SolverConfig config = spec.solvers[task % n_solvers];
      config.seed = tp.seed;
      config.noise_level = tp.nl;
      try {
        const SolveInput in{tp.A, tp.b, tp.L, &tp.x_true};
        const SolveResult result = solve(config, in);
        const fs::path dir = spec.output_dir / ("seed_" + std::to_string(tp.seed));
        if (spec.output.history_csv) {
          write_file_atomic(dir / (config.label + "_history.csv"), history_csv(result.history));
          write_file_atomic(dir / (config.label + "_history.gp"), gnuplot_script(config.label));
        }
        if (spec.output.reconstruction_raw) {
          write_raw_vector(dir / (config.label + "_x.raw"), result.x,
                           image_header(tp, config.label + " reconstruction"));
        }
        if (spec.output.reconstruction_pgm && tp.image_rows > 1) {
          double lo = 0.0;
          double hi = 0.0;
          const std::string pgm = pgm16(result.x, tp.image_rows, tp.image_cols, &lo, &hi);
          write_file_atomic(dir / (config.label + "_x.pgm"), pgm);
          write_file_atomic(dir / (config.label + "_x.pgm.scale"),
                            "min: " + format_number(lo) + "\nmax: " + format_number(hi) + "\n");
        }
        SummaryRow& row = rows[task];
        row.seed = tp.seed;
        row.label = config.label;
        row.method = config.method;
        row.status = result.status;
        row.restarts = result.restarts;
        row.peak_basis_columns = result.peak_basis_columns;
        row.iterations = static_cast<Index>(result.history.size());
        if (!result.history.empty()) {
          row.final_rel_error = result.history.back().rel_error;
          row.final_residual_norm = result.history.back().residual_norm;
          row.final_lambda = result.history.back().lambda;
        } else {
          row.final_rel_error = relative_error(result.x, tp.x_true);
          row.final_residual_norm = (tp.b - tp.A.apply(result.x)).norm();
        }
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "seed " << tp.seed << " " << config.label << ": " << to_string(result.status)
            << ", " << row.iterations << " iterations, rel_error "
            << format_number(row.final_rel_error) << "\n";
      } catch (const std::exception& e) {
        errors[task] = "seed " + std::to_string(tp.seed) + " " + config.label + ": " + e.what();
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(n_tasks)));
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }

  if (spec.output.summary_table) {
    std::string csv =
        "seed,label,method,status,final_rel_error,iterations,restarts,peak_basis_columns,"
        "final_res_norm,final_lambda\n";
    for (const auto& r : rows) {
      csv += std::to_string(r.seed) + ',' + r.label + ',' + to_string(r.method) + ',' +
             to_string(r.status) + ',' + format_number(r.final_rel_error) + ',' +
             std::to_string(r.iterations) + ',' + std::to_string(r.restarts) + ',' +
             std::to_string(r.peak_basis_columns) + ',' +
             format_number(r.final_residual_norm) + ',' + format_number(r.final_lambda) + '\n';
    }
    write_file_atomic(spec.output_dir / "summary.csv", csv);
  }
  return rows;
}

}  // namespace irk
