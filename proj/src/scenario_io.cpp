#include "turnpike/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "turnpike/errors.hpp"

namespace turnpike {

namespace {

// Raw value of one scenario entry before typing: tokens plus source line.
struct RawEntry {
  std::vector<std::string> tokens;
  int line = 0;
};

using RawMap = std::map<std::string, RawEntry>;

const char* const kKnownKeys[] = {
    "model",
    "T",
    "N",
    "scheme",
    "q0",
    "v0",
    "qT",
    "vT",
    "cost.w_v",
    "cost.w_u",
    "cost.scale",
    "cost.v_ref",
    "hovercraft.r",
    "bounds.x_lo",
    "bounds.x_hi",
    "bounds.u_lo",
    "bounds.u_hi",
    "solver.tol_kkt",
    "solver.max_outer",
    "solver.max_inner",
    "solver.penalty_init",
    "solver.penalty_growth",
    "solver.seed",
};

bool known_key(const std::string& key) {
  for (const char* k : kKnownKeys) {
    if (key == k) return true;
  }
  return false;
}

void insert_entry(RawMap& raw, const std::string& key, RawEntry entry) {
  if (!known_key(key)) throw ParseError("unknown key '" + key + "'", entry.line);
  if (entry.tokens.empty()) throw ParseError("key '" + key + "' has no value", entry.line);
  if (!raw.emplace(key, std::move(entry)).second)
    throw ParseError("duplicate key '" + key + "'", entry.line);
}

double parse_num(const std::string& tok, const std::string& key, int line) {
  double value = 0.0;
  const char* end = tok.data() + tok.size();
  auto res = std::from_chars(tok.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ParseError("malformed number '" + tok + "' for key '" + key + "'", line);
  return value;
}

long parse_int(const std::string& tok, const std::string& key, int line) {
  long value = 0;
  const char* end = tok.data() + tok.size();
  auto res = std::from_chars(tok.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ParseError("malformed integer '" + tok + "' for key '" + key + "'", line);
  return value;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

RawMap read_flat(const std::string& text) {
  RawMap raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value', got '" + line + "'", lineno);
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("missing key before '='", lineno);
    RawEntry entry;
    entry.line = lineno;
    std::string rest = line.substr(eq + 1);
    for (char& c : rest) {
      if (c == ',') c = ' ';
    }
    std::istringstream values(rest);
    std::string tok;
    while (values >> tok) entry.tokens.push_back(tok);
    insert_entry(raw, key, std::move(entry));
  }
  return raw;
}

void flatten_json(const nlohmann::json& node, const std::string& prefix, RawMap& raw) {
  for (const auto& [name, value] : node.items()) {
    std::string key = prefix.empty() ? name : prefix + "." + name;
    if (value.is_object()) {
      flatten_json(value, key, raw);
      continue;
    }
    RawEntry entry;
    if (value.is_string()) {
      entry.tokens.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      entry.tokens.push_back(value.dump());
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (!item.is_number())
          throw ParseError("array for key '" + key + "' must hold numbers only");
        entry.tokens.push_back(item.dump());
      }
    } else {
      throw ParseError("unsupported value type for key '" + key + "'");
    }
    insert_entry(raw, key, std::move(entry));
  }
}

RawMap read_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    int lineno = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
  }
  if (!doc.is_object()) throw ParseError("scenario JSON must be an object");
  RawMap raw;
  flatten_json(doc, "", raw);
  return raw;
}

// Typed accessors over the raw map. Each consumes nothing; the whitelist
// already guarantees no stray keys remain.
const RawEntry* find(const RawMap& raw, const std::string& key) {
  auto it = raw.find(key);
  return it == raw.end() ? nullptr : &it->second;
}

const RawEntry& require(const RawMap& raw, const std::string& key) {
  const RawEntry* e = find(raw, key);
  if (!e) throw ParseError("missing required key '" + key + "'");
  return *e;
}

std::string get_word(const RawMap& raw, const std::string& key) {
  const RawEntry& e = require(raw, key);
  if (e.tokens.size() != 1)
    throw ParseError("key '" + key + "' expects a single word", e.line);
  return e.tokens[0];
}

double get_scalar(const RawEntry& e, const std::string& key) {
  if (e.tokens.size() != 1)
    throw ParseError("key '" + key + "' expects a single number", e.line);
  return parse_num(e.tokens[0], key, e.line);
}

long get_integer(const RawEntry& e, const std::string& key) {
  if (e.tokens.size() != 1)
    throw ParseError("key '" + key + "' expects a single integer", e.line);
  return parse_int(e.tokens[0], key, e.line);
}

Eigen::VectorXd get_vector(const RawEntry& e, const std::string& key, Eigen::Index size) {
  Eigen::VectorXd out;
  if (e.tokens.size() == 1 && size > 1) {
    // Scalar broadcast, convenient for uniform weights and bounds.
    out = Eigen::VectorXd::Constant(size, parse_num(e.tokens[0], key, e.line));
    return out;
  }
  if (static_cast<Eigen::Index>(e.tokens.size()) != size)
    throw ParseError("key '" + key + "' expects " + std::to_string(size) + " numbers, got " +
                         std::to_string(e.tokens.size()),
                     e.line);
  out.resize(size);
  for (Eigen::Index i = 0; i < size; ++i)
    out(i) = parse_num(e.tokens[i], key, e.line);
  return out;
}

void read_box(const RawMap& raw, const std::string& lo_key, const std::string& hi_key,
              Eigen::Index size, Box& box) {
  const RawEntry* lo = find(raw, lo_key);
  const RawEntry* hi = find(raw, hi_key);
  if (!lo && !hi) return;
  if (!lo || !hi)
    throw ParseError("'" + lo_key + "' and '" + hi_key + "' must be given together",
                     (lo ? lo->line : hi->line));
  box.lo = get_vector(*lo, lo_key, size);
  box.hi = get_vector(*hi, hi_key, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    if (box.lo(i) > box.hi(i))
      throw ParseError("'" + lo_key + "' exceeds '" + hi_key + "' at entry " + std::to_string(i),
                       lo->line);
  }
}

LoadedScenario assemble(const RawMap& raw) {
  LoadedScenario out;

  std::string model = get_word(raw, "model");
  Eigen::Index nq = 0;
  Eigen::Index nu = 0;
  if (model == "double_integrator") {
    nq = 1;
    nu = 1;
  } else if (model == "hovercraft") {
    nq = 3;
    nu = 2;
  } else {
    throw ParseError("unknown model '" + model + "'", require(raw, "model").line);
  }
  out.scenario.model = model;

  out.scenario.horizon = get_scalar(require(raw, "T"), "T");
  if (!(out.scenario.horizon > 0.0))
    throw ParseError("T must be positive", require(raw, "T").line);

  if (const RawEntry* e = find(raw, "N")) {
    long n = get_integer(*e, "N");
    if (n < 2) throw ParseError("N must be at least 2", e->line);
    out.transcription.N = static_cast<int>(n);
  }
  if (const RawEntry* e = find(raw, "scheme")) {
    std::string s = get_word(raw, "scheme");
    if (s == "trapezoidal")
      out.transcription.scheme = Scheme::Trapezoidal;
    else if (s == "hermite_simpson")
      out.transcription.scheme = Scheme::HermiteSimpson;
    else
      throw ParseError("unknown scheme '" + s + "'", e->line);
  }

  out.scenario.x0.q = get_vector(require(raw, "q0"), "q0", nq);
  out.scenario.x0.v = get_vector(require(raw, "v0"), "v0", nq);
  out.scenario.xT.q = get_vector(require(raw, "qT"), "qT", nq);
  out.scenario.xT.v = get_vector(require(raw, "vT"), "vT", nq);

  out.scenario.cost.w_v = get_vector(require(raw, "cost.w_v"), "cost.w_v", nq);
  out.scenario.cost.w_u = get_vector(require(raw, "cost.w_u"), "cost.w_u", nu);
  if (const RawEntry* e = find(raw, "cost.scale")) {
    out.scenario.cost.scale = get_scalar(*e, "cost.scale");
    if (!(out.scenario.cost.scale > 0.0))
      throw ParseError("cost.scale must be positive", e->line);
  }
  if (const RawEntry* e = find(raw, "cost.v_ref"))
    out.scenario.cost.v_ref = get_vector(*e, "cost.v_ref", nq);

  if (const RawEntry* e = find(raw, "hovercraft.r")) {
    if (model != "hovercraft")
      throw ParseError("hovercraft.r given for model '" + model + "'", e->line);
    out.hovercraft_r = get_scalar(*e, "hovercraft.r");
    if (!(out.hovercraft_r > 0.0))
      throw ParseError("hovercraft.r must be positive", e->line);
  }

  read_box(raw, "bounds.x_lo", "bounds.x_hi", 2 * nq, out.scenario.state_bounds);
  read_box(raw, "bounds.u_lo", "bounds.u_hi", nu, out.scenario.control_bounds);

  if (const RawEntry* e = find(raw, "solver.tol_kkt"))
    out.solver.tol_kkt = get_scalar(*e, "solver.tol_kkt");
  if (const RawEntry* e = find(raw, "solver.max_outer"))
    out.solver.max_outer = static_cast<int>(get_integer(*e, "solver.max_outer"));
  if (const RawEntry* e = find(raw, "solver.max_inner"))
    out.solver.max_inner = static_cast<int>(get_integer(*e, "solver.max_inner"));
  if (const RawEntry* e = find(raw, "solver.penalty_init"))
    out.solver.penalty_init = get_scalar(*e, "solver.penalty_init");
  if (const RawEntry* e = find(raw, "solver.penalty_growth"))
    out.solver.penalty_growth = get_scalar(*e, "solver.penalty_growth");
  if (const RawEntry* e = find(raw, "solver.seed"))
    out.solver.seed = static_cast<unsigned>(get_integer(*e, "solver.seed"));

  out.scenario.validate();
  out.solver.validate();
  return out;
}

void append_line(std::string& text, const std::string& key, const std::string& value) {
  text += key;
  text += " = ";
  text += value;
  text += '\n';
}

std::string join(const Eigen::VectorXd& x) {
  std::string out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(x(i));
  }
  return out;
}

}  // namespace

LoadedScenario parse_scenario(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  bool is_json = first != std::string::npos && text[first] == '{';
  RawMap raw = is_json ? read_json(text) : read_flat(text);
  return assemble(raw);
}

LoadedScenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const LoadedScenario& s) {
  std::string out;
  append_line(out, "model", s.scenario.model);
  append_line(out, "T", format_double(s.scenario.horizon));
  append_line(out, "N", std::to_string(s.transcription.N));
  append_line(out, "scheme",
              s.transcription.scheme == Scheme::Trapezoidal ? "trapezoidal" : "hermite_simpson");
  append_line(out, "q0", join(s.scenario.x0.q));
  append_line(out, "v0", join(s.scenario.x0.v));
  append_line(out, "qT", join(s.scenario.xT.q));
  append_line(out, "vT", join(s.scenario.xT.v));
  append_line(out, "cost.w_v", join(s.scenario.cost.w_v));
  append_line(out, "cost.w_u", join(s.scenario.cost.w_u));
  append_line(out, "cost.scale", format_double(s.scenario.cost.scale));
  if (s.scenario.cost.v_ref.size() > 0)
    append_line(out, "cost.v_ref", join(s.scenario.cost.v_ref));
  if (s.scenario.model == "hovercraft")
    append_line(out, "hovercraft.r", format_double(s.hovercraft_r));
  if (!s.scenario.state_bounds.empty()) {
    append_line(out, "bounds.x_lo", join(s.scenario.state_bounds.lo));
    append_line(out, "bounds.x_hi", join(s.scenario.state_bounds.hi));
  }
  if (!s.scenario.control_bounds.empty()) {
    append_line(out, "bounds.u_lo", join(s.scenario.control_bounds.lo));
    append_line(out, "bounds.u_hi", join(s.scenario.control_bounds.hi));
  }
  append_line(out, "solver.tol_kkt", format_double(s.solver.tol_kkt));
  append_line(out, "solver.max_outer", std::to_string(s.solver.max_outer));
  append_line(out, "solver.max_inner", std::to_string(s.solver.max_inner));
  append_line(out, "solver.penalty_init", format_double(s.solver.penalty_init));
  append_line(out, "solver.penalty_growth", format_double(s.solver.penalty_growth));
  append_line(out, "solver.seed", std::to_string(s.solver.seed));
  return out;
}

std::shared_ptr<const Model> build_model(const LoadedScenario& s) {
  return make_model(s.scenario.model, s.hovercraft_r);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  traj.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");

  const Eigen::Index n = traj.states.front().dim();
  const Eigen::Index m = traj.controls.front().size();
  const bool with_costates = traj.costates.has_value();

  std::string header = "t";
  for (Eigen::Index i = 1; i <= n; ++i) header += ",q_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= n; ++i) header += ",v_" + std::to_string(i);
  for (Eigen::Index j = 1; j <= m; ++j) header += ",u_" + std::to_string(j);
  if (with_costates) {
    const Eigen::Index nl = (*traj.costates)[0].size();
    for (Eigen::Index i = 1; i <= nl; ++i) header += ",lambda_" + std::to_string(i);
  }
  out << header << '\n';

  for (Eigen::Index k = 0; k < traj.node_count(); ++k) {
    std::string row = format_double(traj.times(k));
    const State& x = traj.states[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < n; ++i) row += "," + format_double(x.q(i));
    for (Eigen::Index i = 0; i < n; ++i) row += "," + format_double(x.v(i));
    const Eigen::VectorXd& u = traj.controls[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < m; ++j) row += "," + format_double(u(j));
    if (with_costates) {
      const Eigen::VectorXd& lam = (*traj.costates)[static_cast<std::size_t>(k)];
      for (Eigen::Index i = 0; i < lam.size(); ++i) row += "," + format_double(lam(i));
    }
    out << row << '\n';
  }
  if (!out) throw ParseError("failed writing '" + path + "'");
}

}  // namespace turnpike
