#include "sdpde/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace sdpde {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_factor(const std::string& tok) {
  const std::string t = lower(trim(tok));
  if (t == "pi") return std::numbers::pi;
  if (t == "-pi") return -std::numbers::pi;
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw std::invalid_argument("not a number: '" + tok + "'");
  }
  return v;
}

struct Entry {
  std::string value;
  int line;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"domain", {"length", "grid"}},
      {"operator", {"damping"}},
      {"nonlinearity", {"kind", "p", "table_w", "table_b"}},
      {"spatial_kernel", {"kind", "f0", "alpha"}},
      {"delay",
       {"span", "law", "eta0", "eta_max", "c0", "c1", "c2", "mode", "n", "eps0", "eps_ratio"}},
      {"integration", {"dt", "horizon", "modes"}},
      {"initial", {"u0", "history"}},
      {"output", {"dir", "coefficients"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Section> doc) : doc_(std::move(doc)) {}

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto s = doc_.find(section);
    if (s == doc_.end()) return nullptr;
    const auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
  }

  [[noreturn]] static void fail(const Entry& e, const std::string& what) {
    throw ConfigError("line " + std::to_string(e.line) + ": " + what);
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    try {
      return parse_number(e->value);
    } catch (const std::invalid_argument& ex) {
      fail(*e, key + ": " + ex.what());
    }
  }

  double positive(const std::string& section, const std::string& key, double fallback) const {
    const double v = number(section, key, fallback);
    if (const Entry* e = find(section, key); e && !(v > 0.0)) fail(*e, key + " must be positive");
    return v;
  }

  int integer(const std::string& section, const std::string& key, int fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
      fail(*e, key + ": not an integer: '" + e->value + "'");
    }
    return v;
  }

  std::string word(const std::string& section, const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    const std::string v = lower(e->value);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : " | ") + a;
      fail(*e, key + " must be one of " + list + ", got '" + e->value + "'");
    }
    return v;
  }

  std::vector<double> list(const std::string& section, const std::string& key,
                           std::vector<double> fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto& tok : split(e->value, ',')) {
      try {
        out.push_back(parse_number(tok));
      } catch (const std::invalid_argument& ex) {
        fail(*e, key + ": " + ex.what());
      }
    }
    if (out.empty()) fail(*e, key + " needs at least one value");
    return out;
  }

 private:
  std::map<std::string, Section> doc_;
};

std::map<std::string, Section> tokenize(const std::string& text) {
  std::map<std::string, Section> doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const std::string where = "line " + std::to_string(line) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + "unterminated section header");
      section = lower(trim(s.substr(1, s.size() - 2)));
      if (!schema().contains(section)) throw ConfigError(where + "unknown section [" + section + "]");
      doc[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = lower(trim(s.substr(0, eq)));
    const std::string value = trim(s.substr(eq + 1));
    const auto& keys = schema().at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    }
    if (value.empty()) throw ConfigError(where + "missing value for '" + key + "'");
    if (doc[section].contains(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    doc[section][key] = Entry{value, line};
  }
  return doc;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ", ") + fmt(x);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

double parse_number(const std::string& token) {
  const std::string t = trim(token);
  if (t.empty()) throw std::invalid_argument("empty number");
  // Left-to-right products and quotients.
  double value = 1.0;
  char op = '*';
  std::size_t start = 0;
  for (std::size_t i = 0; i <= t.size(); ++i) {
    const bool sep = i == t.size() || ((t[i] == '*' || t[i] == '/') && i > 0 &&
                                       t[i - 1] != 'e' && t[i - 1] != 'E');
    if (!sep) continue;
    const double f = parse_factor(t.substr(start, i - start));
    value = op == '*' ? value * f : value / f;
    if (i < t.size()) op = t[i];
    start = i + 1;
  }
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite number: '" + token + "'");
  return value;
}

Scenario parse_scenario(const std::string& text, const ScenarioOverrides& overrides) {
  const Reader r(tokenize(text));
  Scenario s;

  s.domain.length = r.positive("domain", "length", s.domain.length);
  s.damping = r.positive("operator", "damping", s.damping);

  s.modes = r.integer("integration", "modes", s.modes);
  if (const Entry* e = r.find("integration", "modes"); e && s.modes < 1) {
    Reader::fail(*e, "modes must be >= 1");
  }
  if (overrides.modes) s.modes = *overrides.modes;
  s.dt = r.positive("integration", "dt", s.dt);
  if (overrides.dt) s.dt = *overrides.dt;
  s.horizon = r.positive("integration", "horizon", s.horizon);

  const Entry* grid = r.find("domain", "grid");
  if (grid && lower(grid->value) != "auto") {
    s.domain.grid_size = r.integer("domain", "grid", 0);
    if (s.domain.grid_size < 1) Reader::fail(*grid, "grid must be a positive integer or auto");
  } else {
    s.domain.grid_size = 4 * s.modes;
  }

  const std::string nl = r.word("nonlinearity", "kind", "nicholson", {"nicholson", "zero", "table"});
  if (nl == "nicholson") {
    s.nonlinearity = Nonlinearity::nicholson(r.positive("nonlinearity", "p", 2.0));
  } else if (nl == "zero") {
    s.nonlinearity = Nonlinearity::zero();
  } else {
    const Entry* e = r.find("nonlinearity", "table_w");
    if (!e) throw ConfigError("[nonlinearity] kind = table needs table_w and table_b");
    try {
      s.nonlinearity = Nonlinearity::table(r.list("nonlinearity", "table_w", {}),
                                           r.list("nonlinearity", "table_b", {}));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& ex) {
      Reader::fail(*e, ex.what());
    }
  }

  const std::string fk = r.word("spatial_kernel", "kind", "constant", {"constant", "gaussian"});
  if (fk == "constant") {
    s.spatial_kernel = SpatialKernel::constant(r.number("spatial_kernel", "f0", 1.0));
  } else {
    s.spatial_kernel = SpatialKernel::gaussian(r.positive("spatial_kernel", "alpha", 0.1));
  }

  s.delay_span = r.positive("delay", "span", s.delay_span);
  const std::string law = r.word("delay", "law", "sigmoid", {"constant", "sigmoid"});
  if (law == "constant") {
    s.delay_law = DelayLaw::constant(r.number("delay", "eta0", 0.5));
    if (const Entry* e = r.find("delay", "eta0"); e && s.delay_law.eta0 < 0.0) {
      Reader::fail(*e, "eta0 must be >= 0");
    }
  } else {
    s.delay_law = DelayLaw::sigmoid(r.positive("delay", "eta_max", s.delay_law.eta_max),
                                    r.number("delay", "c0", s.delay_law.c0),
                                    r.number("delay", "c1", s.delay_law.c1),
                                    r.number("delay", "c2", s.delay_law.c2));
  }
  s.epsilon.eps0 = r.positive("delay", "eps0", s.delay_span / 8.0);
  s.epsilon.ratio = r.positive("delay", "eps_ratio", s.epsilon.ratio);
  if (const Entry* e = r.find("delay", "eps_ratio"); e && !(s.epsilon.ratio < 1.0)) {
    Reader::fail(*e, "eps_ratio must lie in (0, 1)");
  }
  const std::string mode = r.word("delay", "mode", "distributed", {"discrete", "distributed"});
  if (mode == "discrete") {
    s.mode = DelayMode::discrete();
  } else {
    const int n = r.integer("delay", "n", s.mode.n);
    if (const Entry* e = r.find("delay", "n"); e && n < 1) Reader::fail(*e, "n must be >= 1");
    s.mode = DelayMode::distributed(n);
  }

  s.initial.u0 = r.list("initial", "u0", s.initial.u0);
  const std::string shape = r.word("initial", "history", "constant", {"constant", "zero", "ramp"});
  s.initial.history = shape == "constant" ? InitialData::HistoryShape::constant
                      : shape == "zero"   ? InitialData::HistoryShape::zero
                                          : InitialData::HistoryShape::ramp;

  if (const Entry* e = r.find("output", "dir")) s.output.directory = e->value;
  s.output.coefficients =
      r.word("output", "coefficients", "true", {"true", "false"}) == "true";

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides);
}

std::string to_config_text(const Scenario& s) {
  std::ostringstream o;
  o << "[domain]\nlength = " << fmt(s.domain.length) << "\ngrid = " << s.domain.grid_size << "\n\n";
  o << "[operator]\ndamping = " << fmt(s.damping) << "\n\n";
  o << "[nonlinearity]\n";
  switch (s.nonlinearity.kind) {
    case Nonlinearity::Kind::nicholson:
      o << "kind = nicholson\np = " << fmt(s.nonlinearity.p) << "\n\n";
      break;
    case Nonlinearity::Kind::zero:
      o << "kind = zero\n\n";
      break;
    case Nonlinearity::Kind::table:
      o << "kind = table\ntable_w = " << join(s.nonlinearity.table_w)
        << "\ntable_b = " << join(s.nonlinearity.table_b) << "\n\n";
      break;
  }
  o << "[spatial_kernel]\n";
  if (s.spatial_kernel.kind == SpatialKernel::Kind::constant) {
    o << "kind = constant\nf0 = " << fmt(s.spatial_kernel.f0) << "\n\n";
  } else {
    o << "kind = gaussian\nalpha = " << fmt(s.spatial_kernel.alpha) << "\n\n";
  }
  o << "[delay]\nspan = " << fmt(s.delay_span) << "\n";
  if (s.delay_law.rule == DelayLaw::Rule::constant) {
    o << "law = constant\neta0 = " << fmt(s.delay_law.eta0) << "\n";
  } else {
    o << "law = sigmoid\neta_max = " << fmt(s.delay_law.eta_max) << "\nc0 = " << fmt(s.delay_law.c0)
      << "\nc1 = " << fmt(s.delay_law.c1) << "\nc2 = " << fmt(s.delay_law.c2) << "\n";
  }
  o << "eps0 = " << fmt(s.epsilon.eps0) << "\neps_ratio = " << fmt(s.epsilon.ratio) << "\n";
  if (s.mode.is_discrete()) {
    o << "mode = discrete\n\n";
  } else {
    o << "mode = distributed\nn = " << s.mode.n << "\n\n";
  }
  o << "[integration]\ndt = " << fmt(s.dt) << "\nhorizon = " << fmt(s.horizon)
    << "\nmodes = " << s.modes << "\n\n";
  const char* shape = s.initial.history == InitialData::HistoryShape::constant ? "constant"
                      : s.initial.history == InitialData::HistoryShape::zero   ? "zero"
                                                                               : "ramp";
  o << "[initial]\nu0 = " << join(s.initial.u0) << "\nhistory = " << shape << "\n\n";
  o << "[output]\ndir = " << s.output.directory
    << "\ncoefficients = " << (s.output.coefficients ? "true" : "false") << "\n";
  return o.str();
}

void export_trajectory(const Trajectory& traj, const std::string& path, bool coefficients) {
  std::ofstream out = open_out(path);
  const std::size_t m = traj.states.empty() ? 0 : traj.states.front().order();
  out << "t,norm_l2,norm_h1,eta,f_norm";
  if (coefficients) {
    for (std::size_t k = 1; k <= m; ++k) out << ",g_" << k;
  }
  out << '\n';
  for (std::size_t j = 0; j < traj.size(); ++j) {
    out << fmt(traj.times[j]) << ',' << fmt(traj.norm_l2[j]) << ',' << fmt(traj.norm_h1[j]) << ','
        << fmt(traj.eta[j]) << ',' << fmt(traj.f_norm[j]);
    if (coefficients) {
      for (std::size_t k = 0; k < m; ++k) out << ',' << fmt(traj.states[j][k]);
    }
    out << '\n';
  }
  finish(out, path);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  const std::vector<std::string> header = split(line, ',');
  if (header.size() < 5 || header[0] != "t" || header[4] != "f_norm") {
    throw IoError("'" + path + "' does not have a trajectory header");
  }
  const std::size_t m = header.size() - 5;
  Trajectory traj;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw IoError("'" + path + "' row " + std::to_string(row) + ": wrong column count");
    }
    std::vector<double> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        v[i] = parse_factor(cells[i]);
      } catch (const std::invalid_argument& ex) {
        throw IoError("'" + path + "' row " + std::to_string(row) + ": " + ex.what());
      }
    }
    traj.times.push_back(v[0]);
    traj.norm_l2.push_back(v[1]);
    traj.norm_h1.push_back(v[2]);
    traj.eta.push_back(v[3]);
    traj.f_norm.push_back(v[4]);
    if (m > 0) traj.states.emplace_back(std::vector<double>(v.begin() + 5, v.end()));
  }
  if (traj.times.size() > 1) traj.dt = traj.times[1] - traj.times[0];
  return traj;
}

std::string report_json(const VerificationReport& report) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["config"] = report.scenario_config;
  doc["all_passed"] = report.all_passed();
  ordered_json checks = ordered_json::array();
  for (const auto& r : report.records) {
    ordered_json c;
    c["name"] = r.name;
    c["inequality"] = r.inequality;
    c["constants"] = ordered_json::object();
    for (const auto& [k, v] : r.constants) c["constants"][k] = v;
    c["metrics"] = ordered_json::object();
    for (const auto& [k, v] : r.metrics) c["metrics"][k] = v;
    c["margin"] = r.margin;
    c["slack"] = r.slack;
    c["passed"] = r.passed;
    c["note"] = r.note;
    checks.push_back(std::move(c));
  }
  doc["checks"] = std::move(checks);
  return doc.dump(2);
}

void export_report(const VerificationReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << report_json(report) << '\n';
  finish(out, path);
}

void export_series(const CheckRecord& record, const std::string& path) {
  std::ofstream out = open_out(path);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < record.series.size(); ++i) {
    out << (i ? "," : "") << record.series[i].first;
    rows = std::max(rows, record.series[i].second.size());
  }
  out << '\n';
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t i = 0; i < record.series.size(); ++i) {
      const auto& col = record.series[i].second;
      out << (i ? "," : "");
      if (j < col.size()) out << fmt(col[j]);
    }
    out << '\n';
  }
  finish(out, path);
}

}  // namespace sdpde
