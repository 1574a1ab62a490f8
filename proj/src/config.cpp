#include "dset/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "dset/errors.hpp"

namespace dset::config {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// TOML subset

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Document run() {
    Document doc;
    std::string section;
    doc[section];
    while (true) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      if (peek() == '[') {
        ++pos_;
        section = trim(read_until(']'));
        if (section.empty()) fail("empty section name");
        ++pos_;
        if (doc.count(section) && section_seen_.count(section)) fail("duplicate section [" + section + "]");
        section_seen_.insert(section);
        doc[section];
        expect_line_end();
        continue;
      }
      const std::string key = trim(read_until('='));
      if (key.empty() || !valid_key(key)) fail("bad key '" + key + "'");
      ++pos_;
      skip_inline_space();
      Value v = read_value();
      if (doc[section].count(key)) fail("duplicate key '" + key + "'");
      doc[section][key] = std::move(v);
      expect_line_end();
    }
    return doc;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  std::set<std::string> section_seen_;

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  int line() const { return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos_), '\n')); }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(fmt::format("config line {}: {}", line(), what));
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static bool valid_key(const std::string& k) {
    for (char c : k) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    }
    return true;
  }

  void skip_comment() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

  void skip_inline_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  // Whitespace, newlines and comments.
  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        skip_comment();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string read_until(char stop) {
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != stop && text_[pos_] != '\n') ++pos_;
    if (peek() != stop) fail(fmt::format("expected '{}'", stop));
    return text_.substr(start, pos_ - start);
  }

  void expect_line_end() {
    skip_inline_space();
    if (peek() == '#') skip_comment();
    if (pos_ < text_.size() && text_[pos_] != '\n') fail("unexpected trailing characters");
  }

  Value read_value() {
    const char c = peek();
    if (c == '"') return Value{read_string()};
    if (c == '[') return Value{read_array()};
    return read_scalar();
  }

  std::string read_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n') fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(fmt::format("unsupported escape '\\{}'", e));
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  Value::Array read_array() {
    const int opened = line();
    ++pos_;
    Value::Array out;
    while (true) {
      skip_blank();
      if (pos_ >= text_.size()) fail(fmt::format("unterminated array opened on line {}", opened));
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      out.push_back(read_value());
      skip_blank();
      if (peek() == ',') {
        ++pos_;
      } else if (pos_ >= text_.size()) {
        fail(fmt::format("unterminated array opened on line {}", opened));
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  Value read_scalar() {
    const auto start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ',' || c == ']' || c == '#' || std::isspace(static_cast<unsigned char>(c))) break;
      ++pos_;
    }
    std::string tok = text_.substr(start, pos_ - start);
    if (tok == "true") return Value{true};
    if (tok == "false") return Value{false};
    if (tok == "inf" || tok == "+inf") return Value{std::numeric_limits<double>::infinity()};
    if (tok == "-inf") return Value{-std::numeric_limits<double>::infinity()};
    if (tok == "nan" || tok == "+nan" || tok == "-nan") return Value{std::numeric_limits<double>::quiet_NaN()};
    std::string digits;
    for (char c : tok) {
      if (c != '_') digits += c;
    }
    if (digits.empty()) fail("missing value");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(digits, &used);
    } catch (const std::exception&) {
      fail("bad value '" + tok + "'");
    }
    if (used != digits.size()) fail("bad value '" + tok + "'");
    return Value{v};
  }
};

std::string render_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{}", v);
  return s;
}

std::string render_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string render(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return render_number(x);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return render_string(x);
        } else {
          std::string out = "[";
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (i) out += ", ";
            out += render(x[i]);
          }
          return out + "]";
        }
      },
      v.data);
}

}  // namespace

Document parse_document(const std::string& text) { return Parser(text).run(); }

std::string serialize_document(const Document& doc) {
  std::string out;
  auto emit = [&](const std::map<std::string, Value>& entries) {
    for (const auto& [k, v] : entries) out += k + " = " + render(v) + "\n";
  };
  if (auto it = doc.find(""); it != doc.end()) emit(it->second);
  for (const auto& [name, entries] : doc) {
    if (name.empty()) continue;
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n";
    emit(entries);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Typed configuration

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::RidgeBall: return "ridge_ball";
    case ExperimentKind::RobustVmf: return "robust_vmf";
    case ExperimentKind::ContingencyTable: return "contingency_table";
    case ExperimentKind::Custom: return "custom";
  }
  return "custom";
}

ExperimentKind experiment_from_string(const std::string& s) {
  if (s == "ridge_ball") return ExperimentKind::RidgeBall;
  if (s == "robust_vmf") return ExperimentKind::RobustVmf;
  if (s == "contingency_table") return ExperimentKind::ContingencyTable;
  if (s == "custom") return ExperimentKind::Custom;
  throw InputError("config: unknown experiment '" + s + "'");
}

namespace {

// Reads typed fields out of one section and rejects leftovers.
class SectionReader {
 public:
  SectionReader(const Document& doc, const std::string& name) : name_(name) {
    if (auto it = doc.find(name); it != doc.end()) entries_ = &it->second;
  }

  ~SectionReader() noexcept(false) {
    if (!entries_ || std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : *entries_) {
      if (!used_.count(k)) throw InputError("config: unknown key '" + k + "' in " + where());
    }
  }

  void get(const std::string& key, double& out) {
    if (const Value* v = find(key)) out = number(*v, key);
  }
  void get(const std::string& key, int& out) {
    if (const Value* v = find(key)) out = integer(*v, key);
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const Value* v = find(key)) {
      const double x = number(*v, key);
      if (x < 0 || x != std::floor(x) || x > 9.007199254740992e15) fail(key, "a nonnegative integer below 2^53");
      out = static_cast<std::uint64_t>(x);
    }
  }
  void get(const std::string& key, bool& out) {
    if (const Value* v = find(key)) {
      const auto* b = std::get_if<bool>(&v->data);
      if (!b) fail(key, "a boolean");
      out = *b;
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const Value* v = find(key)) out = string(*v, key);
  }
  void get(const std::string& key, std::optional<double>& out) {
    if (const Value* v = find(key)) out = number(*v, key);
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (const Value* v = find(key)) out = numbers(*v, key);
  }
  void get(const std::string& key, std::vector<std::string>& out) {
    if (const Value* v = find(key)) {
      const auto* a = std::get_if<Value::Array>(&v->data);
      if (!a) fail(key, "an array of strings");
      out.clear();
      for (const auto& e : *a) out.push_back(string(e, key));
    }
  }
  void get(const std::string& key, std::vector<std::vector<double>>& out) {
    if (const Value* v = find(key)) {
      const auto* a = std::get_if<Value::Array>(&v->data);
      if (!a) fail(key, "an array of numeric arrays");
      out.clear();
      for (const auto& e : *a) out.push_back(numbers(e, key));
    }
  }

 private:
  std::string name_;
  const std::map<std::string, Value>* entries_ = nullptr;
  std::set<std::string> used_;

  std::string where() const { return name_.empty() ? "the top level" : "[" + name_ + "]"; }

  [[noreturn]] void fail(const std::string& key, const std::string& expected) const {
    throw InputError("config: '" + key + "' in " + where() + " must be " + expected);
  }

  const Value* find(const std::string& key) {
    if (!entries_) return nullptr;
    auto it = entries_->find(key);
    if (it == entries_->end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  double number(const Value& v, const std::string& key) const {
    const auto* d = std::get_if<double>(&v.data);
    if (!d) fail(key, "a number");
    return *d;
  }
  int integer(const Value& v, const std::string& key) const {
    const double x = number(v, key);
    if (x != std::floor(x) || std::abs(x) > 2e9) fail(key, "an integer");
    return static_cast<int>(x);
  }
  std::string string(const Value& v, const std::string& key) const {
    const auto* s = std::get_if<std::string>(&v.data);
    if (!s) fail(key, "a string");
    return *s;
  }
  std::vector<double> numbers(const Value& v, const std::string& key) const {
    const auto* a = std::get_if<Value::Array>(&v.data);
    if (!a) fail(key, "a numeric array");
    std::vector<double> out;
    for (const auto& e : *a) out.push_back(number(e, key));
    return out;
  }
};

Value num(double x) { return Value{x}; }
Value str(const std::string& s) { return Value{s}; }
Value arr(const std::vector<double>& xs) {
  Value::Array a;
  for (double x : xs) a.push_back(num(x));
  return Value{a};
}
Value arr(const std::vector<std::string>& xs) {
  Value::Array a;
  for (const auto& x : xs) a.push_back(str(x));
  return Value{a};
}
Value arr(const std::vector<std::vector<double>>& rows) {
  Value::Array a;
  for (const auto& r : rows) a.push_back(arr(r));
  return Value{a};
}

}  // namespace

ExperimentConfig from_document(const Document& doc) {
  static const std::set<std::string> sections{"", "model", "constraint", "penalty", "hmc", "map", "calibration"};
  for (const auto& [name, entries] : doc) {
    if (!sections.count(name)) throw InputError("config: unknown section [" + name + "]");
  }
  ExperimentConfig c;
  {
    SectionReader r(doc, "");
    std::string experiment = to_string(c.experiment);
    r.get("experiment", experiment);
    c.experiment = experiment_from_string(experiment);
    r.get("seed", c.seed);
    r.get("output_dir", c.output_dir);
  }
  {
    SectionReader r(doc, "model");
    auto& m = c.model;
    r.get("kind", m.kind);
    r.get("X", m.X);
    r.get("y", m.y);
    r.get("sigma2", m.sigma2);
    r.get("n", m.n);
    r.get("beta_true", m.beta_true);
    r.get("data_seed", m.data_seed);
    r.get("F", m.F);
    r.get("dof", m.dof);
    r.get("counts_file", m.counts_file);
    r.get("alpha", m.alpha);
  }
  {
    SectionReader r(doc, "constraint");
    auto& s = c.constraint;
    r.get("kind", s.kind);
    r.get("center", s.center);
    r.get("radius", s.radius);
    r.get("lower", s.lower);
    r.get("upper", s.upper);
    r.get("dimension", s.dimension);
    r.get("A", s.A);
    r.get("b", s.b);
    r.get("E", s.E);
    r.get("d", s.d);
    r.get("rows", s.rows);
    r.get("cols", s.cols);
  }
  {
    SectionReader r(doc, "penalty");
    auto& p = c.penalty;
    r.get("flavor", p.flavor);
    r.get("rho", p.rho);
    r.get("budget", p.budget);
    r.get("rho_grid", p.rho_grid);
    r.get("compare", p.compare);
  }
  {
    SectionReader r(doc, "hmc");
    auto& h = c.hmc;
    r.get("step_size", h.step_size);
    r.get("num_steps", h.num_steps);
    r.get("mass", h.mass);
    r.get("num_warmup", h.num_warmup);
    r.get("num_samples", h.num_samples);
    r.get("num_chains", h.num_chains);
    r.get("step_size_adapt", h.step_size_adapt);
    r.get("target_accept", h.target_accept);
    r.get("integration_time", h.integration_time);
    r.get("max_steps", h.max_steps);
    r.get("step_jitter", h.step_jitter);
  }
  {
    SectionReader r(doc, "map");
    r.get("rho_schedule", c.map.rho_schedule);
    r.get("tol", c.map.tol);
    r.get("max_iterations", c.map.max_iterations);
  }
  {
    SectionReader r(doc, "calibration");
    r.get("max_stages", c.calibration.max_stages);
  }
  return c;
}

Document to_document(const ExperimentConfig& c) {
  Document doc;
  auto& top = doc[""];
  top["experiment"] = str(to_string(c.experiment));
  top["seed"] = num(static_cast<double>(c.seed));
  top["output_dir"] = str(c.output_dir);

  auto& m = doc["model"];
  m["kind"] = str(c.model.kind);
  if (!c.model.X.empty()) m["X"] = arr(c.model.X);
  if (!c.model.y.empty()) m["y"] = arr(c.model.y);
  m["sigma2"] = num(c.model.sigma2);
  if (c.model.n > 0) m["n"] = num(c.model.n);
  if (!c.model.beta_true.empty()) m["beta_true"] = arr(c.model.beta_true);
  m["data_seed"] = num(static_cast<double>(c.model.data_seed));
  if (!c.model.F.empty()) m["F"] = arr(c.model.F);
  m["dof"] = num(c.model.dof);
  if (!c.model.counts_file.empty()) m["counts_file"] = str(c.model.counts_file);
  m["alpha"] = num(c.model.alpha);

  auto& s = doc["constraint"];
  s["kind"] = str(c.constraint.kind);
  if (!c.constraint.center.empty()) s["center"] = arr(c.constraint.center);
  s["radius"] = num(c.constraint.radius);
  if (!c.constraint.lower.empty()) s["lower"] = arr(c.constraint.lower);
  if (!c.constraint.upper.empty()) s["upper"] = arr(c.constraint.upper);
  if (c.constraint.dimension) s["dimension"] = num(c.constraint.dimension);
  if (!c.constraint.A.empty()) s["A"] = arr(c.constraint.A);
  if (!c.constraint.b.empty()) s["b"] = arr(c.constraint.b);
  if (!c.constraint.E.empty()) s["E"] = arr(c.constraint.E);
  if (!c.constraint.d.empty()) s["d"] = arr(c.constraint.d);
  if (c.constraint.rows) s["rows"] = num(c.constraint.rows);
  if (c.constraint.cols) s["cols"] = num(c.constraint.cols);

  auto& p = doc["penalty"];
  p["flavor"] = str(c.penalty.flavor);
  if (c.penalty.rho) p["rho"] = num(*c.penalty.rho);
  if (c.penalty.budget) p["budget"] = num(*c.penalty.budget);
  if (!c.penalty.rho_grid.empty()) p["rho_grid"] = arr(c.penalty.rho_grid);
  if (!c.penalty.compare.empty()) p["compare"] = arr(c.penalty.compare);

  auto& h = doc["hmc"];
  h["step_size"] = num(c.hmc.step_size);
  h["num_steps"] = num(c.hmc.num_steps);
  if (!c.hmc.mass.empty()) h["mass"] = arr(c.hmc.mass);
  h["num_warmup"] = num(c.hmc.num_warmup);
  h["num_samples"] = num(c.hmc.num_samples);
  h["num_chains"] = num(c.hmc.num_chains);
  h["step_size_adapt"] = Value{c.hmc.step_size_adapt};
  h["target_accept"] = num(c.hmc.target_accept);
  h["integration_time"] = num(c.hmc.integration_time);
  h["max_steps"] = num(c.hmc.max_steps);
  h["step_jitter"] = num(c.hmc.step_jitter);

  auto& mp = doc["map"];
  if (!c.map.rho_schedule.empty()) mp["rho_schedule"] = arr(c.map.rho_schedule);
  mp["tol"] = num(c.map.tol);
  mp["max_iterations"] = num(c.map.max_iterations);

  doc["calibration"]["max_stages"] = num(c.calibration.max_stages);
  return doc;
}

ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir) {
  auto c = from_document(parse_document(text));
  if (!base_dir.empty() && !c.model.counts_file.empty() && fs::path(c.model.counts_file).is_relative()) {
    c.model.counts_file = (base_dir / c.model.counts_file).lexically_normal().string();
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& config) { return serialize_document(to_document(config)); }

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto c = parse_config(buf.str(), path.parent_path());
  validate(c);
  return c;
}

std::vector<double> ExperimentConfig::rho_values() const {
  if (!penalty.rho_grid.empty()) return penalty.rho_grid;
  if (penalty.rho) return {*penalty.rho};
  return {};
}

hmc::HmcConfig ExperimentConfig::hmc_config() const {
  hmc::HmcConfig h;
  h.step_size = hmc.step_size;
  h.num_steps = hmc.num_steps;
  if (!hmc.mass.empty()) h.mass = Eigen::Map<const Vector>(hmc.mass.data(), static_cast<Eigen::Index>(hmc.mass.size()));
  h.num_warmup = hmc.num_warmup;
  h.num_samples = hmc.num_samples;
  h.num_chains = hmc.num_chains;
  h.seed = seed;
  h.step_size_adapt = hmc.step_size_adapt;
  h.target_accept = hmc.target_accept;
  h.integration_time = hmc.integration_time;
  h.max_steps = hmc.max_steps;
  h.step_jitter = hmc.step_jitter;
  return h;
}

void validate(const ExperimentConfig& c) {
  static const std::set<std::string> models{"gaussian_linear", "student_t_location", "multinomial_dirichlet_table"};
  static const std::set<std::string> sets{"ball",       "sphere",    "box", "simplex", "polyhedron",
                                          "stochastic_dominance", "whole_space"};
  static const std::set<std::string> flavors{"squared", "unsquared", "level_set", "sharp"};
  if (!models.count(c.model.kind)) throw InputError("config: unknown model kind '" + c.model.kind + "'");
  if (!sets.count(c.constraint.kind)) throw InputError("config: unknown constraint kind '" + c.constraint.kind + "'");
  if (!flavors.count(c.penalty.flavor)) throw InputError("config: unknown penalty flavor '" + c.penalty.flavor + "'");
  for (const auto& f : c.penalty.compare) {
    if (!flavors.count(f)) throw InputError("config: unknown comparison flavor '" + f + "'");
  }

  const bool has_rho = c.penalty.rho.has_value() || !c.penalty.rho_grid.empty();
  const bool has_budget = c.penalty.budget.has_value();
  if (c.penalty.rho && !c.penalty.rho_grid.empty()) throw InputError("config: give rho or rho_grid, not both");
  if (has_rho == has_budget && c.penalty.flavor != "sharp") {
    throw InputError("config: exactly one of penalty.rho (or rho_grid) and penalty.budget must be set");
  }
  for (double r : c.rho_values()) {
    if (!(r > 0.0)) throw InputError("config: rho values must be positive");
  }
  if (has_budget && !(*c.penalty.budget > 0.0)) throw InputError("config: budget must be positive");
  if (has_budget && c.penalty.flavor != "squared") {
    throw InputError("config: calibration requires the squared flavor");
  }
  if (c.model.kind == "multinomial_dirichlet_table") {
    if (c.model.counts_file.empty()) throw InputError("config: model.counts_file is required");
    if (!fs::exists(c.model.counts_file)) throw InputError("config: data file not found: " + c.model.counts_file);
  }
  if (c.calibration.max_stages < 1) throw InputError("config: calibration.max_stages must be at least 1");
  c.hmc_config().validate();
}

Eigen::MatrixXi read_counts_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("counts: cannot read " + path.string());
  std::vector<std::vector<int>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<int> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      const auto a = cell.find_first_not_of(" \t");
      const auto b = cell.find_last_not_of(" \t");
      const std::string t = a == std::string::npos ? "" : cell.substr(a, b - a + 1);
      std::size_t used = 0;
      long v = 0;
      try {
        v = std::stol(t, &used);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
      if (used != t.size()) {
        numeric = false;
        break;
      }
      if (v < 0) throw InputError("counts: negative count in " + path.string());
      row.push_back(static_cast<int>(v));
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError("counts: non-integer entry in " + path.string());
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) throw InputError("counts: ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2) throw InputError("counts: need at least one row and two columns");
  Eigen::MatrixXi out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

namespace {

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, Eigen::Index cols, const char* what) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != cols) {
      throw InputError(std::string("config: ragged matrix ") + what);
    }
    out.row(static_cast<Eigen::Index>(i)) = to_vector(rows[i]).transpose();
  }
  return out;
}

}  // namespace

ModelSpec model_spec(const ExperimentConfig& c) {
  const auto& m = c.model;
  if (m.kind == "gaussian_linear") {
    if (m.n > 0) {
      if (m.beta_true.empty()) throw InputError("config: simulated gaussian_linear needs beta_true");
      const auto p = static_cast<Eigen::Index>(m.beta_true.size());
      std::mt19937_64 rng(m.data_seed);
      std::normal_distribution<double> normal;
      Matrix X(m.n, p);
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = normal(rng);
      }
      Vector y = X * to_vector(m.beta_true);
      const double sd = std::sqrt(m.sigma2);
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sd * normal(rng);
      return GaussianLinearSpec{X, y, m.sigma2};
    }
    if (m.X.empty()) throw InputError("config: gaussian_linear needs X and y, or n and beta_true");
    const Matrix X = to_matrix(m.X, static_cast<Eigen::Index>(m.X.front().size()), "X");
    return GaussianLinearSpec{X, to_vector(m.y), m.sigma2};
  }
  if (m.kind == "student_t_location") return StudentTLocationSpec{to_vector(m.F), m.dof, m.sigma2};
  if (m.kind == "multinomial_dirichlet_table") {
    const auto counts = read_counts_csv(m.counts_file);
    return MultinomialDirichletTableSpec{counts, Matrix::Constant(counts.rows(), counts.cols(), m.alpha)};
  }
  throw InputError("config: unknown model kind '" + m.kind + "'");
}

ConstraintSet constraint_set(const ExperimentConfig& c, int model_dim) {
  const auto& s = c.constraint;
  const auto n = static_cast<Eigen::Index>(model_dim);
  auto center = [&] { return s.center.empty() ? Vector(Vector::Zero(n)) : to_vector(s.center); };
  if (s.kind == "whole_space") return ConstraintSet::whole_space(model_dim);
  if (s.kind == "ball") return ConstraintSet(Ball{center(), s.radius});
  if (s.kind == "sphere") return ConstraintSet(Sphere{center(), s.radius});
  if (s.kind == "box") return ConstraintSet(Box{to_vector(s.lower), to_vector(s.upper)});
  if (s.kind == "simplex") return ConstraintSet(Simplex{s.dimension > 0 ? s.dimension : model_dim});
  if (s.kind == "polyhedron") {
    return ConstraintSet(Polyhedron{to_matrix(s.A, n, "A"), to_vector(s.b), to_matrix(s.E, n, "E"), to_vector(s.d)});
  }
  if (s.kind == "stochastic_dominance") {
    int rows = s.rows;
    int cols = s.cols;
    if (rows == 0 || cols == 0) {
      if (c.model.kind != "multinomial_dirichlet_table") {
        throw InputError("config: stochastic_dominance needs rows and cols");
      }
      const auto counts = read_counts_csv(c.model.counts_file);
      rows = static_cast<int>(counts.rows());
      cols = static_cast<int>(counts.cols()) - 1;
    }
    return ConstraintSet(StochasticDominance{rows, cols});
  }
  throw InputError("config: unknown constraint kind '" + s.kind + "'");
}

PenaltyFlavor make_flavor(const std::string& name, double rho) {
  if (name == "squared") return SquaredDistance{rho};
  if (name == "unsquared") return UnsquaredDistance{rho};
  if (name == "level_set") return LevelSetSphere{rho};
  if (name == "sharp") return Sharp{};
  throw InputError("config: unknown penalty flavor '" + name + "'");
}

}  // namespace dset::config
