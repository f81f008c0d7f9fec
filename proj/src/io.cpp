#include "ipinn/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "json.hpp"

namespace ipinn::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void join(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (columns.size() != header.size()) {
    throw ContractError("CSV " + path.string() + ": " + std::to_string(header.size()) +
                        " headers for " + std::to_string(columns.size()) + " columns");
  }
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw ContractError("CSV " + path.string() + ": ragged columns");
  }
  std::ofstream out = open_out(path);
  join(out, header);
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    line.clear();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) line += ',';
      line += format_double(columns[c][r]);
    }
    out << line << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::string> solution_header(const ProblemDefinition& problem) {
  std::vector<std::string> h{"x", "t"};
  for (int c = 0; c < problem.components; ++c) {
    const std::string u = problem.components == 1 ? "u" : "u" + std::to_string(c + 1);
    h.push_back(u + "_min");
    h.push_back(u + "_max");
  }
  for (int s = 0; s < problem.field_count(); ++s) {
    const std::string p = "P" + std::to_string(s + 1);
    h.push_back(p + "_min");
    h.push_back(p + "_max");
  }
  return h;
}

void write_solution_csv(const fs::path& path, const ProblemDefinition& problem,
                        const Eigen::ArrayXd& x, const Eigen::ArrayXd& t, const Eigen::MatrixXd& u,
                        const Eigen::MatrixXd& fields) {
  std::vector<std::vector<double>> cols;
  cols.emplace_back(x.begin(), x.end());
  cols.emplace_back(t.begin(), t.end());
  for (Eigen::Index r = 0; r < u.rows(); ++r) cols.emplace_back(u.row(r).begin(), u.row(r).end());
  for (Eigen::Index r = 0; r < fields.rows(); ++r) {
    cols.emplace_back(fields.row(r).begin(), fields.row(r).end());
  }
  write_csv(path, solution_header(problem), cols);
}

void write_log_csv(const fs::path& path, const std::vector<LogEntry>& history) {
  std::ofstream out = open_out(path);
  out << "epoch,total,mse_g,u_mm_min,u_mm_max,mse_0,mse_u,box_violations\n";
  for (const LogEntry& e : history) {
    const LossBreakdown& l = e.loss;
    out << e.epoch << ',' << format_double(l.total) << ',' << format_double(l.mse_g) << ','
        << format_double(l.u_mm_min) << ',' << format_double(l.u_mm_max) << ','
        << format_double(l.mse_0) << ',' << format_double(l.mse_u) << ',' << e.box_violations
        << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_fuzzy_csv(const fs::path& path, const ProblemDefinition& problem,
                     const FuzzySolution& solution) {
  const CutResult* first = nullptr;
  for (const CutResult& c : solution.cuts) {
    if (c.bundle) {
      first = &c;
      break;
    }
  }
  const Eigen::Index points = first ? first->bundle->x.size() : 0;
  const bool scalar = points <= 1 && problem.components == 1;
  std::ofstream out = open_out(path);
  out << (scalar ? "alpha,lower,upper\n" : "x,t,component,alpha,lower,upper\n");
  for (Eigen::Index i = 0; i < points; ++i) {
    for (int c = 0; c < problem.components; ++c) {
      for (const auto& row : solution.intervals(i, c)) {
        if (!scalar) {
          out << format_double(first->bundle->x[i]) << ',' << format_double(first->bundle->t[i])
              << ',' << c << ',';
        }
        out << format_double(row[0]) << ',' << format_double(row[1]) << ','
            << format_double(row[2]) << '\n';
      }
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

namespace {

json network_json(const nn::NetworkParams& p) {
  json layers = json::array();
  for (const nn::LayerSpec& l : p.layers()) {
    layers.push_back({{"inputs", l.inputs},
                      {"outputs", l.outputs},
                      {"activation", std::string(nn::activation_name(l.activation))}});
  }
  return {{"layers", layers},
          {"values", std::vector<double>(p.values().begin(), p.values().end())}};
}

nn::NetworkParams network_from(const json& j, const std::string& where) {
  std::vector<nn::LayerSpec> layers;
  for (const json& l : j.at("layers")) {
    layers.push_back({l.at("inputs").get<int>(), l.at("outputs").get<int>(),
                      nn::parse_activation(l.at("activation").get<std::string>())});
  }
  nn::NetworkParams p(layers);
  const auto values = j.at("values").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != p.size()) {
    throw ConfigError(where + ": " + std::to_string(values.size()) + " values for " +
                      std::to_string(p.size()) + " parameters");
  }
  p.values() = Eigen::Map<const Eigen::VectorXd>(values.data(), p.size());
  return p;
}

}  // namespace

void write_params(const fs::path& path, long epoch, const nn::NetworkParams& u,
                  const nn::NetworkParams& p) {
  const json j = {{"epoch", epoch}, {"solution", network_json(u)}, {"field", network_json(p)}};
  std::ofstream out = open_out(path);
  out << j.dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

ParamsFile read_params(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    const json j = json::parse(in);
    return {j.at("epoch").get<long>(), network_from(j.at("solution"), path.string()),
            network_from(j.at("field"), path.string())};
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Run config

namespace {

// JSON parsing with diagnostics that point back into the source text. The
// parser does not keep positions, so keys are located by scanning for the
// quoted key names along the path.
class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::string p;
    for (const auto& k : path) p += "/" + k;
    if (p.empty()) p = "/";
    throw ConfigError(source_ + ":" + position(path) + ": " + p + ": " + what);
  }

  [[noreturn]] void fail_at_byte(std::size_t byte, const std::string& what) const {
    throw ConfigError(source_ + ":" + line_col(std::min(byte, text_.size())) + ": " + what);
  }

  void keys(const json& obj, const std::vector<std::string>& path,
            std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) {
        std::string list;
        for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        auto p = path;
        p.push_back(key);
        fail(p, "unknown key (expected one of: " + list + ")");
      }
    }
  }

  double number(const json& obj, const std::vector<std::string>& path, const char* key,
                double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(child(path, key), "expected a number");
    return v.get<double>();
  }

  long integer(const json& obj, const std::vector<std::string>& path, const char* key,
               long fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(child(path, key), "expected an integer");
    return v.get<long>();
  }

  std::uint64_t unsigned_integer(const json& obj, const std::vector<std::string>& path,
                                 const char* key, std::uint64_t fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(child(path, key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const json& obj, const std::vector<std::string>& path, const char* key,
               bool fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(child(path, key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& obj, const std::vector<std::string>& path, const char* key,
                     std::optional<std::string> fallback = std::nullopt) const {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      fail(path, std::string("missing key '") + key + "'");
    }
    const json& v = obj.at(key);
    if (v.is_number()) return format_double(v.get<double>());
    if (!v.is_string()) fail(child(path, key), "expected a string");
    return v.get<std::string>();
  }

  Interval interval(const json& obj, const std::vector<std::string>& path, const char* key) const {
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(child(path, key), "expected [lower, upper]");
    }
    const double lo = v[0].get<double>(), hi = v[1].get<double>();
    if (hi < lo) fail(child(path, key), "upper end below lower end");
    return {lo, hi};
  }

  static std::vector<std::string> child(std::vector<std::string> path, const std::string& key) {
    path.push_back(key);
    return path;
  }

 private:
  std::string position(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    bool found = false;
    for (const auto& key : path) {
      if (!key.empty() && std::isdigit(static_cast<unsigned char>(key.front()))) continue;
      const std::size_t at = find_key(key, pos);
      if (at == std::string::npos) break;
      pos = at;
      found = true;
    }
    return found ? line_col(pos) : "1:1";
  }

  std::size_t find_key(const std::string& key, std::size_t from) const {
    const std::string quoted = "\"" + key + "\"";
    for (std::size_t at = text_.find(quoted, from); at != std::string::npos;
         at = text_.find(quoted, at + 1)) {
      std::size_t k = at + quoted.size();
      while (k < text_.size() && std::isspace(static_cast<unsigned char>(text_[k]))) ++k;
      if (k < text_.size() && text_[k] == ':') return at;
    }
    return std::string::npos;
  }

  std::string line_col(std::size_t byte) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte; ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return std::to_string(line) + ":" + std::to_string(col);
  }

  const std::string& text_;
  std::string source_;
};

using Path = std::vector<std::string>;

NetworkShape read_shape(const Reader& r, const json& j, const Path& path, NetworkShape shape) {
  r.keys(j, path, {"hidden_layers", "width"});
  shape.hidden_layers = static_cast<int>(r.integer(j, path, "hidden_layers", shape.hidden_layers));
  shape.width = static_cast<int>(r.integer(j, path, "width", shape.width));
  return shape;
}

FuzzyNumber read_fuzzy_number(const Reader& r, const json& j, const Path& path) {
  r.keys(j, path, {"kind", "parameters"});
  const std::string kind = r.string(j, path, "kind");
  if (!j.contains("parameters") || !j.at("parameters").is_array()) {
    r.fail(Reader::child(path, "parameters"), "expected an array of numbers");
  }
  std::vector<double> v;
  for (const json& x : j.at("parameters")) {
    if (!x.is_number()) r.fail(Reader::child(path, "parameters"), "expected numbers");
    v.push_back(x.get<double>());
  }
  const auto need = [&](std::size_t lo, std::size_t hi) {
    if (v.size() < lo || v.size() > hi) {
      r.fail(Reader::child(path, "parameters"),
             kind + " takes " + std::to_string(lo) +
                 (hi != lo ? "-" + std::to_string(hi) : "") + " parameters");
    }
  };
  try {
    if (kind == "triangular") {
      need(3, 3);
      return FuzzyNumber::triangular(v[0], v[1], v[2]);
    }
    if (kind == "trapezoidal") {
      need(4, 4);
      return FuzzyNumber::trapezoidal(v[0], v[1], v[2], v[3]);
    }
    if (kind == "gaussian") {
      need(2, 3);
      return v.size() == 3 ? FuzzyNumber::gaussian(v[0], v[1], v[2])
                           : FuzzyNumber::gaussian(v[0], v[1]);
    }
  } catch (const InvalidBoundsError& e) {
    r.fail(path, e.what());
  } catch (const ContractError& e) {
    r.fail(path, e.what());
  }
  r.fail(Reader::child(path, "kind"), "expected triangular, trapezoidal or gaussian");
}

FieldFunction read_function(const Reader& r, const json& j, const Path& path, const char* key) {
  if (!j.contains(key)) r.fail(path, std::string("missing key '") + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return FieldFunction(v.get<double>());
  if (!v.is_string()) r.fail(Reader::child(path, key), "expected an expression or a number");
  try {
    return FieldFunction(v.get<std::string>());
  } catch (const ParseError& e) {
    r.fail(Reader::child(path, key), e.what());
  }
}

std::vector<std::string> read_strings(const Reader& r, const json& j, const Path& path,
                                      const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const json& v = j.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) r.fail(Reader::child(path, key), "expected a list of expressions");
  for (const json& s : v) {
    if (!s.is_string()) r.fail(Reader::child(path, key), "expected a list of expressions");
    out.push_back(s.get<std::string>());
  }
  return out;
}

// Inline problem; returns the fuzzy wrapper when the fields are fuzzy.
std::pair<ProblemDefinition, std::optional<FuzzyProblem>> read_problem(const Reader& r,
                                                                       const json& j) {
  const Path path{"problem"};
  r.keys(j, path,
         {"name", "space", "time", "constant_input", "components", "fields", "residual",
          "boundary", "initial"});
  ProblemDefinition p;
  p.name = r.string(j, path, "name", "custom");
  if (!j.contains("space")) r.fail(path, "missing key 'space'");
  p.space = r.interval(j, path, "space");
  if (j.contains("time")) p.time = r.interval(j, path, "time");
  p.constant_input = r.boolean(j, path, "constant_input", false);
  p.components = static_cast<int>(r.integer(j, path, "components", 1));
  p.residual = read_strings(r, j, path, "residual");
  if (p.residual.empty()) r.fail(path, "missing key 'residual'");

  std::vector<FuzzyField> fuzzy;
  int crisp = 0;
  if (j.contains("fields")) {
    if (!j.at("fields").is_array()) r.fail(Reader::child(path, "fields"), "expected a list");
    int i = 0;
    for (const json& f : j.at("fields")) {
      const Path fp{"problem", "fields", std::to_string(i++)};
      r.keys(f, fp, {"name", "lower", "upper", "fuzzy"});
      const std::string name = r.string(f, fp, "name", "");
      if (f.contains("fuzzy")) {
        if (f.contains("lower") || f.contains("upper")) {
          r.fail(fp, "give either lower/upper or fuzzy, not both");
        }
        const FuzzyNumber n = read_fuzzy_number(r, f.at("fuzzy"), Reader::child(fp, "fuzzy"));
        fuzzy.push_back(FuzzyField::uniform(n));
        p.fields.push_back({name, fuzzy.back().cut(0.0)});
      } else {
        ++crisp;
        p.fields.push_back({name, IntervalField(read_function(r, f, fp, "lower"),
                                                read_function(r, f, fp, "upper"))});
      }
    }
  }
  if (!fuzzy.empty() && crisp > 0) {
    r.fail(Reader::child(path, "fields"), "mixing fuzzy and interval fields is not supported");
  }

  if (j.contains("boundary")) {
    if (!j.at("boundary").is_array()) r.fail(Reader::child(path, "boundary"), "expected a list");
    int i = 0;
    for (const json& b : j.at("boundary")) {
      const Path bp{"problem", "boundary", std::to_string(i++)};
      r.keys(b, bp, {"x", "kind", "target", "component"});
      BoundaryCondition bc;
      if (!b.contains("x")) r.fail(bp, "missing key 'x'");
      bc.location = r.number(b, bp, "x", 0.0);
      const std::string kind = r.string(b, bp, "kind", "value");
      if (kind == "value") {
        bc.kind = BoundaryKind::Value;
      } else if (kind == "derivative") {
        bc.kind = BoundaryKind::Derivative;
      } else {
        r.fail(Reader::child(bp, "kind"), "expected value or derivative");
      }
      bc.target = r.string(b, bp, "target", "0");
      bc.component = static_cast<int>(r.integer(b, bp, "component", 0));
      p.boundary.push_back(bc);
    }
  }
  if (j.contains("initial")) {
    if (!j.at("initial").is_array()) r.fail(Reader::child(path, "initial"), "expected a list");
    int i = 0;
    for (const json& c : j.at("initial")) {
      const Path cp{"problem", "initial", std::to_string(i++)};
      r.keys(c, cp, {"value", "component"});
      p.initial.push_back(
          {r.string(c, cp, "value"), static_cast<int>(r.integer(c, cp, "component", 0))});
    }
  }
  try {
    p.validate();
  } catch (const ParseError& e) {
    r.fail(path, e.what());
  } catch (const InvalidBoundsError& e) {
    r.fail(path, e.what());
  } catch (const ContractError& e) {
    r.fail(path, e.what());
  }
  if (fuzzy.empty()) return {p, std::nullopt};
  FuzzyProblem f;
  f.base = p;
  f.fields = std::move(fuzzy);
  f.levels = {0.0, 0.25, 0.5, 0.75, 1.0};
  return {p, f};
}

void read_training(const Reader& r, const json& j, TrainingConfig& c) {
  const Path path{"training"};
  r.keys(j, path,
         {"epochs", "learning_rate", "w_g", "w_mm", "w_0", "w_u", "space_points", "time_points",
          "seed", "log_every", "snapshot_every", "normalize_umm"});
  c.epochs = r.integer(j, path, "epochs", c.epochs);
  c.learning_rate = r.number(j, path, "learning_rate", c.learning_rate);
  c.w_g = r.number(j, path, "w_g", c.w_g);
  c.w_mm = r.number(j, path, "w_mm", c.w_mm);
  c.w_0 = r.number(j, path, "w_0", c.w_0);
  c.w_u = r.number(j, path, "w_u", c.w_u);
  c.space_points = static_cast<int>(r.integer(j, path, "space_points", c.space_points));
  c.time_points = static_cast<int>(r.integer(j, path, "time_points", c.time_points));
  c.seed = r.unsigned_integer(j, path, "seed", c.seed);
  c.log_every = r.integer(j, path, "log_every", c.log_every);
  c.snapshot_every = r.integer(j, path, "snapshot_every", c.snapshot_every);
  c.normalize_umm = r.boolean(j, path, "normalize_umm", c.normalize_umm);
}

}  // namespace

RunConfig default_run_config(const std::string& problem) {
  RunConfig c;
  c.problem_name = problem;
  if (is_fuzzy_builtin(problem)) {
    c.fuzzy = builtin_fuzzy_problem(problem);
    c.problem = c.fuzzy->base;
    c.alpha_levels = c.fuzzy->levels;
  } else {
    c.problem = builtin_problem(problem);
  }
  c.training = TrainingConfig::defaults_for(c.problem);
  c.output = fs::path("runs") / problem;
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    if (const auto at = what.find("syntax error"); at != std::string::npos) what = what.substr(at);
    Reader(text, source).fail_at_byte(e.byte > 0 ? e.byte - 1 : 0, what);
  }
  const Reader r(text, source);
  r.keys(j, {}, {"problem", "training", "networks", "alpha_levels", "output", "jobs", "provenance"});
  if (!j.contains("problem")) r.fail({}, "missing key 'problem'");

  RunConfig c;
  const json& pj = j.at("problem");
  if (pj.is_string()) {
    try {
      c = default_run_config(pj.get<std::string>());
    } catch (const ConfigError& e) {
      r.fail({"problem"}, e.what());
    }
  } else if (pj.is_object()) {
    auto [problem, fuzzy] = read_problem(r, pj);
    c.problem = std::move(problem);
    c.problem_name = c.problem.name;
    c.inline_problem = pj.dump();
    c.fuzzy = std::move(fuzzy);
    if (c.fuzzy) c.alpha_levels = c.fuzzy->levels;
    c.training = TrainingConfig::defaults_for(c.problem);
    c.output = fs::path("runs") / c.problem.name;
  } else {
    r.fail({"problem"}, "expected a built-in name or an inline problem object");
  }

  if (j.contains("training")) read_training(r, j.at("training"), c.training);
  if (j.contains("networks")) {
    const json& n = j.at("networks");
    r.keys(n, {"networks"}, {"solution", "field"});
    if (n.contains("solution")) {
      c.training.solution_net =
          read_shape(r, n.at("solution"), {"networks", "solution"}, c.training.solution_net);
    }
    if (n.contains("field")) {
      c.training.field_net = read_shape(r, n.at("field"), {"networks", "field"}, c.training.field_net);
    }
  }
  if (j.contains("alpha_levels")) {
    if (!c.is_fuzzy()) r.fail({"alpha_levels"}, "only fuzzy problems take alpha levels");
    const json& a = j.at("alpha_levels");
    if (!a.is_array()) r.fail({"alpha_levels"}, "expected a list of numbers");
    c.alpha_levels.clear();
    for (const json& v : a) {
      if (!v.is_number()) r.fail({"alpha_levels"}, "expected a list of numbers");
      c.alpha_levels.push_back(v.get<double>());
    }
  }
  if (j.contains("output")) c.output = r.string(j, {}, "output");
  c.jobs = static_cast<int>(r.integer(j, {}, "jobs", c.jobs));
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string());
}

void validate(const RunConfig& config) {
  config.training.validate(config.problem);
  if (config.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (config.is_fuzzy()) validate_schedule(config.alpha_levels);
  if (config.output.empty()) throw ConfigError("output directory is empty");
}

std::string to_json(const RunConfig& c, bool with_provenance) {
  json j;
  j["problem"] = c.inline_problem ? json::parse(*c.inline_problem) : json(c.problem_name);
  const TrainingConfig& t = c.training;
  j["training"] = {{"epochs", t.epochs},
                   {"learning_rate", t.learning_rate},
                   {"w_g", t.w_g},
                   {"w_mm", t.w_mm},
                   {"w_0", t.w_0},
                   {"w_u", t.w_u},
                   {"space_points", t.space_points},
                   {"time_points", t.time_points},
                   {"seed", t.seed},
                   {"log_every", t.log_every},
                   {"snapshot_every", t.snapshot_every},
                   {"normalize_umm", t.normalize_umm}};
  j["networks"] = {
      {"solution",
       {{"hidden_layers", t.solution_net.hidden_layers}, {"width", t.solution_net.width}}},
      {"field", {{"hidden_layers", t.field_net.hidden_layers}, {"width", t.field_net.width}}}};
  if (c.is_fuzzy()) j["alpha_levels"] = c.alpha_levels;
  j["output"] = c.output.generic_string();
  j["jobs"] = c.jobs;
  if (with_provenance) {
    j["provenance"] = {{"program", "ipinn"},
                       {"version", "0.1.0"},
                       {"seed", t.seed},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                     std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                     std::to_string(EIGEN_MINOR_VERSION)},
                       {"compiler", __VERSION__},
                       {"membership_interpolation", "linear"}};
  }
  return j.dump(2) + "\n";
}

}  // namespace ipinn::io
