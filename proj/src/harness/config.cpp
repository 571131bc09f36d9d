#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "spslab/harness.hpp"

namespace spslab {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

std::int64_t to_int(const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError("expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& v) {
  const std::int64_t i = to_int(v);
  if (i < 0) throw ConfigError("expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(i);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true/false, got '" + v + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::vector<std::int64_t> to_int_list(const std::string& v) {
  std::vector<std::int64_t> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(trim(item)));
  return out;
}

std::string join(const std::vector<std::int64_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(xs[i]);
  }
  return s;
}

std::string emit_seeds(const std::vector<std::uint64_t>& seeds) {
  bool contiguous = seeds.size() > 1;
  for (std::size_t i = 1; i < seeds.size() && contiguous; ++i) contiguous = seeds[i] == seeds[i - 1] + 1;
  if (contiguous) return std::to_string(seeds.front()) + ".." + std::to_string(seeds.back());
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(seeds[i]);
  }
  return s;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"problem.class",
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "quadratic" && v != "absolute" && v != "poisson" && v != "distillation" && v != "csv")
           throw ConfigError("unknown problem class '" + v + "'");
         c.problem.cls = v;
       },
       [](const ExperimentConfig& c) { return c.problem.cls; }},
      {"problem.n", [](ExperimentConfig& c, const std::string& v) { c.problem.n = to_int(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.problem.n); }},
      {"problem.d", [](ExperimentConfig& c, const std::string& v) { c.problem.d = to_int(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.problem.d); }},
      {"problem.seed", [](ExperimentConfig& c, const std::string& v) { c.problem.seed = to_uint(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.problem.seed); }},
      {"problem.interpolated", [](ExperimentConfig& c, const std::string& v) { c.problem.interpolated = to_bool(v); },
       [](const ExperimentConfig& c) { return from_bool(c.problem.interpolated); }},
      {"problem.nu", [](ExperimentConfig& c, const std::string& v) { c.problem.nu = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.problem.nu); }},
      {"problem.noise", [](ExperimentConfig& c, const std::string& v) { c.problem.noise = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.problem.noise); }},
      {"problem.d_student", [](ExperimentConfig& c, const std::string& v) { c.problem.d_student = to_int(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.problem.d_student); }},
      {"problem.ridge", [](ExperimentConfig& c, const std::string& v) { c.problem.ridge = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.problem.ridge); }},
      {"problem.unit_rows", [](ExperimentConfig& c, const std::string& v) { c.problem.unit_rows = to_bool(v); },
       [](const ExperimentConfig& c) { return from_bool(c.problem.unit_rows); }},
      {"problem.weight_scale", [](ExperimentConfig& c, const std::string& v) { c.problem.weight_scale = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.problem.weight_scale); }},
      {"problem.path", [](ExperimentConfig& c, const std::string& v) { c.problem.path = v; },
       [](const ExperimentConfig& c) { return c.problem.path; }},

      {"optimizer.method", [](ExperimentConfig& c, const std::string& v) { c.optimizer.method = method_from_string(v); },
       [](const ExperimentConfig& c) { return to_string(c.optimizer.method); }},
      {"optimizer.optloss",
       [](ExperimentConfig& c, const std::string& v) { c.optimizer.optloss.kind = opt_loss_kind_from_string(v); },
       [](const ExperimentConfig& c) { return to_string(c.optimizer.optloss.kind); }},
      {"optimizer.optloss_value",
       [](ExperimentConfig& c, const std::string& v) { c.optimizer.optloss.custom_value = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.optimizer.optloss.custom_value); }},
      {"optimizer.gamma_b", [](ExperimentConfig& c, const std::string& v) { c.optimizer.gamma_b = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.optimizer.gamma_b); }},
      {"optimizer.epsilon", [](ExperimentConfig& c, const std::string& v) { c.optimizer.epsilon = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.optimizer.epsilon); }},
      {"optimizer.lambda",
       [](ExperimentConfig& c, const std::string& v) {
         c.optimizer.lambda = v == "linear" ? LambdaSchedule::linear() : LambdaSchedule::constant(to_double(v));
       },
       [](const ExperimentConfig& c) {
         return c.optimizer.lambda.kind == LambdaSchedule::Kind::Linear ? std::string("linear")
                                                                        : format_real(c.optimizer.lambda.value);
       }},
      {"optimizer.beta2", [](ExperimentConfig& c, const std::string& v) { c.optimizer.beta2 = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.optimizer.beta2); }},
      {"optimizer.eps_pre", [](ExperimentConfig& c, const std::string& v) { c.optimizer.eps_pre = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.optimizer.eps_pre); }},
      {"optimizer.lr", [](ExperimentConfig& c, const std::string& v) { c.optimizer.lr = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.optimizer.lr); }},
      {"optimizer.lr_rule", [](ExperimentConfig& c, const std::string& v) { c.optimizer.lr_rule = lr_rule_from_string(v); },
       [](const ExperimentConfig& c) { return to_string(c.optimizer.lr_rule); }},
      {"optimizer.momentum", [](ExperimentConfig& c, const std::string& v) { c.optimizer.momentum = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.optimizer.momentum); }},
      {"optimizer.variance", [](ExperimentConfig& c, const std::string& v) { c.optimizer.variance = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.optimizer.variance); }},

      {"run.T", [](ExperimentConfig& c, const std::string& v) { c.run.T = to_int(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.run.T); }},
      {"run.epochs", [](ExperimentConfig& c, const std::string& v) { c.run.epochs = to_double(v); },
       [](const ExperimentConfig& c) { return format_real(c.run.epochs); }},
      {"run.batch_size", [](ExperimentConfig& c, const std::string& v) { c.run.batch_size = to_int(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.run.batch_size); }},
      {"run.seeds", [](ExperimentConfig& c, const std::string& v) { c.run.seeds = parse_seed_list(v); },
       [](const ExperimentConfig& c) { return emit_seeds(c.run.seeds); }},
      {"run.checkpoints", [](ExperimentConfig& c, const std::string& v) { c.run.checkpoints = to_int_list(v); },
       [](const ExperimentConfig& c) { return join(c.run.checkpoints); }},

      {"output.dir", [](ExperimentConfig& c, const std::string& v) { c.output.dir = v; },
       [](const ExperimentConfig& c) { return c.output.dir; }},
      {"output.emit_trajectory",
       [](ExperimentConfig& c, const std::string& v) { c.output.emit_trajectory = to_bool(v); },
       [](const ExperimentConfig& c) { return from_bool(c.output.emit_trajectory); }},
  };
  return table;
}

void validate(const ExperimentConfig& c) {
  if (c.problem.n <= 0) throw ConfigError("problem.n must be positive");
  if (c.problem.d <= 0) throw ConfigError("problem.d must be positive");
  if (c.problem.nu < 0.0) throw ConfigError("problem.nu must be >= 0");
  if (c.problem.noise < 0.0) throw ConfigError("problem.noise must be >= 0");
  if (c.problem.d_student < 0 || c.problem.d_student > c.problem.d)
    throw ConfigError("problem.d_student must be in [0, problem.d]");
  if (c.problem.cls == "csv" && c.problem.path.empty()) throw ConfigError("problem.path is required for class csv");
  if (c.run.T < 0) throw ConfigError("run.T must be >= 0");
  if (c.run.epochs < 0.0) throw ConfigError("run.epochs must be >= 0");
  if (c.run.batch_size <= 0) throw ConfigError("run.batch_size must be positive");
  if (c.run.seeds.empty()) throw ConfigError("run.seeds must not be empty");
  if (c.optimizer.optloss.kind != OptLossKind::Custom && c.optimizer.optloss.custom_value != 0.0)
    throw ConfigError("optimizer.optloss_value is only meaningful with optloss = custom");
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  const std::string s = trim(text);
  std::vector<std::uint64_t> out;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const std::uint64_t lo = to_uint(trim(s.substr(0, dots)));
    const std::uint64_t hi = to_uint(trim(s.substr(dots + 2)));
    if (hi < lo) throw ConfigError("seed range '" + s + "' is empty");
    for (std::uint64_t k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_uint(trim(item)));
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::string where = source + " line " + std::to_string(lineno) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const Field* field = nullptr;
    for (const auto& f : fields())
      if (key == f.key) field = &f;
    if (!field) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      field->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

std::string config_digest(const ExperimentConfig& cfg) { return digest_hex(emit_config(cfg)); }

std::int64_t resolved_steps(const RunSpec& run, Index n) {
  if (run.epochs <= 0.0) return run.T;
  return static_cast<std::int64_t>(std::ceil(run.epochs * static_cast<double>(n) / static_cast<double>(run.batch_size)));
}

}  // namespace spslab
