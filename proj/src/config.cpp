#include <fairprompt/config.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fairprompt::config {

namespace {

const std::vector<std::pair<const char*, const char*>>& default_entries() {
  static const std::vector<std::pair<const char*, const char*>> defaults = {
      {"data.nodes", ""},
      {"data.edges", ""},
      {"data.name", "dataset"},
      {"data.drop_sensitive", "false"},

      {"synth.n", "2000"},
      {"synth.p_in", "0.02"},
      {"synth.p_out", "0.002"},
      {"synth.d_label", "8"},
      {"synth.d_sens", "8"},
      {"synth.d_noise", "8"},
      {"synth.mu_label", "0.4"},
      {"synth.mu_sens", "1.0"},
      {"synth.rho_ys", "0.7"},
      {"synth.seed", "7"},

      {"pretrain.strategy", "gae"},
      {"pretrain.epochs", "300"},
      {"pretrain.lr", "0.001"},
      {"pretrain.negative_ratio", "1"},
      {"pretrain.seed", "1"},
      {"pretrain.hidden", "128,128"},

      {"tune.mode", "adprompt"},
      {"tune.lambda", "5.0"},
      {"tune.lr", "0.001"},
      {"tune.epochs", "300"},
      {"tune.seed", "1"},
      {"tune.k_shot", "50"},
      {"tune.adversary_scope", "all_nodes"},
      {"tune.d_u", "64"},
      {"tune.d_w", "64"},
      {"tune.afr_init", "half"},
      {"tune.leaky_slope", "0.01"},

      {"sweep.param", "lambda"},
      {"sweep.values", "0,1,3,5,7,9"},
      {"sweep.seeds", "1,2,3"},

      {"ablate.seeds", "1,2,3"},

      {"adapt.case", "default"},
      {"adapt.n", "10"},
      {"adapt.steps", "2000"},
      {"adapt.lr", "0.02"},
      {"adapt.seed", "1"},
      {"adapt.hidden", "16,16"},
      {"adapt.d_w", "64"},

      {"io.outdir", "out"},
      {"io.encoder", ""},
      {"io.metrics", ""},
  };
  return defaults;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& [k, v] : default_entries()) values_[k] = v;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown configuration key '" + key + "'");
  it->second = value;
  explicit_[key] = true;
}

bool RunConfig::is_set_explicitly(const std::string& key) const {
  auto it = explicit_.find(key);
  return it != explicit_.end() && it->second;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw UsageError("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    set(key, value);
  }
}

void RunConfig::apply_overrides(const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (const auto& [k, v] : overrides) set(k, v);
}

void RunConfig::apply_env_seed() {
  const char* env = std::getenv("FAIRPROMPT_SEED");
  if (env == nullptr || *env == '\0') return;
  for (const char* key : {"synth.seed", "pretrain.seed", "tune.seed", "adapt.seed"}) {
    if (!is_set_explicitly(key)) values_[key] = env;
  }
}

std::string RunConfig::get_str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown configuration key '" + key + "'");
  return it->second;
}

long long RunConfig::get_int(const std::string& key) const {
  const std::string v = get_str(key);
  try {
    std::size_t used = 0;
    const long long r = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw UsageError("key '" + key + "': expected integer, got '" + v + "'");
  }
}

std::uint64_t RunConfig::get_seed(const std::string& key) const {
  const long long v = get_int(key);
  if (v < 0) throw UsageError("key '" + key + "': seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

double RunConfig::get_real(const std::string& key) const {
  const std::string v = get_str(key);
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw UsageError("key '" + key + "': expected number, got '" + v + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<double> RunConfig::get_real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& tok : split_list(get_str(key))) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("key '" + key + "': bad list element '" + tok + "'");
    }
  }
  return out;
}

std::vector<Index> RunConfig::get_index_list(const std::string& key) const {
  std::vector<Index> out;
  for (const auto& tok : split_list(get_str(key))) {
    try {
      out.push_back(static_cast<Index>(std::stoll(tok)));
    } catch (const std::exception&) {
      throw UsageError("key '" + key + "': bad list element '" + tok + "'");
    }
  }
  return out;
}

std::vector<std::uint64_t> RunConfig::get_seed_list(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& tok : split_list(get_str(key))) {
    try {
      out.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw UsageError("key '" + key + "': bad list element '" + tok + "'");
    }
  }
  return out;
}

std::string RunConfig::resolved_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

}  // namespace fairprompt::config
