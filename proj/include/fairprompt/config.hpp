#pragma once

#include <fairprompt/types.hpp>

#include <map>
#include <string>
#include <vector>

namespace fairprompt::config {

/// Flat key/value configuration. Keys are `<section>.<name>`; the config file
/// uses `[section]` headers with `key = value` lines, and command-line
/// overrides use the full dotted key. Unknown keys are rejected. Seeds left
/// unset fall back to the FAIRPROMPT_SEED environment variable.
class RunConfig {
 public:
  /// Defaults only.
  RunConfig();

  void load_file(const std::string& path);
  /// `--key value` pairs, already split.
  void apply_overrides(const std::vector<std::pair<std::string, std::string>>& overrides);
  /// Apply the FAIRPROMPT_SEED fallback to any *.seed key not explicitly set.
  void apply_env_seed();

  void set(const std::string& key, const std::string& value);
  bool is_set_explicitly(const std::string& key) const;

  std::string get_str(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<Index> get_index_list(const std::string& key) const;
  std::vector<std::uint64_t> get_seed_list(const std::string& key) const;

  /// Sorted `key = value` lines for the run artifact.
  std::string resolved_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

}  // namespace fairprompt::config
