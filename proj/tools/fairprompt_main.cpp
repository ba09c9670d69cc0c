#include <fairprompt/commands.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using fairprompt::config::RunConfig;

// exit codes: 0 ok, 1 usage, 2 numerical failure, 3 I/O
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0)
      throw fairprompt::UsageError("expected '--key value' override, got '" + tok + "'");
    if (i + 1 >= extras.size())
      throw fairprompt::UsageError("override '" + tok + "' is missing its value");
    out.emplace_back(tok.substr(2), extras[i + 1]);
    ++i;
  }
  return out;
}

RunConfig build_config(const std::string& config_path, const std::vector<std::string>& extras) {
  RunConfig cfg;
  if (!config_path.empty()) cfg.load_file(config_path);
  cfg.apply_overrides(parse_overrides(extras));
  cfg.apply_env_seed();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairprompt: fairness-aware graph prompt tuning"};
  app.require_subcommand(1);

  std::string config_path;
  struct Sub {
    CLI::App* cmd;
    void (*fn)(const RunConfig&);
  };
  std::vector<Sub> subs;
  auto add = [&](const std::string& name, const std::string& desc, void (*fn)(const RunConfig&)) {
    CLI::App* c = app.add_subcommand(name, desc);
    c->add_option("--config", config_path, "configuration file (key = value with [sections])");
    c->allow_extras();
    subs.push_back({c, fn});
  };
  add("gen-synth", "generate a synthetic biased graph dataset", fairprompt::cli::cmd_gen_synth);
  add("pretrain", "self-supervised encoder pre-training (gae|dgi)", fairprompt::cli::cmd_pretrain);
  add("tune", "prompt tuning on a frozen encoder", fairprompt::cli::cmd_tune);
  add("ablate", "run adprompt/afr_only/amc_only/classifier_only over seeds", fairprompt::cli::cmd_ablate);
  add("sweep", "sweep lambda or seed and chart the results", fairprompt::cli::cmd_sweep);
  add("adapt-check", "edge-deletion fitting probe on a small graph", fairprompt::cli::cmd_adapt_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    for (const auto& sub : subs) {
      if (sub.cmd->parsed()) {
        sub.fn(build_config(config_path, sub.cmd->remaining()));
        return 0;
      }
    }
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const fairprompt::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fairprompt::ShapeError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fairprompt::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fairprompt::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fairprompt::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}
