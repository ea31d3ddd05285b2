// Command-line front end; wired to the shared library through the public C
// API only.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pglake/pglake.h"

namespace {

struct ConfigDeleter {
  void operator()(pglake_config* c) const { pglake_config_free(c); }
};
using ConfigHandle = std::unique_ptr<pglake_config, ConfigDeleter>;

int fail(pglake_status status) {
  std::fprintf(stderr, "pglake: %s\n", pglake_last_error());
  return static_cast<int>(status);
}

ConfigHandle make_config(const std::string& config_path,
                         const std::vector<std::string>& overrides, pglake_status& status) {
  pglake_config* raw = nullptr;
  status = config_path.empty() ? pglake_config_default(&raw)
                               : pglake_config_load(config_path.c_str(), &raw);
  ConfigHandle config(raw);
  if (status != PGLAKE_OK) return config;
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "pglake: --set expects key=value, got '%s'\n", kv.c_str());
      status = PGLAKE_ERR_CONFIG;
      return config;
    }
    status = pglake_config_set(config.get(), kv.substr(0, eq).c_str(),
                               kv.substr(eq + 1).c_str());
    if (status != PGLAKE_OK) return config;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physics-guided recurrent networks for lake temperature modeling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pglake_version()));

  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
  app.add_option("-c,--config", config_path, "experiment config (JSON)");
  app.add_option("--set", overrides, "override a config key (section.key=value)")
      ->take_all();
  app.add_flag("--print-config", print_config, "print the effective config and exit");

  struct Command {
    const char* name;
    const char* help;
    pglake_status (*run)(const pglake_config*);
  };
  const Command commands[] = {
      {"gen", "generate the synthetic dataset files", pglake_cmd_gen},
      {"train", "train the configured model variant", pglake_cmd_train},
      {"eval", "evaluate on the test period and write metrics", pglake_cmd_eval},
      {"thermocline", "extract thermocline depths from a field file", pglake_cmd_thermocline},
      {"export-plot", "reshape field files into one tidy table", pglake_cmd_export_plot},
  };
  for (const Command& c : commands) app.add_subcommand(c.name, c.help);

  CLI11_PARSE(app, argc, argv);

  pglake_status status = PGLAKE_OK;
  ConfigHandle config = make_config(config_path, overrides, status);
  if (status != PGLAKE_OK) return fail(status);

  if (print_config) {
    size_t needed = 0;
    pglake_config_dump(config.get(), nullptr, 0, &needed);
    std::string text(needed, '\0');
    status = pglake_config_dump(config.get(), text.data(), text.size(), nullptr);
    if (status != PGLAKE_OK) return fail(status);
    std::fputs(text.c_str(), stdout);
    return 0;
  }

  for (const Command& c : commands)
    if (app.get_subcommand(c.name)->parsed()) {
      status = c.run(config.get());
      return status == PGLAKE_OK ? 0 : fail(status);
    }
  return 0;
}
