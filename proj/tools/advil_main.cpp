#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "advil/experiment.hpp"
#include "advil/metrics.hpp"

namespace {

int fail(const std::string& message, int code) {
  std::cerr << "error: " << message << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial imitation learning in linear MDPs: experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool smoke = false;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file or a preset");
  run->add_option("config", config_path, "Config file (key = value lines)");
  run->add_option("--preset", preset_name, "Named preset (see list-presets)");
  run->add_option("--seed", seed, "Top-level seed");
  run->add_option("--out", out_dir, "Output root; files go to <out>/seed<N>/");
  run->add_flag("--smoke", smoke, "Reduced budget for a quick end-to-end check");

  std::string emit_name;
  auto* list = app.add_subcommand("list-presets", "List preset names");
  list->add_option("--emit", emit_name, "Print the full config of one preset instead");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and check a config file");
  validate->add_option("config", validate_path, "Config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      if (!emit_name.empty()) {
        std::cout << advil::emit_config(advil::preset(emit_name));
      } else {
        for (const std::string& name : advil::preset_names()) std::cout << name << '\n';
      }
      return 0;
    }
    if (*validate) {
      const advil::ExperimentConfig c = advil::load_config(validate_path);
      advil::validate_config(c);
      std::cout << "ok: " << c.experiment << " (" << c.algorithm.kind << " on " << c.env.kind << ")\n";
      return 0;
    }
    if (config_path.empty() == preset_name.empty()) return fail("run needs exactly one of <config> or --preset", 2);
    advil::ExperimentConfig c = preset_name.empty() ? advil::load_config(config_path) : advil::preset(preset_name);
    if (seed) c.seed = *seed;
    if (!out_dir.empty()) c.out = out_dir;
    if (smoke) c = advil::smoke_config(c);
    advil::validate_config(c);
    const advil::ExperimentResult r = advil::run_experiment(c);
    std::cout << c.experiment << " seed " << c.seed << ": normalized_return_out="
              << (r.normalized_return_out ? advil::format_number(*r.normalized_return_out) : "null")
              << " regret_final=" << (r.regret_final ? advil::format_number(*r.regret_final) : "null")
              << " wall_time_s=" << advil::format_number(r.wall_time_s) << " -> " << r.directory.string() << '\n';
    return 0;
  } catch (const advil::InvalidInput& e) {
    return fail(e.what(), 2);
  } catch (const std::exception& e) {
    return fail(e.what(), 1);
  }
}
