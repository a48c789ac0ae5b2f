#include <iostream>

#include "CLI11.hpp"
#include "experiment.hpp"

namespace ex = stochinv::experiment;

int main(int argc, char** argv) {
  CLI::App app{"stochinv: far-field correlation experiments for random sources"};
  app.require_subcommand(1);

  std::string config_path;
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* run = app.add_subcommand("run", "run an experiment and write its manifest");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  std::string output_override;
  run->add_option("--output-dir", output_override, "override output_dir from the config");

  std::string manifest_path, series, out_path;
  auto* emit = app.add_subcommand("emit", "write one series of a finished run as tidy CSV");
  emit->add_option("manifest", manifest_path, "manifest.json of a run")->required();
  emit->add_option("--series", series, "scaling | correlation | reconstruction | probe | asymptote")->required();
  emit->add_option("--out", out_path, "output CSV (default: <series>.tidy.csv next to the manifest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const auto cfg = ex::load_config(config_path);
      const auto prep = ex::prepare(cfg);
      std::cout << "ok: " << to_string(prep.model.kind()) << " d=" << prep.model.dim() << " m=" << cfg.m
                << " s=" << cfg.s << " grid=" << cfg.points_per_axis << "\n";
      return 0;
    }
    if (*run) {
      auto cfg = ex::load_config(config_path);
      if (!output_override.empty()) cfg.output_dir = output_override;
      const auto manifest = ex::run(cfg);
      for (const auto& s : manifest.stages) std::cout << s.name << ": " << s.seconds << " s\n";
      for (const auto& [key, value] : manifest.summary) std::cout << key << " = " << value << "\n";
      std::cout << "manifest: " << (manifest.directory / "manifest.json").string() << "\n";
      return 0;
    }
    const auto manifest = ex::load_manifest(manifest_path);
    const std::filesystem::path out =
        out_path.empty() ? manifest.directory / (series + ".tidy.csv") : std::filesystem::path(out_path);
    std::cout << ex::emit_plot_data(manifest, series, out).string() << "\n";
    return 0;
  } catch (const stochinv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
