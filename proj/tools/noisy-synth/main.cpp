#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nsynth/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Controller synthesis from noisy data", "noisy-synth"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  const auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config, "run configuration (JSON)");
    if (config_required) opt->required();
    sub->add_option("--seed", seed, "random seed, overrides the config");
    sub->add_option("--out", out, "output directory, overrides the config");
  };

  auto* simulate = app.add_subcommand("simulate", "simulate a noisy trajectory");
  common(simulate, true);
  auto* synth = app.add_subcommand("synth", "synthesize a controller");
  common(synth, true);
  auto* verify = app.add_subcommand("verify", "verify a stored controller");
  common(verify, true);
  auto* slemma = app.add_subcommand("slemma", "matrix S-lemma check");
  std::string slemma_action = "check";
  slemma->add_option("action", slemma_action, "check")
      ->check(CLI::IsMember({"check"}));
  common(slemma, true);
  auto* exp = app.add_subcommand("exp", "run an experiment");
  std::string exp_name;
  exp->add_option("name", exp_name, "comparison | sweep | aircraft")
      ->required()
      ->check(CLI::IsMember({"comparison", "sweep", "aircraft"}));
  common(exp, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nsynth::kExitConfig;
  }

  try {
    nsynth::RunConfig cfg =
        config.empty() ? nsynth::RunConfig{} : nsynth::RunConfig::load(config);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--out")) cfg.out = out;
    if (sub == simulate) return nsynth::cmd_simulate(cfg);
    if (sub == synth) return nsynth::cmd_synth(cfg);
    if (sub == verify) return nsynth::cmd_verify(cfg);
    if (sub == slemma) return nsynth::cmd_slemma(cfg);
    return nsynth::cmd_exp(exp_name, cfg);
  } catch (const nsynth::ConfigError& e) {
    std::cerr << "noisy-synth: " << e.what() << '\n';
    return nsynth::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "noisy-synth: " << e.what() << '\n';
    return nsynth::kExitIndeterminate;
  }
}
