#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tfk/commands.hpp"
#include "tfk/error.hpp"

namespace {

using Handler = int (*)(const tfk::RunConfig&, std::ostream&);

struct Flag {
  const char* key;
  const char* description;
};

const Flag kFlags[] = {
    {"task", "forces | refinement | gravity"},
    {"lmax", "maximum rotation order (0, 1, 2)"},
    {"delta", "Huber delta in task units"},
    {"lr", "learning rate"},
    {"optimizer", "sgd | adam"},
    {"batches", "total training batches"},
    {"validation_interval", "batches between validations"},
    {"seed", "random seed"},
    {"replicates", "independently seeded training runs"},
    {"k", "neighborhood size"},
    {"out", "output directory"},
    {"data", "dataset manifest (default <out>/manifest.txt)"},
    {"systems", "number of generated systems"},
    {"atoms", "atoms per generated system"},
    {"box", "cluster box edge (A)"},
    {"solvent_fraction", "fraction of atoms masked out of the loss"},
    {"noise", "refinement coordinate noise (A)"},
    {"candidates", "candidates per native structure"},
    {"checkpoint", "checkpoint file"},
    {"resume", "last.json of a run to continue"},
    {"split", "split to evaluate"},
    {"candidate", "candidate structure file"},
    {"target", "native structure file"},
    {"step", "refinement step size in (0, 1]"},
    {"level", "verification level: quick | full"},
    {"inject_fault", "add an equivariance-breaking bias (verification demo)"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant geometric tensor prediction toolkit"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "key = value configuration file");

  std::map<std::string, std::optional<std::string>> overrides;
  for (const auto& f : kFlags) {
    overrides[f.key];
    app.add_option("--" + std::string(f.key), overrides[f.key], f.description);
  }

  const std::pair<const char*, Handler> commands[] = {
      {"generate", tfk::cmd_generate}, {"train", tfk::cmd_train},   {"eval", tfk::cmd_eval},
      {"refine", tfk::cmd_refine},     {"verify", tfk::cmd_verify},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, _] : commands) {
    subs[name] = app.add_subcommand(name);
    subs[name]->fallthrough();
  }
  subs["generate"]->description("write a synthetic dataset and manifest");
  subs["train"]->description("train one or more replicates");
  subs["eval"]->description("metrics, baselines and plot data for a checkpoint");
  subs["refine"]->description("refinement field between a candidate and its native structure");
  subs["verify"]->description("equivariance, gradient and algebra checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? tfk::kExitOk : tfk::kExitUsage;
  }

  try {
    tfk::RunConfig config;
    if (!config_file.empty()) config.load_file(config_file);
    config.load_environment();
    for (const auto& [key, value] : overrides) {
      if (value) config.set(key, *value);
    }
    for (const auto& [name, handler] : commands) {
      if (subs[name]->parsed()) return handler(config, std::cout);
    }
  } catch (const tfk::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return tfk::kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tfk::kExitUsage;
  }
  return tfk::kExitUsage;
}
