#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wsol/commands.hpp"
#include "wsol/kernels.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string mode;
  std::string ordering;
  std::string weighting;
  std::string objectness;
  int threads = 0;

  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON config file; flags override its keys");
  flags.seed_opt = sub->add_option("--seed", flags.seed, "global seed");
  sub->add_option("--out", flags.out_dir, "output directory");
  sub->add_option("--mode", flags.mode, "size regressor training mode")
      ->check(CLI::IsMember({"class-specific", "class-generic", "across-class"}));
  sub->add_option("--ordering", flags.ordering, "batch ordering")
      ->check(CLI::IsMember({"size", "random"}));
  sub->add_option("--weighting", flags.weighting, "size weighting in re-localization")
      ->check(CLI::IsMember({"on", "off"}));
  sub->add_option("--objectness", flags.objectness, "objectness factor in scoring")
      ->check(CLI::IsMember({"on", "off"}));
  sub->add_option("--threads", flags.threads, "worker threads for kernel evaluation");
}

wsol::RunConfig resolve(const CommonFlags& flags) {
  wsol::RunConfig cfg;
  if (!flags.config_path.empty()) cfg = wsol::load_config(flags.config_path);
  if (flags.seed_opt != nullptr && flags.seed_opt->count() > 0) cfg.seed = flags.seed;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.mode.empty()) cfg.regressor.mode = wsol::regressor_mode_from_name(flags.mode);
  if (!flags.ordering.empty())
    cfg.curriculum.ordering = wsol::ordering_from_name(flags.ordering);
  if (!flags.weighting.empty()) cfg.curriculum.use_size_weighting = flags.weighting == "on";
  if (!flags.objectness.empty()) cfg.curriculum.use_objectness = flags.objectness == "on";
  if (flags.threads > 0) wsol::set_num_threads(flags.threads);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"size-ordered curriculum for weakly supervised object localization"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* gen = app.add_subcommand("gen", "generate the synthetic dataset triple");
  CLI::App* train_size = app.add_subcommand("train-size", "fit the object size regressor(s)");
  CLI::App* estimate = app.add_subcommand("estimate", "estimate object sizes for the wsol set");
  CLI::App* wsol_cmd = app.add_subcommand("wsol", "run the batched localization loop per class");
  CLI::App* eval = app.add_subcommand("eval", "compute metrics for a finished run");
  CLI::App* sweep = app.add_subcommand("sweep", "run seed x variant and N-ladder experiments");
  for (CLI::App* sub : {gen, train_size, estimate, wsol_cmd, eval, sweep})
    add_common(sub, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    wsol::RunConfig cfg = resolve(flags);
    if (gen->parsed()) wsol::cmd_gen(cfg);
    if (train_size->parsed()) wsol::cmd_train_size(cfg);
    if (estimate->parsed()) wsol::cmd_estimate(cfg);
    if (wsol_cmd->parsed()) wsol::cmd_wsol(cfg);
    if (eval->parsed()) wsol::cmd_eval(cfg);
    if (sweep->parsed()) wsol::cmd_sweep(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
