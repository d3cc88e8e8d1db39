#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sgcn/dataset_io.hpp"
#include "sgcn/errors.hpp"
#include "sgcn/experiments.hpp"
#include "sgcn/models.hpp"
#include "sgcn/plot.hpp"
#include "sgcn/rng.hpp"
#include "sgcn/sbm.hpp"
#include "sgcn/spectral.hpp"

namespace fs = std::filesystem;
using namespace sgcn;

namespace {

struct Common {
  std::string bundle;
  std::string seeds = "0,1,2";
  std::string out;
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::string> model;
  std::optional<int> hidden_layers;
  std::optional<int> epochs;
  std::optional<int> patience;
  std::optional<double> lr;
  std::optional<double> dropout;
  std::optional<double> weight_decay;
};

void add_seed_out(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seeds, "Comma-separated seed list")->capture_default_str();
  app->add_option("--out", c.out, "Output path")->required();
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--bundle", c.bundle, "Bundle directory")->required();
  add_seed_out(app, c);
  app->add_option("--config", c.config, "key=value model configuration file");
  app->add_option("--set", c.overrides, "Extra key=value configuration overrides");
  app->add_option("--model", c.model, "gcn or mlp");
  app->add_option("--hidden-layers", c.hidden_layers, "Hidden layers (depth - 1)");
  app->add_option("--epochs", c.epochs, "Maximum epochs");
  app->add_option("--patience", c.patience, "Early-stopping patience");
  app->add_option("--lr", c.lr, "Adam learning rate");
  app->add_option("--dropout", c.dropout, "Dropout rate");
  app->add_option("--weight-decay", c.weight_decay, "L2 weight decay");
}

ModelConfig build_config(const Common& c, ModelConfig base = {}) {
  ModelConfig cfg = c.config.empty() ? base : read_config_file(c.config, base);
  if (c.model) apply_config_entry(cfg, "kind", *c.model);
  if (c.hidden_layers) cfg.hidden_layers = *c.hidden_layers;
  if (c.epochs) cfg.epochs = *c.epochs;
  if (c.patience) cfg.patience = *c.patience;
  if (c.lr) cfg.lr = *c.lr;
  if (c.dropout) cfg.dropout = *c.dropout;
  if (c.weight_decay) cfg.weight_decay = *c.weight_decay;
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
    apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

Workspace load(const Common& c) {
  std::vector<std::string> warnings;
  GraphBundle b = read_bundle(c.bundle, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return Workspace(std::move(b));
}

std::vector<double> percents_to_fractions(const std::vector<double>& percents) {
  std::vector<double> out;
  out.reserve(percents.size());
  for (double p : percents) out.push_back(p / 100.0);
  return out;
}

std::vector<double> fraction_list(const std::string& text) {
  return percents_to_fractions(text.empty() ? kFrequencyPercents : parse_double_list(text));
}

std::vector<int> int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_double_list(text)) {
    if (v != static_cast<int>(v) || v < 1) throw InputError("expected positive integers: " + text);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void write_out(const CsvTable& t, const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_csv(t, p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral band-pass experiments for GCNs and MLPs"};
  app.require_subcommand(1);

  Common common;

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of the propagation operator");
  add_common(spectrum, common);
  Index top_k = 0;
  Index bottom_k = 0;
  spectrum->add_option("--top", top_k, "Only the k largest, via Lanczos");
  spectrum->add_option("--bottom", bottom_k, "Only the k smallest, via Lanczos");

  std::string fractions_text;
  std::string depths_text = "2,4,8";
  auto* ablate_low = app.add_subcommand("ablate-low", "GCN accuracy vs retained low band");
  add_common(ablate_low, common);
  ablate_low->add_option("--fractions", fractions_text, "Percent list (default: grid frequencies)");
  ablate_low->add_option("--depths", depths_text, "Depth list")->capture_default_str();

  int high_depth = 2;
  auto* ablate_high = app.add_subcommand("ablate-high", "GCN accuracy vs retained high band");
  add_common(ablate_high, common);
  ablate_high->add_option("--fractions", fractions_text, "Percent list (default: grid frequencies)");
  ablate_high->add_option("--depth", high_depth, "GCN depth")->capture_default_str();

  auto* augment = app.add_subcommand("augment", "MLP accuracy vs appended eigenvectors");
  add_common(augment, common);
  augment->add_option("--fractions", fractions_text,
                      "Percent list, 0 = no augmentation (default: 0 and grid frequencies)");

  std::string curve_path;
  auto* train_cmd = app.add_subcommand("train", "Train one configuration per seed");
  add_common(train_cmd, common);
  train_cmd->add_option("--curve", curve_path, "Per-epoch CSV for the first seed");

  auto* grid = app.add_subcommand("grid-search", "Exhaustive hyper-parameter search");
  add_common(grid, common);

  int spot_checks = 5;
  auto* sens = app.add_subcommand("sensitivity", "|dl/d lambda_k| at init and after training");
  add_common(sens, common);
  sens->add_option("--spot-checks", spot_checks, "Finite-difference checks per seed")
      ->capture_default_str();

  Index blocks = 4;
  Index block_size = 100;
  double p_in = 0.1;
  double q_out = 0.02;
  FeatureSpec fspec;
  auto* sbm = app.add_subcommand("sbm-gen", "Write a planted-partition SBM bundle");
  add_seed_out(sbm, common);
  sbm->add_option("--blocks", blocks)->capture_default_str();
  sbm->add_option("--block-size", block_size)->capture_default_str();
  sbm->add_option("--p", p_in, "Within-block edge probability")->capture_default_str();
  sbm->add_option("--q", q_out, "Across-block edge probability")->capture_default_str();
  sbm->add_option("--feature-dim", fspec.dim)->capture_default_str();
  sbm->add_option("--separation", fspec.separation, "Class-mean distance (0: from --bayes)");
  sbm->add_option("--bayes", fspec.bayes_target, "Target Bayes accuracy of features")
      ->capture_default_str();

  std::string plot_in;
  std::string plot_kind;
  auto* plot = app.add_subcommand("plot", "Render a result CSV as SVG");
  plot->add_option("--in", plot_in, "CSV input")->required();
  plot->add_option("--kind", plot_kind, "lowpass|highpass|augment|spectrum|sensitivity|train")
      ->required();
  plot->add_option("--out", common.out, "SVG output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const std::vector<std::uint64_t> seeds = parse_seed_list(common.seeds);

    if (app.got_subcommand(plot)) {
      plot_csv(plot_in, parse_plot_kind(plot_kind), common.out);
      return 0;
    }

    if (app.got_subcommand(sbm)) {
      fspec.seed = derive_seed(seeds.front(), 1);
      const SbmSpec spec = planted_partition(blocks, block_size, p_in, q_out, seeds.front());
      const GraphBundle b = make_sbm_bundle(spec, fspec, {}, derive_seed(seeds.front(), 2));
      write_bundle(b, common.out);
      return 0;
    }

    if (app.got_subcommand(spectrum)) {
      const Workspace ws = load(common);
      if (top_k > 0 && bottom_k > 0) throw InputError("use at most one of --top and --bottom");
      const LanczosOptions opts{.seed = seeds.front()};
      if (top_k > 0) {
        write_out(spectrum_table(eig_truncated(ws.op(), top_k, SpectrumSide::Top, opts)), common.out);
      } else if (bottom_k > 0) {
        write_out(spectrum_table(eig_truncated(ws.op(), bottom_k, SpectrumSide::Bottom, opts)),
                  common.out);
      } else {
        write_out(spectrum_table(ws.spectrum()), common.out);
      }
      return 0;
    }

    SweepSpec sweep;
    sweep.seeds = seeds;

    if (app.got_subcommand(ablate_low)) {
      const Workspace ws = load(common);
      sweep.base = build_config(common);
      sweep.fractions = fraction_list(fractions_text);
      sweep.depths = int_list(depths_text);
      write_out(run_lowpass_sweep(ws, sweep), common.out);
      return 0;
    }

    if (app.got_subcommand(ablate_high)) {
      const Workspace ws = load(common);
      ModelConfig base;
      base.hidden_layers = high_depth - 1;
      sweep.base = build_config(common, base);
      sweep.fractions = fraction_list(fractions_text);
      write_out(run_highpass_sweep(ws, sweep), common.out);
      return 0;
    }

    if (app.got_subcommand(augment)) {
      const Workspace ws = load(common);
      ModelConfig base;
      base.kind = ModelKind::Mlp;
      sweep.base = build_config(common, base);
      if (fractions_text.empty()) {
        sweep.fractions = fraction_list("");
        sweep.fractions.insert(sweep.fractions.begin(), 0.0);
      } else {
        sweep.fractions = fraction_list(fractions_text);
      }
      write_out(run_augment_sweep(ws, sweep), common.out);
      return 0;
    }

    const Workspace ws = load(common);
    const ModelConfig base = build_config(common);

    if (app.got_subcommand(train_cmd)) {
      CsvTable t{{"seed", "best_epoch", "best_val_acc", "test_acc", "epochs_run"}, {}};
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        ModelConfig cfg = base;
        cfg.seed = seeds[i];
        const TrainReport r = train(ws, cfg);
        t.rows.push_back({static_cast<std::int64_t>(seeds[i]), std::int64_t{r.best_epoch},
                          r.best_val_acc, r.test_acc,
                          static_cast<std::int64_t>(r.epochs.size())});
        if (i == 0 && !curve_path.empty()) write_out(train_table(r), curve_path);
      }
      write_out(t, common.out);
      return 0;
    }

    if (app.got_subcommand(grid)) {
      CsvTable all;
      for (std::uint64_t seed : seeds) {
        ModelConfig cfg = base;
        cfg.seed = seed;
        CsvTable t = grid_table(grid_search(ws, cfg, GridSpec{}));
        if (all.header.empty()) {
          all.header = t.header;
          all.header.insert(all.header.begin(), "seed");
        }
        for (auto& row : t.rows) {
          row.insert(row.begin(), static_cast<std::int64_t>(seed));
          all.rows.push_back(std::move(row));
        }
      }
      write_out(all, common.out);
      return 0;
    }

    if (app.got_subcommand(sens)) {
      // Magnitudes are averaged over seeds.
      std::optional<SensitivityResult> acc;
      for (std::uint64_t seed : seeds) {
        ModelConfig cfg = base;
        cfg.seed = seed;
        SensitivityResult r = run_sensitivity(ws, cfg, spot_checks);
        if (!acc) {
          acc = std::move(r);
        } else {
          acc->initial.magnitudes += r.initial.magnitudes;
          acc->trained.magnitudes += r.trained.magnitudes;
        }
      }
      acc->initial.magnitudes /= static_cast<double>(seeds.size());
      acc->trained.magnitudes /= static_cast<double>(seeds.size());
      write_out(sensitivity_table(*acc), common.out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
