#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sgcn/dataset_io.hpp"
#include "sgcn/models.hpp"
#include "sgcn/sensitivity.hpp"

namespace sgcn {

// The frequency list of the hyper-parameter grid, in percent.
inline const std::vector<double> kFrequencyPercents{0.1, 0.2, 0.4, 0.7, 1,  2,  3,  6,
                                                    10,  15,  20,  30,  50, 80, 100};

struct SweepSpec {
  ModelConfig base;
  std::vector<double> fractions;  // in (0, 1]; the augment sweep also accepts 0
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<int> depths{2, 4, 8};  // low-pass sweep only

  void validate(bool allow_zero_fraction) const;
};

// GCN with A restricted to [0, k - 1], k = max(1, round(f N)), for every
// (fraction, depth, seed). Columns: fraction,depth,seed,k,test_acc,best_epoch,error.
CsvTable run_lowpass_sweep(const Workspace& ws, const SweepSpec& spec);

// GCN (depth from base config) with A restricted to [N - k, N - 1].
// Columns: fraction,seed,test_acc,k,best_epoch,error.
CsvTable run_highpass_sweep(const Workspace& ws, const SweepSpec& spec);

// MLP on eigenvector-augmented features.
// Columns: fraction,seed,k,test_acc,best_epoch,error.
CsvTable run_augment_sweep(const Workspace& ws, const SweepSpec& spec);

struct SensitivityResult {
  SpectralGradient initial;
  SpectralGradient trained;
  TrainReport report;
  // Finite-difference spot checks that ran before the table was produced.
  struct SpotCheck {
    Index k;
    double analytic;
    double numeric;
  };
  std::vector<SpotCheck> spot_checks;
};

// Trains cfg, then evaluates |d loss / d lambda_k| at the initial and the
// best-validation weights. `spot_checks` eigenvalues are re-derived by
// central differences first; a mismatch beyond 1e-3 relative throws.
SensitivityResult run_sensitivity(const Workspace& ws, const ModelConfig& cfg,
                                  int spot_checks = 5);

// Columns: index,eigenvalue,grad_init,grad_trained.
CsvTable sensitivity_table(const SensitivityResult& r);
// Columns: index,eigenvalue.
CsvTable spectrum_table(const SpectralDecomposition& d);
// Columns: epoch,train_loss,train_acc,val_loss,val_acc,test_acc.
CsvTable train_table(const TrainReport& r);
// One row per configuration.
CsvTable grid_table(const GridResult& r);

// key=value lines; '#' starts a comment. Unknown keys throw InputError.
void apply_config_entry(ModelConfig& cfg, const std::string& key, const std::string& value);
ModelConfig read_config_file(const std::filesystem::path& path, ModelConfig base = {});

std::vector<double> parse_double_list(const std::string& text);
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace sgcn
