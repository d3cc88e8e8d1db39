#include "sgcn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgcn/errors.hpp"
#include "sgcn/rng.hpp"

namespace sgcn {

void SweepSpec::validate(bool allow_zero_fraction) const {
  if (fractions.empty()) throw InputError("sweep: empty value list");
  if (seeds.empty()) throw InputError("sweep: empty seed list");
  for (double f : fractions) {
    const bool ok = (f > 0.0 && f <= 1.0) || (allow_zero_fraction && f == 0.0);
    if (!ok) throw InputError("sweep: fraction " + format_double(f) + " outside (0, 1]");
  }
  base.validate();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Point {
  double fraction;
  int depth;
  std::uint64_t seed;
};

struct Outcome {
  Index k = 0;
  double test_acc = kNaN;
  int best_epoch = -1;
  std::string error;
};

// Runs every point on the OpenMP worker pool. Points are sorted first so
// the output order never depends on scheduling.
template <typename Run>
std::vector<Outcome> run_points(std::vector<Point>& points, Run run) {
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    if (a.fraction != b.fraction) return a.fraction < b.fraction;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seed < b.seed;
  });
  std::vector<Outcome> out(points.size());
  const auto count = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[i] = run(points[i]);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

std::vector<Point> grid_points(const SweepSpec& spec, const std::vector<int>& depths) {
  std::vector<Point> points;
  for (double f : spec.fractions)
    for (int d : depths)
      for (std::uint64_t s : spec.seeds) points.push_back({f, d, s});
  return points;
}

Outcome fit(const Workspace& ws, const ModelConfig& cfg, Index k) {
  const TrainReport r = train(ws, cfg);
  return {k, r.test_acc, r.best_epoch, {}};
}

}  // namespace

CsvTable run_lowpass_sweep(const Workspace& ws, const SweepSpec& spec) {
  spec.validate(false);
  if (spec.depths.empty()) throw InputError("low-pass sweep: empty depth list");
  for (int d : spec.depths)
    if (d < 2) throw InputError("low-pass sweep: depth must be >= 2");
  const Index n = ws.num_nodes();
  std::vector<Point> points = grid_points(spec, spec.depths);
  const auto out = run_points(points, [&](const Point& p) {
    ModelConfig cfg = spec.base;
    cfg.kind = ModelKind::Gcn;
    cfg.hidden_layers = p.depth - 1;
    cfg.seed = p.seed;
    const Index k = fraction_to_count(p.fraction, n);
    cfg.propagation = k == n ? Propagation::full() : Propagation::band(0, k - 1);
    return fit(ws, cfg, k);
  });

  CsvTable t{{"fraction", "depth", "seed", "k", "test_acc", "best_epoch", "error"}, {}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    t.rows.push_back({points[i].fraction, std::int64_t{points[i].depth},
                      static_cast<std::int64_t>(points[i].seed), std::int64_t{out[i].k},
                      out[i].test_acc, std::int64_t{out[i].best_epoch}, out[i].error});
  }
  return t;
}

CsvTable run_highpass_sweep(const Workspace& ws, const SweepSpec& spec) {
  spec.validate(false);
  const Index n = ws.num_nodes();
  std::vector<Point> points = grid_points(spec, {spec.base.depth()});
  const auto out = run_points(points, [&](const Point& p) {
    ModelConfig cfg = spec.base;
    cfg.kind = ModelKind::Gcn;
    cfg.seed = p.seed;
    const Index k = fraction_to_count(p.fraction, n);
    cfg.propagation = k == n ? Propagation::full() : Propagation::band(n - k, n - 1);
    return fit(ws, cfg, k);
  });

  CsvTable t{{"fraction", "seed", "test_acc", "k", "best_epoch", "error"}, {}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    t.rows.push_back({points[i].fraction, static_cast<std::int64_t>(points[i].seed),
                      out[i].test_acc, std::int64_t{out[i].k}, std::int64_t{out[i].best_epoch},
                      out[i].error});
  }
  return t;
}

CsvTable run_augment_sweep(const Workspace& ws, const SweepSpec& spec) {
  spec.validate(true);
  const Index n = ws.num_nodes();
  std::vector<Point> points = grid_points(spec, {0});
  const auto out = run_points(points, [&](const Point& p) {
    ModelConfig cfg = spec.base;
    cfg.kind = ModelKind::Mlp;
    cfg.seed = p.seed;
    cfg.augment_k = p.fraction == 0.0 ? 0 : augment_count(p.fraction, n, cfg.augment_include_dominant);
    return fit(ws, cfg, cfg.augment_k);
  });

  CsvTable t{{"fraction", "seed", "k", "test_acc", "best_epoch", "error"}, {}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    t.rows.push_back({points[i].fraction, static_cast<std::int64_t>(points[i].seed),
                      std::int64_t{out[i].k}, out[i].test_acc, std::int64_t{out[i].best_epoch},
                      out[i].error});
  }
  return t;
}

SensitivityResult run_sensitivity(const Workspace& ws, const ModelConfig& cfg, int spot_checks) {
  const SpectralDecomposition& d = ws.spectrum();
  SensitivityResult r;
  r.report = train(ws, cfg);

  const DenseMatrix g_init = loss_grad_wrt_operator(ws, cfg, r.report.initial_params);
  const DenseMatrix g_trained = loss_grad_wrt_operator(ws, cfg, r.report.best_params);

  const Vector signed_trained = signed_spectral_gradient(g_trained, d);
  Rng rng(derive_seed(cfg.seed, 0x5e45));
  for (int c = 0; c < spot_checks; ++c) {
    const auto k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(d.count())));
    const double numeric = eigenvalue_finite_difference(ws, cfg, r.report.best_params, k);
    const double analytic = signed_trained[k];
    const double diff = std::abs(numeric - analytic);
    const double scale = std::max(std::abs(numeric), std::abs(analytic));
    // Below 1e-8 both sides are at finite-difference noise level.
    if (diff > 1e-8 && diff > 1e-3 * scale) {
      throw ConvergenceError("sensitivity spot check failed at k = " + std::to_string(k) +
                                 ": analytic " + format_double(analytic) + ", numeric " +
                                 format_double(numeric),
                             diff);
    }
    r.spot_checks.push_back({k, analytic, numeric});
  }

  r.initial = spectral_gradient(g_init, d);
  r.initial.model_tag = "init";
  r.initial.dataset_tag = ws.bundle().name;
  r.trained = spectral_gradient(g_trained, d);
  r.trained.model_tag = "trained";
  r.trained.dataset_tag = ws.bundle().name;
  return r;
}

CsvTable sensitivity_table(const SensitivityResult& r) {
  CsvTable t{{"index", "eigenvalue", "grad_init", "grad_trained"}, {}};
  for (Index k = 0; k < r.trained.magnitudes.size(); ++k) {
    t.rows.push_back({std::int64_t{k}, r.trained.eigenvalues[k], r.initial.magnitudes[k],
                      r.trained.magnitudes[k]});
  }
  return t;
}

CsvTable spectrum_table(const SpectralDecomposition& d) {
  CsvTable t{{"index", "eigenvalue"}, {}};
  for (const auto& e : spectrum_report(d)) t.rows.push_back({std::int64_t{e.index}, e.eigenvalue});
  return t;
}

CsvTable train_table(const TrainReport& r) {
  CsvTable t{{"epoch", "train_loss", "train_acc", "val_loss", "val_acc", "test_acc"}, {}};
  for (const auto& e : r.epochs) {
    t.rows.push_back({std::int64_t{e.epoch}, e.train_loss, e.train_acc, e.val_loss, e.val_acc,
                      e.test_acc});
  }
  return t;
}

CsvTable grid_table(const GridResult& r) {
  CsvTable t{{"lr", "hidden_layers", "dropout", "frequency", "normalization", "propagation",
              "augment_k", "val_acc", "test_acc", "best_epoch", "selected"},
             {}};
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const GridRow& row = r.rows[i];
    t.rows.push_back({row.config.lr, std::int64_t{row.config.hidden_layers}, row.config.dropout,
                      row.frequency, to_string(row.config.normalization),
                      to_string(row.config.propagation), std::int64_t{row.config.augment_k},
                      row.val_acc, row.test_acc, std::int64_t{row.best_epoch},
                      std::int64_t{i == r.best_row ? 1 : 0}});
  }
  return t;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw InputError("config: '" + key + "' expects an integer");
  return x;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw InputError("config: '" + key + "' expects a number");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("config: '" + key + "' expects true/false");
}

}  // namespace

void apply_config_entry(ModelConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "kind") {
    if (v == "gcn") cfg.kind = ModelKind::Gcn;
    else if (v == "mlp") cfg.kind = ModelKind::Mlp;
    else throw InputError("config: kind must be gcn or mlp");
  } else if (key == "hidden_layers") {
    cfg.hidden_layers = static_cast<int>(to_integer(key, v));
  } else if (key == "depth") {
    cfg.hidden_layers = static_cast<int>(to_integer(key, v)) - 1;
  } else if (key == "hidden_size") {
    cfg.hidden_size = to_integer(key, v);
  } else if (key == "dropout") {
    cfg.dropout = to_real(key, v);
  } else if (key == "input_dropout") {
    cfg.input_dropout = to_bool(key, v);
  } else if (key == "lr") {
    cfg.lr = to_real(key, v);
  } else if (key == "weight_decay") {
    cfg.weight_decay = to_real(key, v);
  } else if (key == "decoupled_weight_decay") {
    cfg.decoupled_weight_decay = to_bool(key, v);
  } else if (key == "epochs") {
    cfg.epochs = static_cast<int>(to_integer(key, v));
  } else if (key == "patience") {
    cfg.patience = static_cast<int>(to_integer(key, v));
  } else if (key == "propagation") {
    if (v == "full") {
      cfg.propagation = Propagation::full();
    } else if (v == "identity") {
      cfg.propagation = Propagation::identity();
    } else if (v.starts_with("band:")) {
      const auto colon = v.find(':', 5);
      if (colon == std::string::npos) throw InputError("config: propagation band:<first>:<last>");
      cfg.propagation = Propagation::band(to_integer(key, v.substr(5, colon - 5)),
                                          to_integer(key, v.substr(colon + 1)));
    } else {
      throw InputError("config: propagation must be full, identity or band:<first>:<last>");
    }
  } else if (key == "augment_k") {
    cfg.augment_k = to_integer(key, v);
  } else if (key == "include_dominant") {
    cfg.augment_include_dominant = to_bool(key, v);
  } else if (key == "normalization") {
    if (v == "none") cfg.normalization = Normalization::None;
    else if (v == "per-node") cfg.normalization = Normalization::PerNode;
    else if (v == "per-feature") cfg.normalization = Normalization::PerFeature;
    else throw InputError("config: normalization must be none, per-node or per-feature");
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_integer(key, v));
  } else {
    throw InputError("config: unknown key '" + key + "'");
  }
}

ModelConfig read_config_file(const std::filesystem::path& path, ModelConfig base) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config file " + path.string(), path.string());
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(ValidationKind::Parse,
                            path.filename().string() + ":" + std::to_string(number) +
                                ": expected key=value",
                            number);
    }
    apply_config_entry(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item));
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<std::uint64_t>(to_integer("seed", item)));
  }
  return out;
}

}  // namespace sgcn
