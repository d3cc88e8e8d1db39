#pragma once

#include <filesystem>
#include <string>

#include "sgcn/dataset_io.hpp"

namespace sgcn {

enum class PlotKind { Lowpass, Highpass, Augment, Spectrum, Sensitivity, Train };

// Throws InputError for an unknown name.
PlotKind parse_plot_kind(const std::string& name);

// Self-contained SVG line chart. Sweep kinds average test_acc over seeds per
// x value (rows carrying an error are skipped); the low-pass kind draws one
// line per depth. Output is byte-stable for identical input. Throws
// ValidationError(Schema) if a required column is missing or the table
// has no usable rows.
std::string render_svg(const CsvTable& table, PlotKind kind);

// Reads csv, renders, writes svg. Nothing is written on error.
void plot_csv(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg);

}  // namespace sgcn
