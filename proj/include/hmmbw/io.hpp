#pragma once

// Text formats.
//
// Model file (JSON):
//   {"schema_version": 1, "n_states": N,
//    "emission": {"kind": "categorical", "n_symbols": M, "probs": [[...], ...]}
//             or {"kind": "gaussian", "means": [...], "variances": [...]},
//    "pi": [...], "trans": [[...], ...]}
//
// Sequence file: one sequence per line, tokens separated by commas or runs of
// whitespace. '#' starts a comment that runs to end of line; blank lines are
// skipped. The emission kind is always supplied by the caller.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hmmbw/inference.hpp"
#include "hmmbw/model.hpp"
#include "hmmbw/training.hpp"

namespace hmmbw::io {

inline constexpr int kSchemaVersion = 1;

std::string render_model(const HmmParameters& params);

/// Parses and validates. Throws IoError for malformed documents and
/// ValidationError for invariant violations.
HmmParameters parse_model(std::string_view text);

HmmParameters load_model(const std::filesystem::path& path);
void save_model(const HmmParameters& params, const std::filesystem::path& path);

std::string render_sequences(const std::vector<ObservationSequence>& sequences);
std::vector<ObservationSequence> parse_sequences(std::string_view text, EmissionKind kind);

std::vector<ObservationSequence> load_sequences(const std::filesystem::path& path, EmissionKind kind);
void save_sequences(const std::vector<ObservationSequence>& sequences,
                    const std::filesystem::path& path);

/// One line per iteration ("<index> <log-likelihood> <relative change>",
/// index 1-based, change "nan" on the first line), then "converged <true|false>"
/// and "iterations <n>".
void write_fit_report_line(std::ostream& out, std::size_t iteration, double log_likelihood,
                           std::optional<double> previous);
void write_fit_report(std::ostream& out, const FitResult& result);

/// 17 significant digits, enough to read back the identical double.
std::string format_real(double value);

}  // namespace hmmbw::io
