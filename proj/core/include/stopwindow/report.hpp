#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stopwindow/baselines.hpp"
#include "stopwindow/detector.hpp"

namespace stopwindow {

/// Summary of the metric inside a stop window, relative to the best value of
/// the whole run. Ratios are full precision; rounding happens in render().
struct WindowStats {
  double sw_avg = 0.0;
  double sw_std = 0.0;  ///< population standard deviation
  double sw_max = 0.0;
  double global_max = 0.0;
  double sw_max_diff = 0.0;  ///< sw_max / global_max
  double sw_avg_diff = 0.0;  ///< sw_avg / global_max

  friend bool operator==(const WindowStats&, const WindowStats&) = default;
};

/// Builds stats from already-summarised numbers (e.g. a published table).
WindowStats summarize_window(double sw_avg, double sw_std, double sw_max, double global_max);

/// Stats of the trace's metric over [window.start, window.end]. Throws
/// Error{WindowOutOfRange} if the window is not inside the trace or its values
/// differ from the trace metric.
WindowStats window_stats(const TrainingTrace& trace, const Window& window);

/// (1 - stop_epoch / max_epochs) * 100. Throws Error{OutOfRange} unless
/// 0 <= stop_epoch <= max_epochs and max_epochs > 0.
double eff_gain(Epoch stop_epoch, Epoch max_epochs);

/// metric_at_stop / global_max. Throws Error{NonPositiveMax}.
double max_diff(double metric_at_stop, double global_max);

namespace flags {
inline constexpr std::string_view kExhausted = "exhausted";
inline constexpr std::string_view kNoStop = "no_stop";
inline constexpr std::string_view kShortTrace = "trace_shorter_than_max_epochs";
}  // namespace flags

inline constexpr std::string_view kStopWindowLabel = "stop_window";

struct ComparisonRow {
  std::string strategy;
  Epoch stop_epoch = 0;
  double metric_at_stop = 0.0;
  double max_diff = 0.0;
  double eff_gain = 0.0;
  std::vector<std::string> flags;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ComparisonTable {
  std::string metric_name = "ImIoU";
  Epoch max_epochs = 200;
  double global_max = 0.0;
  std::vector<ComparisonRow> rows;

  friend bool operator==(const ComparisonTable&, const ComparisonTable&) = default;
};

/// One row for the stop-window detector followed by one per strategy, in the
/// given order. Baselines only see epochs up to config.max_epochs; efficiency
/// is always normalised by config.max_epochs.
ComparisonTable compare(const TrainingTrace& trace, const DetectorConfig& config,
                        const std::vector<NamedStrategy>& strategies);

enum class Format { Markdown, Csv, Json };

/// "markdown" / "md", "csv", "json". Throws Error{InvalidConfig} otherwise.
Format parse_format(std::string_view name);

// Markdown rounds metrics and ratios to 2 decimals and efficiency gains to 1.
// CSV and JSON carry full precision (shortest round-trip representation).
std::string render(const ComparisonTable& table, Format format);
std::string render(const WindowStats& stats, Format format);
std::string render(const Decision& decision, Format format);

ComparisonTable parse_comparison_json(std::string_view text);
/// Reads the rows written by render(table, Format::Csv). Table metadata is
/// not part of the CSV and keeps its defaults.
ComparisonTable parse_comparison_csv(std::string_view text);

}  // namespace stopwindow
