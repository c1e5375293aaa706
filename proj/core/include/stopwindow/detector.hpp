#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "stopwindow/calculus.hpp"
#include "stopwindow/trace.hpp"

namespace stopwindow {

struct DetectorConfig {
  int min_window = 4;            ///< N: minimum window size in epochs, [2, max_epochs - 1]
  double max_oscillation = 2.0;  ///< D: bound on |consecutive drop| inside a window, (0, 2]
  Epoch max_epochs = 200;
  ExtremumMode mode = ExtremumMode::SignChange;
  double epsilon = 0.0;  ///< derivative tolerance, Strict mode only
  SizeSemantics size_semantics = SizeSemantics::Exclusive;

  /// Throws Error{InvalidConfig} naming every violated bound.
  void validate() const;

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

struct Continue {
  friend bool operator==(const Continue&, const Continue&) = default;
};

/// A qualifying window was confirmed. `stop_epoch` is the earliest epoch in
/// the window holding its maximum metric; `lag` is how many epochs past the
/// window end had to be observed to confirm the closing minimum.
struct Stop {
  Window window;
  Epoch stop_epoch = 0;
  Epoch lag = 0;
  friend bool operator==(const Stop&, const Stop&) = default;
};

/// max_epochs reached (or the trace ended) without a qualifying window.
/// `best_epoch` is the earliest argmax of the metric seen so far.
struct Exhausted {
  Epoch best_epoch = 0;
  friend bool operator==(const Exhausted&, const Exhausted&) = default;
};

using Decision = std::variant<Continue, Stop, Exhausted>;

enum class DetectorStatus { Running, Stopped, Exhausted };

/// Streaming stop-window detector. Feed one record per epoch; the first
/// non-Continue decision is final and further feeds are rejected.
///
/// The most recent local maximum is remembered; each newly confirmed local
/// minimum after it closes a candidate window [max, min]. The first candidate
/// that qualifies stops the run.
///
/// A Stop is emitted at the epoch that confirms the minimum, which may be
/// later than `stop_epoch`. Callers restoring the model at `stop_epoch` must
/// keep checkpoints for at least (window span + lag) epochs.
///
/// Not thread-safe; a detector may be moved between threads between feeds.
class StopWindowDetector {
 public:
  explicit StopWindowDetector(DetectorConfig config = {});

  Decision feed(const EpochRecord& record);

  DetectorStatus status() const noexcept { return status_; }
  const DetectorConfig& config() const noexcept { return config_; }
  std::span<const EpochRecord> records() const noexcept { return records_; }
  std::optional<Epoch> last_max_point() const noexcept { return max_point_; }
  std::optional<Epoch> last_min_point() const noexcept { return min_point_; }

 private:
  std::optional<Extremum> confirm_extremum();
  Decision on_minimum(Epoch min_epoch);

  DetectorConfig config_;
  DetectorStatus status_ = DetectorStatus::Running;
  std::vector<EpochRecord> records_;
  std::vector<double> metrics_;
  std::optional<Epoch> max_point_;
  std::optional<Epoch> min_point_;
  std::size_t best_index_ = 0;
  // SignChange bookkeeping: first index after the last nonzero difference,
  // and that difference's sign.
  std::size_t candidate_ = 0;
  int incoming_sign_ = 0;
};

/// Earliest index of the largest value. Precondition: non-empty.
std::size_t earliest_argmax(std::span<const double> values);

/// Folds `feed` over the trace. If the trace ends while still running, the
/// result is Exhausted over everything seen.
Decision replay(const TrainingTrace& trace, const DetectorConfig& config);

/// Reference implementation used as the streaming detector's oracle: for each
/// prefix of the trace it recomputes every extremum from scratch with
/// find_extrema, enumerates candidate windows in epoch order and takes the
/// first qualifying one. Same contract as `replay`.
Decision detect_offline(const TrainingTrace& trace, const DetectorConfig& config);

}  // namespace stopwindow
