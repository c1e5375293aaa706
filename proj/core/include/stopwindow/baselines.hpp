#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stopwindow/trace.hpp"

namespace stopwindow {

/// Stop when val_loss(e) > factor * val_loss(e - 1).
struct PrevIncrease {
  double factor = 1.0;
  friend bool operator==(const PrevIncrease&, const PrevIncrease&) = default;
};

/// Stop once `patience` consecutive epochs fail to beat the best loss so far
/// by more than `min_delta`.
struct Patience {
  int patience = 1;
  double min_delta = 0.0;
  friend bool operator==(const Patience&, const Patience&) = default;
};

using StrategySpec = std::variant<PrevIncrease, Patience>;

/// Throws Error{InvalidStrategy} on factor < 1, patience < 1 or min_delta < 0.
void validate(const StrategySpec& spec);

struct NamedStrategy {
  std::string label;
  StrategySpec spec;
  friend bool operator==(const NamedStrategy&, const NamedStrategy&) = default;
};

namespace presets {
// The four conventional loss-based strategies used for comparison.
inline const NamedStrategy kEarlyS1{"earlys1", PrevIncrease{1.0}};
inline const NamedStrategy kEarlyS2{"earlys2", PrevIncrease{1.05}};
inline const NamedStrategy kEarlyS3{"earlys3", Patience{2, 0.0}};
inline const NamedStrategy kEarlyS4{"earlys4", Patience{3, 0.0}};
}  // namespace presets

/// Accepts `earlys1`..`earlys4`, `previncrease:<factor>` and
/// `patience:<p>[:<min_delta>]` (case-insensitive keywords).
NamedStrategy parse_strategy(std::string_view token);

/// Comma-separated list of parse_strategy tokens; empty input gives no
/// strategies.
std::vector<NamedStrategy> parse_strategy_list(std::string_view list);

/// Online form of a strategy: one observe() per epoch, causal.
class LossMonitor {
 public:
  explicit LossMonitor(StrategySpec spec);

  /// Returns true on the epoch the strategy triggers.
  bool observe(double val_loss);

 private:
  StrategySpec spec_;
  std::optional<double> previous_;
  std::optional<double> best_;
  int stale_epochs_ = 0;
};

struct StrategyOutcome {
  std::string label;
  Epoch stop_epoch = 0;
  double metric_at_stop = 0.0;
  bool stopped = false;  ///< false when the trace ended first
  friend bool operator==(const StrategyOutcome&, const StrategyOutcome&) = default;
};

/// Runs a strategy over the trace's validation losses. Records after
/// `last_epoch` (if given) are not consulted. Throws Error{MissingLoss} if a
/// consulted record has no val_loss.
StrategyOutcome run_strategy(const TrainingTrace& trace, const NamedStrategy& strategy,
                             std::optional<Epoch> last_epoch = std::nullopt);

}  // namespace stopwindow
