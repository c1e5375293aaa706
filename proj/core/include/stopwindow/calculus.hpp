#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stopwindow/trace.hpp"

namespace stopwindow {

/// How a local extremum is recognised in a sampled metric sequence.
enum class ExtremumMode {
  /// |f'(e)| <= epsilon and f''(e) != 0, both by forward differences at e.
  /// Needs samples up to e + 2. With epsilon = 0 this is the literal
  /// "f'(e) == 0" test, which real-valued noisy curves rarely satisfy.
  Strict,
  /// e starts a run whose preceding and following nonzero differences have
  /// opposite signs. Plateaus collapse onto their first index. Needs samples
  /// up to the first differing value after e (at least e + 1).
  SignChange,
};

/// How many epochs a window spans for the minimum-size test.
enum class SizeSemantics {
  Exclusive,  ///< end - start
  Inclusive,  ///< end - start + 1
};

enum class ExtremumKind { Maximum, Minimum };

struct Extremum {
  std::size_t index = 0;  ///< position in the input sequence
  ExtremumKind kind = ExtremumKind::Maximum;
  double value = 0.0;

  friend bool operator==(const Extremum&, const Extremum&) = default;
};

/// Metric samples from a local maximum (`start`) to a later local minimum
/// (`end`), both inclusive.
class Window {
 public:
  Window(Epoch start, Epoch end, std::vector<double> values);

  Epoch start() const noexcept { return start_; }
  Epoch end() const noexcept { return end_; }
  std::span<const double> values() const noexcept { return values_; }
  Epoch size(SizeSemantics semantics) const noexcept {
    return end_ - start_ + (semantics == SizeSemantics::Inclusive ? 1 : 0);
  }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  Epoch start_;
  Epoch end_;
  std::vector<double> values_;
};

/// out[k] = values[k+1] - values[k]  (unit spacing).
std::vector<double> forward_diff(std::span<const double> values);

/// out[k] = (values[k+2] - values[k+1]) - (values[k+1] - values[k]),
/// bit-identical to forward_diff(forward_diff(values)).
std::vector<double> second_diff(std::span<const double> values);

/// All extrema of `values` that are decidable from the sequence alone,
/// ordered by index. `epsilon` only applies to Strict mode.
std::vector<Extremum> find_extrema(std::span<const double> values, ExtremumMode mode,
                                   double epsilon = 0.0);

/// Consecutive drops inside the window: out[k] = values[k] - values[k+1].
std::vector<double> window_range(const Window& window);

/// size >= min_size and every |range element| < max_oscillation (strict).
bool qualify_window(const Window& window, int min_size, double max_oscillation,
                    SizeSemantics semantics = SizeSemantics::Exclusive);

}  // namespace stopwindow
