#include "stopwindow/calculus.hpp"

#include <cmath>
#include <string>

#include "stopwindow/error.hpp"

namespace stopwindow {

namespace {

void require_length(std::span<const double> values, std::size_t minimum, const char* op) {
  if (values.size() < minimum) {
    throw Error(ErrorCode::TooShort, std::string(op) + " needs at least " + std::to_string(minimum) +
                                         " values, got " + std::to_string(values.size()));
  }
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

ExtremumKind kind_for_turn(int incoming_sign) {
  return incoming_sign > 0 ? ExtremumKind::Maximum : ExtremumKind::Minimum;
}

}  // namespace

Window::Window(Epoch start, Epoch end, std::vector<double> values)
    : start_(start), end_(end), values_(std::move(values)) {
  if (start_ >= end_) {
    throw Error(ErrorCode::WindowOutOfRange, "window start " + std::to_string(start_) +
                                                 " must precede end " + std::to_string(end_));
  }
  if (static_cast<Epoch>(values_.size()) != end_ - start_ + 1) {
    throw Error(ErrorCode::WindowOutOfRange,
                "window [" + std::to_string(start_) + ", " + std::to_string(end_) + "] needs " +
                    std::to_string(end_ - start_ + 1) + " values, got " +
                    std::to_string(values_.size()));
  }
}

std::vector<double> forward_diff(std::span<const double> values) {
  require_length(values, 2, "forward_diff");
  std::vector<double> out(values.size() - 1);
  for (std::size_t k = 0; k + 1 < values.size(); ++k) out[k] = values[k + 1] - values[k];
  return out;
}

std::vector<double> second_diff(std::span<const double> values) {
  require_length(values, 3, "second_diff");
  std::vector<double> out(values.size() - 2);
  for (std::size_t k = 0; k + 2 < values.size(); ++k) {
    out[k] = (values[k + 2] - values[k + 1]) - (values[k + 1] - values[k]);
  }
  return out;
}

std::vector<Extremum> find_extrema(std::span<const double> values, ExtremumMode mode,
                                   double epsilon) {
  std::vector<Extremum> out;
  if (mode == ExtremumMode::Strict) {
    require_length(values, 3, "find_extrema(strict)");
    if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be >= 0");
    const auto d1 = forward_diff(values);
    const auto d2 = second_diff(values);
    for (std::size_t e = 0; e < d2.size(); ++e) {
      if (std::abs(d1[e]) > epsilon || d2[e] == 0.0) continue;
      out.push_back({e, d2[e] < 0.0 ? ExtremumKind::Maximum : ExtremumKind::Minimum, values[e]});
    }
    return out;
  }

  require_length(values, 2, "find_extrema(signchange)");
  const auto d = forward_diff(values);
  // A candidate is the first index after a nonzero difference; it becomes an
  // extremum once the next nonzero difference turns the other way.
  std::size_t candidate = 0;
  int incoming = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const int s = sign(d[k]);
    if (s == 0) continue;
    if (incoming != 0 && s != incoming) {
      out.push_back({candidate, kind_for_turn(incoming), values[candidate]});
    }
    incoming = s;
    candidate = k + 1;
  }
  return out;
}

std::vector<double> window_range(const Window& window) {
  const auto v = window.values();
  std::vector<double> out(v.size() - 1);
  for (std::size_t k = 0; k + 1 < v.size(); ++k) out[k] = v[k] - v[k + 1];
  return out;
}

bool qualify_window(const Window& window, int min_size, double max_oscillation,
                    SizeSemantics semantics) {
  if (min_size < 2) {
    throw Error(ErrorCode::InvalidN, "N must be >= 2, got " + std::to_string(min_size));
  }
  if (!(max_oscillation > 0.0 && max_oscillation <= 2.0)) {
    throw Error(ErrorCode::InvalidD, "D must lie in (0, 2], got " + std::to_string(max_oscillation));
  }
  if (window.size(semantics) < min_size) return false;
  for (const double k : window_range(window)) {
    if (!(std::abs(k) < max_oscillation)) return false;
  }
  return true;
}

}  // namespace stopwindow
