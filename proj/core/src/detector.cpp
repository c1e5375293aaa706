#include "stopwindow/detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stopwindow/error.hpp"

namespace stopwindow {

namespace {

int sign(double x) { return (x > 0.0) - (x < 0.0); }

Stop make_stop(std::span<const double> metrics, Epoch first_epoch, std::size_t max_idx,
               std::size_t min_idx, Epoch current_epoch) {
  std::vector<double> values(metrics.begin() + static_cast<std::ptrdiff_t>(max_idx),
                             metrics.begin() + static_cast<std::ptrdiff_t>(min_idx) + 1);
  const auto peak = earliest_argmax(values);
  Window window(first_epoch + static_cast<Epoch>(max_idx), first_epoch + static_cast<Epoch>(min_idx),
                std::move(values));
  const Epoch stop_epoch = window.start() + static_cast<Epoch>(peak);
  const Epoch lag = current_epoch - window.end();
  return Stop{std::move(window), stop_epoch, lag};
}

}  // namespace

void DetectorConfig::validate() const {
  std::vector<std::string> problems;
  if (max_epochs < 3) problems.push_back("max_epochs must be >= 3, got " + std::to_string(max_epochs));
  if (min_window < 2 || min_window > max_epochs - 1) {
    problems.push_back("N must lie in [2, max_epochs - 1], got " + std::to_string(min_window));
  }
  if (!(max_oscillation > 0.0 && max_oscillation <= 2.0)) {
    problems.push_back("D must lie in (0, 2], got " + std::to_string(max_oscillation));
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    problems.push_back("epsilon must be finite and >= 0, got " + std::to_string(epsilon));
  }
  if (problems.empty()) return;
  std::string msg = "invalid detector config: ";
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (i) msg += "; ";
    msg += problems[i];
  }
  throw Error(ErrorCode::InvalidConfig, msg);
}

std::size_t earliest_argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

StopWindowDetector::StopWindowDetector(DetectorConfig config) : config_(config) {
  config_.validate();
}

Decision StopWindowDetector::feed(const EpochRecord& record) {
  if (status_ != DetectorStatus::Running) {
    throw Error(ErrorCode::FedAfterStop, "detector already reached a final decision");
  }
  validate_record(record);
  if (!records_.empty() && record.epoch != records_.back().epoch + 1) {
    throw Error(ErrorCode::NonConsecutiveEpoch,
                "expected epoch " + std::to_string(records_.back().epoch + 1) + ", got " +
                    std::to_string(record.epoch));
  }

  records_.push_back(record);
  metrics_.push_back(record.metric);
  if (metrics_[metrics_.size() - 1] > metrics_[best_index_]) best_index_ = metrics_.size() - 1;

  if (const auto found = confirm_extremum()) {
    const Epoch epoch = records_.front().epoch + static_cast<Epoch>(found->index);
    if (found->kind == ExtremumKind::Maximum) {
      max_point_ = epoch;
    } else {
      min_point_ = epoch;
      if (auto decision = on_minimum(epoch); !std::holds_alternative<Continue>(decision)) {
        return decision;
      }
    }
  }

  if (record.epoch >= config_.max_epochs) {
    status_ = DetectorStatus::Exhausted;
    return Exhausted{records_.front().epoch + static_cast<Epoch>(best_index_)};
  }
  return Continue{};
}

// Examines only what the newest sample can settle: at most one extremum per
// feed in either mode.
std::optional<Extremum> StopWindowDetector::confirm_extremum() {
  const std::size_t n = metrics_.size();
  if (config_.mode == ExtremumMode::Strict) {
    if (n < 3) return std::nullopt;
    const std::size_t e = n - 3;
    const double d1 = metrics_[e + 1] - metrics_[e];
    const double d2 = (metrics_[e + 2] - metrics_[e + 1]) - d1;
    if (std::abs(d1) > config_.epsilon || d2 == 0.0) return std::nullopt;
    return Extremum{e, d2 < 0.0 ? ExtremumKind::Maximum : ExtremumKind::Minimum, metrics_[e]};
  }

  if (n < 2) return std::nullopt;
  const int s = sign(metrics_[n - 1] - metrics_[n - 2]);
  if (s == 0) return std::nullopt;
  std::optional<Extremum> found;
  if (incoming_sign_ != 0 && s != incoming_sign_) {
    found = Extremum{candidate_,
                     incoming_sign_ > 0 ? ExtremumKind::Maximum : ExtremumKind::Minimum,
                     metrics_[candidate_]};
  }
  incoming_sign_ = s;
  candidate_ = n - 1;
  return found;
}

Decision StopWindowDetector::on_minimum(Epoch min_epoch) {
  if (!max_point_ || *max_point_ >= min_epoch) return Continue{};
  const Epoch first = records_.front().epoch;
  const auto max_idx = static_cast<std::size_t>(*max_point_ - first);
  const auto min_idx = static_cast<std::size_t>(min_epoch - first);
  auto stop = make_stop(metrics_, first, max_idx, min_idx, records_.back().epoch);
  if (!qualify_window(stop.window, config_.min_window, config_.max_oscillation,
                      config_.size_semantics)) {
    return Continue{};
  }
  status_ = DetectorStatus::Stopped;
  return stop;
}

Decision replay(const TrainingTrace& trace, const DetectorConfig& config) {
  StopWindowDetector detector(config);
  for (const auto& record : trace.records()) {
    auto decision = detector.feed(record);
    if (!std::holds_alternative<Continue>(decision)) return decision;
  }
  const auto metrics = trace.metrics();
  return Exhausted{trace.first_epoch() + static_cast<Epoch>(earliest_argmax(metrics))};
}

namespace {

std::optional<std::pair<std::size_t, std::size_t>> first_qualifying_window(
    std::span<const double> prefix, Epoch first_epoch, const DetectorConfig& config) {
  const std::size_t needed = config.mode == ExtremumMode::Strict ? 3 : 2;
  if (prefix.size() < needed) return std::nullopt;
  std::optional<std::size_t> last_max;
  for (const auto& ex : find_extrema(prefix, config.mode, config.epsilon)) {
    if (ex.kind == ExtremumKind::Maximum) {
      last_max = ex.index;
      continue;
    }
    if (!last_max) continue;
    Window window(first_epoch + static_cast<Epoch>(*last_max), first_epoch + static_cast<Epoch>(ex.index),
                  std::vector<double>(prefix.begin() + static_cast<std::ptrdiff_t>(*last_max),
                                      prefix.begin() + static_cast<std::ptrdiff_t>(ex.index) + 1));
    if (qualify_window(window, config.min_window, config.max_oscillation, config.size_semantics)) {
      return std::pair{*last_max, ex.index};
    }
  }
  return std::nullopt;
}

}  // namespace

Decision detect_offline(const TrainingTrace& trace, const DetectorConfig& config) {
  config.validate();
  const auto metrics = trace.metrics();
  const Epoch first = trace.first_epoch();
  for (std::size_t m = 1; m <= metrics.size(); ++m) {
    const auto prefix = std::span<const double>(metrics).first(m);
    const Epoch current = first + static_cast<Epoch>(m - 1);
    if (const auto w = first_qualifying_window(prefix, first, config)) {
      return make_stop(prefix, first, w->first, w->second, current);
    }
    if (current >= config.max_epochs) {
      return Exhausted{first + static_cast<Epoch>(earliest_argmax(prefix))};
    }
  }
  return Exhausted{first + static_cast<Epoch>(earliest_argmax(metrics))};
}

}  // namespace stopwindow
