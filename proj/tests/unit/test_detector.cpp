#include <doctest.h>

#include <random>

#include "support/errors.hpp"
#include "support/oracles.hpp"

using namespace stopwindow;

namespace {

const std::vector<double> kGoldenMetrics{80.0, 81.0, 82.0, 81.8, 81.7, 81.6, 81.5, 81.4, 81.6, 81.8};

DetectorConfig config_with(int n, double d, Epoch max_epochs = 200,
                           ExtremumMode mode = ExtremumMode::SignChange) {
  DetectorConfig c;
  c.min_window = n;
  c.max_oscillation = d;
  c.max_epochs = max_epochs;
  c.mode = mode;
  return c;
}

// Noisy saturating curves with an occasional plateau (values snapped to 0.05).
std::vector<double> noisy_curve(std::mt19937_64& rng, std::size_t n, double noise) {
  std::uniform_real_distribution<double> u(-noise, noise);
  std::vector<double> v(n);
  const double ceiling = 70.0 + static_cast<double>(rng() % 25);
  const double rate = 2.0 + static_cast<double>(rng() % 10);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1);
    const double raw = ceiling * (1.0 - std::exp(-x / rate)) + u(rng);
    v[i] = std::clamp(std::round(raw * 20.0) / 20.0, 0.0, 100.0);
  }
  return v;
}

}  // namespace

TEST_CASE("default config and validation") {
  const DetectorConfig defaults;
  CHECK(defaults.min_window == 4);
  CHECK(defaults.max_oscillation == 2.0);
  CHECK(defaults.max_epochs == 200);
  CHECK(defaults.mode == ExtremumMode::SignChange);
  CHECK(defaults.size_semantics == SizeSemantics::Exclusive);
  StopWindowDetector detector(defaults);
  CHECK(detector.status() == DetectorStatus::Running);
  CHECK(detector.records().empty());

  CHECK(code_of([] { StopWindowDetector(config_with(1, 2.0)); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { StopWindowDetector(config_with(4, 2.5)); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { StopWindowDetector(config_with(4, 0.0)); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { StopWindowDetector(config_with(10, 1.0, 10)); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { StopWindowDetector(config_with(2, 1.0, 2)); }) == ErrorCode::InvalidConfig);

  try {
    config_with(1, 3.0).validate();
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("N must") != std::string::npos);
    CHECK(msg.find("D must") != std::string::npos);
  }
}

TEST_CASE("golden stream stops on window [3, 8]") {
  StopWindowDetector detector(config_with(4, 2.0));
  std::vector<Decision> decisions;
  for (std::size_t i = 0; i < kGoldenMetrics.size(); ++i) {
    decisions.push_back(detector.feed({static_cast<Epoch>(i + 1), kGoldenMetrics[i], {}, {}}));
    if (!std::holds_alternative<Continue>(decisions.back())) break;
  }
  // The minimum at epoch 8 is confirmed by the rise at epoch 9.
  REQUIRE(decisions.size() == 9);
  const auto& stop = std::get<Stop>(decisions.back());
  CHECK(stop.window.start() == 3);
  CHECK(stop.window.end() == 8);
  CHECK(stop.stop_epoch == 3);
  CHECK(stop.lag == 1);
  CHECK(detector.status() == DetectorStatus::Stopped);
  CHECK(detector.last_max_point() == 3);
  CHECK(detector.last_min_point() == 8);

  CHECK(code_of([&] { detector.feed({10, 81.8, {}, {}}); }) == ErrorCode::FedAfterStop);
  CHECK(detect_offline(oracle::trace_from_metrics(kGoldenMetrics), config_with(4, 2.0)) == decisions.back());
}

TEST_CASE("monotone stream exhausts at max_epochs") {
  StopWindowDetector detector(config_with(4, 2.0, 50));
  Decision last = Continue{};
  for (Epoch e = 1; e <= 50; ++e) {
    last = detector.feed({e, static_cast<double>(e), {}, {}});
    if (e < 50) CHECK(std::holds_alternative<Continue>(last));
  }
  CHECK(last == Decision{Exhausted{50}});
  CHECK(detector.status() == DetectorStatus::Exhausted);
  CHECK(code_of([&] { detector.feed({51, 51.0, {}, {}}); }) == ErrorCode::FedAfterStop);
}

TEST_CASE("short peak-trough pair does not stop") {
  // Max at 3, min at 5 (size 2 < 4), then divergence upwards.
  const std::vector<double> v{70, 72, 74, 73.5, 73, 75, 77, 79, 81, 83};
  const auto d = replay(oracle::trace_from_metrics(v), config_with(4, 2.0));
  CHECK(d == Decision{Exhausted{10}});
  // Same pair qualifies once N allows it.
  const auto loose = std::get<Stop>(replay(oracle::trace_from_metrics(v), config_with(2, 2.0)));
  CHECK(loose.window == Window(3, 5, {74, 73.5, 73}));
}

TEST_CASE("feed rejects bad records and gaps without changing state") {
  StopWindowDetector detector;
  detector.feed({1, 50.0, {}, {}});
  CHECK(code_of([&] { detector.feed({3, 50.0, {}, {}}); }) == ErrorCode::NonConsecutiveEpoch);
  CHECK(code_of([&] { detector.feed({1, 50.0, {}, {}}); }) == ErrorCode::NonConsecutiveEpoch);
  CHECK(code_of([&] { detector.feed({2, 150.0, {}, {}}); }) == ErrorCode::InvalidRecord);
  CHECK(detector.records().size() == 1);
  CHECK(std::holds_alternative<Continue>(detector.feed({2, 51.0, {}, {}})));
}

TEST_CASE("strict mode confirms with a lag of two") {
  // Plateau-topped peak at 3 and plateau-bottomed trough at 8.
  const std::vector<double> v{80, 81, 82, 82, 81.8, 81.6, 81.4, 81.2, 81.2, 81.5, 82};
  auto c = config_with(4, 2.0, 200, ExtremumMode::Strict);
  const auto stop = std::get<Stop>(replay(oracle::trace_from_metrics(v), c));
  CHECK(stop.window.start() == 3);
  CHECK(stop.window.end() == 8);
  CHECK(stop.stop_epoch == 3);
  CHECK(stop.lag == 2);
  // Sign-change mode finds the same turn points one epoch sooner.
  CHECK(std::get<Stop>(replay(oracle::trace_from_metrics(v), config_with(4, 2.0))).window.end() == 8);
}

TEST_CASE("stop_epoch takes the earliest maximum inside the window") {
  // Strict max at 2 via epsilon; the window peak 82.05 is shared by epochs 3 and 5.
  const std::vector<double> v{78, 82, 82.05, 81.9, 82.05, 81.5, 81, 80.8, 80.6, 80.6, 81, 82};
  auto c = config_with(4, 2.0, 200, ExtremumMode::Strict);
  c.epsilon = 0.1;
  const auto trace = oracle::trace_from_metrics(v);
  const auto d = replay(trace, c);
  REQUIRE(std::holds_alternative<Stop>(d));
  const auto& stop = std::get<Stop>(d);
  CHECK(stop.window.start() == 2);
  CHECK(stop.stop_epoch == 3);
  CHECK(detect_offline(trace, c) == d);
}

TEST_CASE("epoch numbering is echoed from the trace") {
  const auto zero_based = oracle::trace_from_metrics(kGoldenMetrics, 0);
  const auto stop = std::get<Stop>(replay(zero_based, config_with(4, 2.0)));
  CHECK(stop.window.start() == 2);
  CHECK(stop.window.end() == 7);
  CHECK(stop.stop_epoch == 2);
}

TEST_CASE("exhaustion before the trace ends") {
  const auto trace = oracle::trace_from_metrics({50, 52, 51, 53, 54, 55, 56, 57, 58});
  const auto c = config_with(2, 0.5, 5);
  CHECK(replay(trace, c) == Decision{Exhausted{5}});
  CHECK(detect_offline(trace, c) == Decision{Exhausted{5}});
}

TEST_CASE("streaming matches the offline oracle on random curves") {
  std::mt19937_64 rng(101);
  int stops = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const double noise = std::array{0.0, 0.1, 0.5, 1.0, 1.9}[trial % 5];
    const auto v = noisy_curve(rng, 20 + rng() % 100, noise);
    const auto trace = oracle::trace_from_metrics(v);
    auto c = config_with(2 + static_cast<int>(rng() % 5), 0.25 + 0.25 * static_cast<double>(rng() % 7),
                         10 + static_cast<Epoch>(rng() % 150),
                         trial % 2 ? ExtremumMode::Strict : ExtremumMode::SignChange);
    c.epsilon = trial % 4 == 1 ? 0.05 : 0.0;
    c.size_semantics = trial % 3 ? SizeSemantics::Exclusive : SizeSemantics::Inclusive;
    const auto streamed = replay(trace, c);
    CHECK(streamed == detect_offline(trace, c));
    stops += std::holds_alternative<Stop>(streamed);
  }
  CHECK(stops > 50);
}

TEST_CASE("decision properties on random curves") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 300; ++trial) {
    const auto v = noisy_curve(rng, 30 + rng() % 90, 0.8);
    const auto trace = oracle::trace_from_metrics(v);
    const auto c = config_with(3, 1.0);
    const auto d = replay(trace, c);
    const auto* stop = std::get_if<Stop>(&d);
    if (!stop) continue;

    SUBCASE("stop invariants") {
      CHECK(stop->window.end() - stop->window.start() >= c.min_window);
      for (const double k : window_range(stop->window)) CHECK(std::fabs(k) < c.max_oscillation);
      CHECK(stop->stop_epoch >= stop->window.start());
      CHECK(stop->stop_epoch <= stop->window.end());
      const auto vals = stop->window.values();
      const double peak = *std::max_element(vals.begin(), vals.end());
      CHECK(trace.at(stop->stop_epoch).metric == peak);
      for (Epoch e = stop->window.start(); e < stop->stop_epoch; ++e) CHECK(trace.at(e).metric < peak);
    }
    SUBCASE("prefix stability") {
      const Epoch decided_at = stop->window.end() + stop->lag;
      std::vector<double> prefix(v.begin(), v.begin() + (decided_at - trace.first_epoch() + 1));
      CHECK(detect_offline(oracle::trace_from_metrics(prefix), c) == d);
      prefix.push_back(50.0);
      prefix.push_back(99.0);
      CHECK(replay(oracle::trace_from_metrics(prefix), c) == d);
    }
    SUBCASE("first-window policy") {
      const auto extrema = find_extrema(v, c.mode, c.epsilon);
      std::optional<std::size_t> last_max;
      for (const auto& ex : extrema) {
        if (ex.kind == ExtremumKind::Maximum) {
          last_max = ex.index;
          continue;
        }
        const Epoch end = trace.first_epoch() + static_cast<Epoch>(ex.index);
        if (!last_max || end >= stop->window.end()) continue;
        const Window w(trace.first_epoch() + static_cast<Epoch>(*last_max), end,
                       std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(*last_max),
                                           v.begin() + static_cast<std::ptrdiff_t>(ex.index) + 1));
        CHECK_FALSE(qualify_window(w, c.min_window, c.max_oscillation));
      }
    }
  }
}
