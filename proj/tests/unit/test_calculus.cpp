#include <doctest.h>

#include <random>

#include "support/errors.hpp"
#include "support/oracles.hpp"

using namespace stopwindow;

namespace {

std::vector<oracle::Turn> turns(const std::vector<Extremum>& extrema) {
  std::vector<oracle::Turn> out;
  for (const auto& e : extrema) out.push_back({e.index, e.kind});
  return out;
}

// Quarter-integer values in [60, 90]: sums, differences and constant shifts
// stay exact in double precision.
std::vector<double> random_quarters(std::mt19937_64& rng, std::size_t n, int spread) {
  std::vector<double> v(n);
  double x = 75.0;
  for (auto& value : v) {
    x += 0.25 * static_cast<double>(static_cast<int>(rng() % static_cast<std::uint64_t>(2 * spread + 1)) - spread);
    x = std::clamp(x, 60.0, 90.0);
    value = x;
  }
  return v;
}

}  // namespace

TEST_CASE("forward_diff") {
  CHECK(forward_diff(std::vector{5.0, 5.0, 5.0}) == std::vector{0.0, 0.0});
  CHECK(forward_diff(std::vector{1.0, 3.0, 2.0}) == std::vector{2.0, -1.0});
  const auto d = forward_diff(std::vector{80.0, 81.5, 81.0, 82.0});
  REQUIRE(d.size() == 3);
  CHECK(d[0] == doctest::Approx(1.5));
  CHECK(d[1] == doctest::Approx(-0.5));
  CHECK(d[2] == doctest::Approx(1.0));
  CHECK(code_of([] { forward_diff(std::vector{1.0}); }) == ErrorCode::TooShort);
}

TEST_CASE("second_diff") {
  CHECK(second_diff(std::vector{0.0, 1.0, 2.0, 3.0}) == std::vector{0.0, 0.0});
  CHECK(second_diff(std::vector{1.0, 3.0, 2.0}) == std::vector{-3.0});
  CHECK(code_of([] { second_diff(std::vector{1.0, 2.0}); }) == ErrorCode::TooShort);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(3 + rng() % 30);
    for (auto& x : v) x = u(rng);
    CHECK(second_diff(v) == forward_diff(forward_diff(v)));
  }
}

TEST_CASE("differences are linear") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 3 + rng() % 20;
    std::vector<double> v(n), w(n), mix(n);
    const double a = static_cast<double>(static_cast<int>(rng() % 7) - 3);
    const double b = static_cast<double>(static_cast<int>(rng() % 7) - 3);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = static_cast<double>(rng() % 200);
      w[i] = static_cast<double>(rng() % 200);
      mix[i] = a * v[i] + b * w[i];
    }
    const auto dv = forward_diff(v), dw = forward_diff(w), dm = forward_diff(mix);
    const auto sv = second_diff(v), sw = second_diff(w), sm = second_diff(mix);
    for (std::size_t k = 0; k < dm.size(); ++k) CHECK(dm[k] == a * dv[k] + b * dw[k]);
    for (std::size_t k = 0; k < sm.size(); ++k) CHECK(sm[k] == a * sv[k] + b * sw[k]);
  }
}

TEST_CASE("find_extrema sign-change examples") {
  const auto peak = find_extrema(std::vector{1.0, 2.0, 3.0, 2.0, 1.0}, ExtremumMode::SignChange);
  REQUIRE(peak.size() == 1);
  CHECK(peak[0] == Extremum{2, ExtremumKind::Maximum, 3.0});

  const auto trough = find_extrema(std::vector{3.0, 2.0, 1.0, 2.0, 3.0}, ExtremumMode::SignChange);
  REQUIRE(trough.size() == 1);
  CHECK(trough[0] == Extremum{2, ExtremumKind::Minimum, 1.0});

  // Plateau collapses to its first index; checked against the neighbour scan.
  const std::vector plateau{1.0, 2.0, 2.0, 2.0, 1.0};
  const auto flat = find_extrema(plateau, ExtremumMode::SignChange);
  REQUIRE(flat.size() == 1);
  CHECK(flat[0] == Extremum{1, ExtremumKind::Maximum, 2.0});
  CHECK(turns(flat) == oracle::plateau_extrema(plateau));

  // Plateau at the end is undecided.
  CHECK(find_extrema(std::vector{1.0, 2.0, 2.0}, ExtremumMode::SignChange).empty());
  CHECK(find_extrema(std::vector{1.0, 2.0}, ExtremumMode::SignChange).empty());
  CHECK(code_of([] { find_extrema(std::vector{1.0}, ExtremumMode::SignChange); }) == ErrorCode::TooShort);
}

TEST_CASE("find_extrema strict mode follows the difference test") {
  // f'(1) = 0 and f''(1) = -1: maximum on the plateau start only.
  const auto e = find_extrema(std::vector{1.0, 2.0, 2.0, 1.0}, ExtremumMode::Strict);
  REQUIRE(e.size() == 1);
  CHECK(e[0] == Extremum{1, ExtremumKind::Maximum, 2.0});
  // A sharp peak never has f' == 0 under forward differences.
  CHECK(find_extrema(std::vector{1.0, 2.0, 3.0, 2.0, 1.0}, ExtremumMode::Strict).empty());
  // ...unless epsilon admits it.
  const auto loose = find_extrema(std::vector{1.0, 2.9, 3.0, 2.0, 1.0}, ExtremumMode::Strict, 0.2);
  REQUIRE(loose.size() == 1);
  CHECK(loose[0].index == 1);
  CHECK(code_of([] { find_extrema(std::vector{1.0, 2.0}, ExtremumMode::Strict); }) == ErrorCode::TooShort);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const auto v = random_quarters(rng, 3 + rng() % 60, 2);
    const double eps = 0.25 * static_cast<double>(rng() % 3);
    CHECK(turns(find_extrema(v, ExtremumMode::Strict, eps)) == oracle::strict_extrema(v, eps));
  }
}

TEST_CASE("sign-change extrema match the neighbour scan") {
  std::mt19937_64 rng(17);
  SUBCASE("no ties: strict neighbour comparison") {
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> v(2 + rng() % 80);
      for (auto& x : v) x = u(rng);
      std::vector<oracle::Turn> expected;
      for (std::size_t e = 1; e + 1 < v.size(); ++e) {
        if (v[e] > v[e - 1] && v[e] > v[e + 1]) expected.push_back({e, ExtremumKind::Maximum});
        if (v[e] < v[e - 1] && v[e] < v[e + 1]) expected.push_back({e, ExtremumKind::Minimum});
      }
      CHECK(turns(find_extrema(v, ExtremumMode::SignChange)) == expected);
    }
  }
  SUBCASE("with ties: plateau rule") {
    for (int trial = 0; trial < 500; ++trial) {
      const auto v = random_quarters(rng, 2 + rng() % 80, 1);
      const auto got = find_extrema(v, ExtremumMode::SignChange);
      CHECK(turns(got) == oracle::plateau_extrema(v));
      for (std::size_t i = 1; i < got.size(); ++i) {
        CHECK(got[i].kind != got[i - 1].kind);
        CHECK(got[i].index > got[i - 1].index);
      }
    }
  }
}

TEST_CASE("extrema and qualification are shift invariant") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = random_quarters(rng, 3 + rng() % 50, 2);
    for (const double c : {-10.0, 15.0}) {
      std::vector<double> shifted(v);
      for (auto& x : shifted) x += c;
      for (const auto mode : {ExtremumMode::SignChange, ExtremumMode::Strict}) {
        CHECK(turns(find_extrema(v, mode, 0.25)) == turns(find_extrema(shifted, mode, 0.25)));
      }
      const Window w(1, static_cast<Epoch>(v.size()), v);
      const Window ws(1, static_cast<Epoch>(v.size()), shifted);
      CHECK(window_range(w) == window_range(ws));
      CHECK(qualify_window(w, 4, 0.5) == qualify_window(ws, 4, 0.5));
    }
  }
}

TEST_CASE("window_range") {
  const auto r = window_range(Window(1, 3, {82.0, 81.0, 80.0}));
  CHECK(r == std::vector{1.0, 1.0});
  CHECK(window_range(Window(5, 8, {80, 80, 80, 80})) == std::vector{0.0, 0.0, 0.0});
  const auto mixed = window_range(Window(10, 13, {84.8, 84.2, 84.5, 83.9}));
  REQUIRE(mixed.size() == 3);
  CHECK(mixed[0] == doctest::Approx(0.6));
  CHECK(mixed[1] == doctest::Approx(-0.3));
  CHECK(mixed[2] == doctest::Approx(0.6));
}

TEST_CASE("Window invariants") {
  CHECK(code_of([] { Window(3, 3, {1.0}); }) == ErrorCode::WindowOutOfRange);
  CHECK(code_of([] { Window(1, 3, {1.0, 2.0}); }) == ErrorCode::WindowOutOfRange);
  const Window w(38, 41, {1, 2, 3, 4});
  CHECK(w.size(SizeSemantics::Exclusive) == 3);
  CHECK(w.size(SizeSemantics::Inclusive) == 4);
}

TEST_CASE("qualify_window") {
  const Window kp(10, 14, {82.80, 82.50, 82.30, 82.40, 82.10});
  CHECK(qualify_window(kp, 4, 2.0, SizeSemantics::Exclusive));
  CHECK(qualify_window(kp, 4, 2.0, SizeSemantics::Inclusive));

  const Window pn(38, 41, {81.74, 81.76, 81.68, 81.50});
  CHECK_FALSE(qualify_window(pn, 4, 2.0, SizeSemantics::Exclusive));
  CHECK(qualify_window(pn, 4, 2.0, SizeSemantics::Inclusive));

  // |k| == D is rejected (strict inequality); dyadic values keep it exact.
  const Window edge(1, 5, {10.0, 9.5, 9.0, 7.0, 6.5});
  CHECK_FALSE(qualify_window(edge, 4, 2.0));
  CHECK(qualify_window(Window(1, 5, {10.0, 9.5, 9.0, 7.25, 6.75}), 4, 2.0));
  CHECK_FALSE(qualify_window(Window(1, 5, {10.0, 9.5, 9.0, 8.5, 8.0}), 4, 0.5));
  const Window rising_edge(1, 5, {10.0, 9.5, 11.5, 11.0, 10.5});
  CHECK_FALSE(qualify_window(rising_edge, 4, 2.0));

  CHECK(code_of([&] { qualify_window(kp, 1, 2.0); }) == ErrorCode::InvalidN);
  CHECK(code_of([&] { qualify_window(kp, 4, 0.0); }) == ErrorCode::InvalidD);
  CHECK(code_of([&] { qualify_window(kp, 4, 2.5); }) == ErrorCode::InvalidD);
}
