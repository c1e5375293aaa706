#include "stopwindow/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "stopwindow/error.hpp"

namespace stopwindow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void bad_token(std::string_view token, std::string_view why) {
  throw Error(ErrorCode::InvalidStrategy,
              "strategy '" + std::string(token) + "': " + std::string(why));
}

template <class T>
T parse_number(std::string_view text, std::string_view token) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) bad_token(token, "bad number '" + std::string(text) + "'");
  return value;
}

}  // namespace

void validate(const StrategySpec& spec) {
  std::visit(overloaded{
                 [](const PrevIncrease& p) {
                   if (!(p.factor >= 1.0) || !std::isfinite(p.factor)) {
                     throw Error(ErrorCode::InvalidStrategy, "previncrease factor must be >= 1");
                   }
                 },
                 [](const Patience& p) {
                   if (p.patience < 1) throw Error(ErrorCode::InvalidStrategy, "patience must be >= 1");
                   if (!(p.min_delta >= 0.0) || !std::isfinite(p.min_delta)) {
                     throw Error(ErrorCode::InvalidStrategy, "patience min_delta must be >= 0");
                   }
                 },
             },
             spec);
}

NamedStrategy parse_strategy(std::string_view raw) {
  const std::string token = lower(raw);
  if (token == presets::kEarlyS1.label) return presets::kEarlyS1;
  if (token == presets::kEarlyS2.label) return presets::kEarlyS2;
  if (token == presets::kEarlyS3.label) return presets::kEarlyS3;
  if (token == presets::kEarlyS4.label) return presets::kEarlyS4;

  const std::string_view view = token;
  const auto colon = view.find(':');
  const auto keyword = view.substr(0, colon);
  const auto args = colon == std::string_view::npos ? std::string_view{} : view.substr(colon + 1);

  NamedStrategy out{std::string(raw), PrevIncrease{}};
  if (keyword == "previncrease") {
    if (args.empty() || args.find(':') != std::string_view::npos) bad_token(raw, "expected previncrease:<factor>");
    out.spec = PrevIncrease{parse_number<double>(args, raw)};
  } else if (keyword == "patience") {
    if (args.empty()) bad_token(raw, "expected patience:<p>[:<min_delta>]");
    const auto second = args.find(':');
    Patience p;
    p.patience = parse_number<int>(args.substr(0, second), raw);
    if (second != std::string_view::npos) p.min_delta = parse_number<double>(args.substr(second + 1), raw);
    out.spec = p;
  } else {
    bad_token(raw, "unknown strategy");
  }
  try {
    validate(out.spec);
  } catch (const Error& e) {
    bad_token(raw, e.what());
  }
  return out;
}

std::vector<NamedStrategy> parse_strategy_list(std::string_view list) {
  std::vector<NamedStrategy> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    auto token = list.substr(0, comma);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) out.push_back(parse_strategy(token));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

LossMonitor::LossMonitor(StrategySpec spec) : spec_(spec) { validate(spec_); }

bool LossMonitor::observe(double val_loss) {
  return std::visit(
      overloaded{
          [&](const PrevIncrease& p) {
            const bool fire = previous_ && val_loss > p.factor * *previous_;
            previous_ = val_loss;
            return fire;
          },
          [&](const Patience& p) {
            if (!best_ || val_loss < *best_ - p.min_delta) {
              best_ = val_loss;
              stale_epochs_ = 0;
              return false;
            }
            return ++stale_epochs_ >= p.patience;
          },
      },
      spec_);
}

StrategyOutcome run_strategy(const TrainingTrace& trace, const NamedStrategy& strategy,
                             std::optional<Epoch> last_epoch) {
  LossMonitor monitor(strategy.spec);
  const EpochRecord* last = nullptr;
  for (const auto& r : trace.records()) {
    if (last_epoch && r.epoch > *last_epoch) break;
    if (!r.val_loss) {
      throw Error(ErrorCode::MissingLoss,
                  "epoch " + std::to_string(r.epoch) + " has no val_loss; strategy '" +
                      strategy.label + "' needs it");
    }
    last = &r;
    if (monitor.observe(*r.val_loss)) return {strategy.label, r.epoch, r.metric, true};
  }
  if (!last) last = &trace.records().front();
  return {strategy.label, last->epoch, last->metric, false};
}

}  // namespace stopwindow
