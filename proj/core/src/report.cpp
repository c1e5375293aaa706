#include "stopwindow/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "stopwindow/error.hpp"

namespace stopwindow {

namespace {

using ordered_json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string fixed(double value, int decimals) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  return buf.data();
}

std::string shortest(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = text.find(sep);
    out.push_back(text.substr(0, pos));
    if (pos == std::string_view::npos) return out;
    text.remove_prefix(pos + 1);
  }
}

ComparisonRow row_from_json(const ordered_json& j) {
  ComparisonRow row;
  row.strategy = j.at("strategy").get<std::string>();
  row.stop_epoch = j.at("stop_epoch").get<Epoch>();
  row.metric_at_stop = j.at("metric_at_stop").get<double>();
  row.max_diff = j.at("max_diff").get<double>();
  row.eff_gain = j.at("eff_gain").get<double>();
  row.flags = j.at("flags").get<std::vector<std::string>>();
  return row;
}

double csv_number(std::string_view cell) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::MalformedRow, "not a number: '" + std::string(cell) + "'");
  }
  return value;
}

}  // namespace

WindowStats summarize_window(double sw_avg, double sw_std, double sw_max, double global_max) {
  WindowStats s{sw_avg, sw_std, sw_max, global_max, 0.0, 0.0};
  s.sw_max_diff = max_diff(sw_max, global_max);
  s.sw_avg_diff = max_diff(sw_avg, global_max);
  return s;
}

WindowStats window_stats(const TrainingTrace& trace, const Window& window) {
  if (!trace.contains(window.start()) || !trace.contains(window.end())) {
    throw Error(ErrorCode::WindowOutOfRange,
                "window [" + std::to_string(window.start()) + ", " + std::to_string(window.end()) +
                    "] is outside trace epochs [" + std::to_string(trace.first_epoch()) + ", " +
                    std::to_string(trace.last_epoch()) + "]");
  }
  std::vector<double> values;
  for (Epoch e = window.start(); e <= window.end(); ++e) values.push_back(trace.at(e).metric);
  if (!std::equal(values.begin(), values.end(), window.values().begin(), window.values().end())) {
    throw Error(ErrorCode::WindowOutOfRange, "window values do not match the trace metric");
  }

  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (const double v : values) sq += (v - mean) * (v - mean);
  const double peak = *std::max_element(values.begin(), values.end());

  const auto all = trace.metrics();
  const double global = *std::max_element(all.begin(), all.end());
  return summarize_window(mean, std::sqrt(sq / n), peak, global);
}

double eff_gain(Epoch stop_epoch, Epoch max_epochs) {
  if (max_epochs <= 0 || stop_epoch < 0 || stop_epoch > max_epochs) {
    throw Error(ErrorCode::OutOfRange, "eff_gain needs 0 <= stop_epoch <= max_epochs, got " +
                                           std::to_string(stop_epoch) + " / " +
                                           std::to_string(max_epochs));
  }
  return (1.0 - static_cast<double>(stop_epoch) / static_cast<double>(max_epochs)) * 100.0;
}

double max_diff(double metric_at_stop, double global_max) {
  if (!(global_max > 0.0)) {
    throw Error(ErrorCode::NonPositiveMax, "global maximum must be > 0, got " + std::to_string(global_max));
  }
  return metric_at_stop / global_max;
}

ComparisonTable compare(const TrainingTrace& trace, const DetectorConfig& config,
                        const std::vector<NamedStrategy>& strategies) {
  config.validate();
  const auto metrics = trace.metrics();
  ComparisonTable table;
  table.metric_name = trace.metric_name();
  table.max_epochs = config.max_epochs;
  table.global_max = *std::max_element(metrics.begin(), metrics.end());

  const bool short_trace = trace.last_epoch() < config.max_epochs;
  auto finish = [&](ComparisonRow row) {
    row.max_diff = max_diff(row.metric_at_stop, table.global_max);
    row.eff_gain = eff_gain(std::max<Epoch>(row.stop_epoch, 0), config.max_epochs);
    if (short_trace) row.flags.emplace_back(flags::kShortTrace);
    table.rows.push_back(std::move(row));
  };

  ComparisonRow ours;
  ours.strategy = std::string(kStopWindowLabel);
  const auto decision = detect_offline(trace, config);
  if (const auto* stop = std::get_if<Stop>(&decision)) {
    ours.stop_epoch = stop->stop_epoch;
  } else {
    ours.stop_epoch = std::get<Exhausted>(decision).best_epoch;
    ours.flags.emplace_back(flags::kExhausted);
  }
  ours.metric_at_stop = trace.at(ours.stop_epoch).metric;
  finish(std::move(ours));

  for (const auto& strategy : strategies) {
    const auto outcome = run_strategy(trace, strategy, config.max_epochs);
    ComparisonRow row;
    row.strategy = outcome.label;
    row.stop_epoch = outcome.stop_epoch;
    row.metric_at_stop = outcome.metric_at_stop;
    if (!outcome.stopped) row.flags.emplace_back(flags::kNoStop);
    finish(std::move(row));
  }
  return table;
}

Format parse_format(std::string_view name) {
  if (name == "markdown" || name == "md") return Format::Markdown;
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw Error(ErrorCode::InvalidConfig, "unknown format '" + std::string(name) + "'");
}

std::string render(const ComparisonTable& table, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::Markdown: {
      out << "| strategy | stop_epoch | " << table.metric_name << " | MaxDiff | EffGain | flags |\n";
      out << "|---|---:|---:|---:|---:|---|\n";
      for (const auto& r : table.rows) {
        out << "| " << r.strategy << " | " << r.stop_epoch << " | " << fixed(r.metric_at_stop, 2)
            << " | " << fixed(r.max_diff, 2) << " | " << fixed(r.eff_gain, 1) << "(%) | "
            << join(r.flags, ", ") << " |\n";
      }
      break;
    }
    case Format::Csv: {
      out << "strategy,stop_epoch,metric_at_stop,max_diff,eff_gain,flags\n";
      for (const auto& r : table.rows) {
        out << r.strategy << ',' << r.stop_epoch << ',' << shortest(r.metric_at_stop) << ','
            << shortest(r.max_diff) << ',' << shortest(r.eff_gain) << ',' << join(r.flags, ";")
            << '\n';
      }
      break;
    }
    case Format::Json: {
      ordered_json j;
      j["metric_name"] = table.metric_name;
      j["max_epochs"] = table.max_epochs;
      j["global_max"] = table.global_max;
      j["rows"] = ordered_json::array();
      for (const auto& r : table.rows) {
        j["rows"].push_back({{"strategy", r.strategy},
                             {"stop_epoch", r.stop_epoch},
                             {"metric_at_stop", r.metric_at_stop},
                             {"max_diff", r.max_diff},
                             {"eff_gain", r.eff_gain},
                             {"flags", r.flags}});
      }
      out << j.dump() << '\n';
      break;
    }
  }
  return out.str();
}

std::string render(const WindowStats& s, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::Markdown:
      out << "| SwAvg | SwStd | SwMax | Max | SwMaxDiff | SwAvgDiff |\n";
      out << "|---:|---:|---:|---:|---:|---:|\n";
      out << "| " << fixed(s.sw_avg, 2) << " | " << fixed(s.sw_std, 2) << " | " << fixed(s.sw_max, 2)
          << " | " << fixed(s.global_max, 2) << " | " << fixed(s.sw_max_diff, 2) << " | "
          << fixed(s.sw_avg_diff, 2) << " |\n";
      break;
    case Format::Csv:
      out << "sw_avg,sw_std,sw_max,global_max,sw_max_diff,sw_avg_diff\n";
      out << shortest(s.sw_avg) << ',' << shortest(s.sw_std) << ',' << shortest(s.sw_max) << ','
          << shortest(s.global_max) << ',' << shortest(s.sw_max_diff) << ','
          << shortest(s.sw_avg_diff) << '\n';
      break;
    case Format::Json: {
      ordered_json j{{"sw_avg", s.sw_avg},           {"sw_std", s.sw_std},
                     {"sw_max", s.sw_max},           {"global_max", s.global_max},
                     {"sw_max_diff", s.sw_max_diff}, {"sw_avg_diff", s.sw_avg_diff}};
      out << j.dump() << '\n';
      break;
    }
  }
  return out.str();
}

std::string render(const Decision& decision, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::Json: {
      ordered_json j;
      std::visit(overloaded{
                     [&](const Continue&) { j["action"] = "continue"; },
                     [&](const Stop& s) {
                       j["action"] = "stop";
                       j["swindow"] = {s.window.start(), s.window.end()};
                       j["stop_epoch"] = s.stop_epoch;
                       j["lag"] = s.lag;
                     },
                     [&](const Exhausted& x) {
                       j["action"] = "exhausted";
                       j["best_epoch"] = x.best_epoch;
                     },
                 },
                 decision);
      out << j.dump() << '\n';
      break;
    }
    case Format::Csv:
      out << "action,swindow_start,swindow_end,stop_epoch,lag,best_epoch\n";
      std::visit(overloaded{
                     [&](const Continue&) { out << "continue,,,,,\n"; },
                     [&](const Stop& s) {
                       out << "stop," << s.window.start() << ',' << s.window.end() << ','
                           << s.stop_epoch << ',' << s.lag << ",\n";
                     },
                     [&](const Exhausted& x) { out << "exhausted,,,,," << x.best_epoch << '\n'; },
                 },
                 decision);
      break;
    case Format::Markdown:
      out << "| action | swindow | stop_epoch | lag | best_epoch |\n";
      out << "|---|---|---:|---:|---:|\n";
      std::visit(overloaded{
                     [&](const Continue&) { out << "| continue | | | | |\n"; },
                     [&](const Stop& s) {
                       out << "| stop | [" << s.window.start() << ", " << s.window.end() << "] | "
                           << s.stop_epoch << " | " << s.lag << " | |\n";
                     },
                     [&](const Exhausted& x) {
                       out << "| exhausted | | | | " << x.best_epoch << " |\n";
                     },
                 },
                 decision);
      break;
  }
  return out.str();
}

ComparisonTable parse_comparison_json(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    ComparisonTable table;
    table.metric_name = j.at("metric_name").get<std::string>();
    table.max_epochs = j.at("max_epochs").get<Epoch>();
    table.global_max = j.at("global_max").get<double>();
    for (const auto& r : j.at("rows")) table.rows.push_back(row_from_json(r));
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRow, std::string("comparison json: ") + e.what());
  }
}

ComparisonTable parse_comparison_csv(std::string_view text) {
  ComparisonTable table;
  auto lines = split(text, '\n');
  if (lines.empty() || lines.front() != "strategy,stop_epoch,metric_at_stop,max_diff,eff_gain,flags") {
    throw Error(ErrorCode::MalformedHeader, "unexpected comparison csv header");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split(lines[i], ',');
    if (cells.size() != 6) throw Error(ErrorCode::MalformedRow, "comparison csv row needs 6 cells");
    ComparisonRow row;
    row.strategy = std::string(cells[0]);
    Epoch epoch = 0;
    const auto [ptr, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), epoch);
    if (ec != std::errc{} || ptr != cells[1].data() + cells[1].size()) {
      throw Error(ErrorCode::MalformedRow, "bad stop_epoch '" + std::string(cells[1]) + "'");
    }
    row.stop_epoch = epoch;
    row.metric_at_stop = csv_number(cells[2]);
    row.max_diff = csv_number(cells[3]);
    row.eff_gain = csv_number(cells[4]);
    if (!cells[5].empty()) {
      for (const auto f : split(cells[5], ';')) row.flags.emplace_back(f);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace stopwindow
