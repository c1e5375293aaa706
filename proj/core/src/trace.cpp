#include "stopwindow/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <system_error>

#include <json.hpp>

#include "stopwindow/error.hpp"

namespace stopwindow {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t begin = 0;
  for (;;) {
    const auto comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(begin)));
      return cells;
    }
    cells.push_back(trim(line.substr(begin, comma - begin)));
    begin = comma + 1;
  }
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::optional<double> to_double(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<Epoch> to_epoch(std::string_view cell) {
  Epoch value = 0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

// Record bounds, reported as MalformedRow during ingestion.
std::optional<std::string> record_violation(const EpochRecord& r) {
  if (!std::isfinite(r.metric) || r.metric < 0.0 || r.metric > 100.0) {
    return "metric " + std::to_string(r.metric) + " outside [0, 100]";
  }
  if (r.val_loss && (!std::isfinite(*r.val_loss) || *r.val_loss < 0.0)) {
    return "val_loss must be finite and >= 0";
  }
  if (r.train_loss && (!std::isfinite(*r.train_loss) || *r.train_loss < 0.0)) {
    return "train_loss must be finite and >= 0";
  }
  return std::nullopt;
}

void check_consecutive(std::span<const EpochRecord> records) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].epoch != records[i - 1].epoch + 1) {
      throw Error(ErrorCode::NonConsecutiveEpochs,
                  "epoch " + std::to_string(records[i].epoch) + " follows epoch " +
                      std::to_string(records[i - 1].epoch) + "; epochs must increase by 1");
    }
  }
}

void append_number(std::string& out, double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), ptr);
}

// Uniform on [-amplitude, +amplitude] from the top 53 bits of one draw.
double uniform_noise(std::mt19937_64& engine, double amplitude) {
  const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
  return amplitude * (2.0 * unit - 1.0);
}

}  // namespace

void validate_record(const EpochRecord& record) {
  if (auto why = record_violation(record)) {
    throw Error(ErrorCode::InvalidRecord, "epoch " + std::to_string(record.epoch) + ": " + *why);
  }
}

TrainingTrace::TrainingTrace(std::string run_id, std::vector<EpochRecord> records,
                             std::string metric_name)
    : run_id_(std::move(run_id)), metric_name_(std::move(metric_name)), records_(std::move(records)) {
  if (records_.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no records");
  for (const auto& r : records_) validate_record(r);
  check_consecutive(records_);
}

const EpochRecord& TrainingTrace::at(Epoch epoch) const {
  if (!contains(epoch)) {
    throw Error(ErrorCode::OutOfRange, "epoch " + std::to_string(epoch) + " not in trace");
  }
  return records_[static_cast<std::size_t>(epoch - first_epoch())];
}

std::vector<double> TrainingTrace::metrics() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.metric);
  return out;
}

bool TrainingTrace::has_val_loss() const noexcept {
  return std::all_of(records_.begin(), records_.end(),
                     [](const EpochRecord& r) { return r.val_loss.has_value(); });
}

TrainingTrace parse_csv(std::istream& in, const ParseOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  // Skip leading blank lines; the first non-blank line is the header.
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw Error(ErrorCode::EmptyTrace, "input has no header line");

  std::string_view header = line;
  if (header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);  // UTF-8 BOM
  const auto names = split_commas(header);

  std::optional<std::size_t> epoch_col, metric_col, loss_col, train_col;
  std::map<std::string_view, int> seen;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto name = names[i];
    if (name.empty()) throw Error(ErrorCode::MalformedHeader, "empty column name in header");
    if (++seen[name] > 1) {
      throw Error(ErrorCode::MalformedHeader, "duplicate column '" + std::string(name) + "'");
    }
    if (name == "epoch") {
      epoch_col = i;
    } else if (name == options.metric_column) {
      metric_col = i;
    } else if (name == options.loss_column) {
      loss_col = i;
    } else if (name == "train_loss") {
      train_col = i;
    } else if (options.on_warning) {
      options.on_warning("ignoring unrecognized column '" + std::string(name) + "'");
    }
  }
  if (!epoch_col) throw Error(ErrorCode::MalformedHeader, "missing mandatory column 'epoch'");
  if (!metric_col) {
    throw Error(ErrorCode::MalformedHeader,
                "missing mandatory column '" + options.metric_column + "'");
  }

  std::vector<EpochRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != names.size()) {
      throw Error(ErrorCode::MalformedRow, where(line_no) + "expected " +
                                               std::to_string(names.size()) + " cells, got " +
                                               std::to_string(cells.size()));
    }
    EpochRecord r;
    const auto epoch = to_epoch(cells[*epoch_col]);
    if (!epoch) {
      throw Error(ErrorCode::MalformedRow,
                  where(line_no) + "epoch '" + std::string(cells[*epoch_col]) + "' is not an integer");
    }
    r.epoch = *epoch;
    const auto metric = to_double(cells[*metric_col]);
    if (!metric) {
      throw Error(ErrorCode::MalformedRow, where(line_no) + "metric '" +
                                               std::string(cells[*metric_col]) +
                                               "' is not a finite number");
    }
    r.metric = *metric;
    auto optional_cell = [&](std::optional<std::size_t> col, const char* what) -> std::optional<double> {
      if (!col || cells[*col].empty()) return std::nullopt;
      auto v = to_double(cells[*col]);
      if (!v) {
        throw Error(ErrorCode::MalformedRow, where(line_no) + what + " '" +
                                                 std::string(cells[*col]) +
                                                 "' is not a finite number");
      }
      return v;
    };
    r.val_loss = optional_cell(loss_col, "val_loss");
    r.train_loss = optional_cell(train_col, "train_loss");
    if (auto why = record_violation(r)) throw Error(ErrorCode::MalformedRow, where(line_no) + *why);
    records.push_back(r);
  }
  if (records.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no data rows");
  check_consecutive(records);
  return TrainingTrace(options.run_id, std::move(records), options.metric_name);
}

TrainingTrace parse_jsonl(std::istream& in, const ParseOptions& options) {
  using nlohmann::json;
  std::vector<EpochRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRow, where(line_no) + e.what());
    }
    if (!obj.is_object()) throw Error(ErrorCode::MalformedRow, where(line_no) + "not a JSON object");

    EpochRecord r;
    const auto epoch = obj.find("epoch");
    if (epoch == obj.end() || !epoch->is_number_integer()) {
      throw Error(ErrorCode::MalformedRow, where(line_no) + "'epoch' must be an integer");
    }
    r.epoch = epoch->get<Epoch>();
    const auto metric = obj.find(options.metric_column);
    if (metric == obj.end() || !metric->is_number()) {
      throw Error(ErrorCode::MalformedRow,
                  where(line_no) + "'" + options.metric_column + "' must be a number");
    }
    r.metric = metric->get<double>();
    auto optional_key = [&](const std::string& key) -> std::optional<double> {
      const auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) return std::nullopt;
      if (!it->is_number()) {
        throw Error(ErrorCode::MalformedRow, where(line_no) + "'" + key + "' must be a number");
      }
      return it->get<double>();
    };
    r.val_loss = optional_key(options.loss_column);
    r.train_loss = optional_key("train_loss");
    if (auto why = record_violation(r)) throw Error(ErrorCode::MalformedRow, where(line_no) + *why);
    records.push_back(r);
  }
  if (records.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no records");
  check_consecutive(records);
  return TrainingTrace(options.run_id, std::move(records), options.metric_name);
}

void write_csv(const TrainingTrace& trace, std::ostream& out) {
  const auto recs = trace.records();
  const bool any_val = std::any_of(recs.begin(), recs.end(), [](auto& r) { return r.val_loss.has_value(); });
  const bool any_train = std::any_of(recs.begin(), recs.end(), [](auto& r) { return r.train_loss.has_value(); });

  std::string text = "epoch,metric";
  if (any_val) text += ",val_loss";
  if (any_train) text += ",train_loss";
  text += '\n';
  for (const auto& r : recs) {
    text += std::to_string(r.epoch);
    text += ',';
    append_number(text, r.metric);
    if (any_val) {
      text += ',';
      if (r.val_loss) append_number(text, *r.val_loss);
    }
    if (any_train) {
      text += ',';
      if (r.train_loss) append_number(text, *r.train_loss);
    }
    text += '\n';
  }
  out << text;
}

void validate(const CurveParams& p) {
  std::vector<std::string> problems;
  auto require = [&](bool ok, const char* what) {
    if (!ok) problems.emplace_back(what);
  };
  require(p.max_epochs >= 1, "max_epochs must be >= 1");
  require(std::isfinite(p.metric_ceiling) && p.metric_ceiling > 0.0 && p.metric_ceiling <= 100.0,
          "metric_ceiling must lie in (0, 100]");
  require(std::isfinite(p.metric_rate) && p.metric_rate > 0.0, "metric_rate must be > 0");
  require(std::isfinite(p.loss_floor) && p.loss_floor >= 0.0, "loss_floor must be >= 0");
  require(std::isfinite(p.loss_rate) && p.loss_rate > 0.0, "loss_rate must be > 0");
  require(p.overfit_onset >= 0 && p.overfit_onset <= p.max_epochs,
          "overfit_onset must lie in [0, max_epochs]");
  require(std::isfinite(p.overfit_slope) && p.overfit_slope >= 0.0, "overfit_slope must be >= 0");
  require(std::isfinite(p.noise_amplitude) && p.noise_amplitude >= 0.0 &&
              p.noise_amplitude < p.metric_ceiling,
          "noise_amplitude must lie in [0, metric_ceiling)");
  if (!problems.empty()) {
    std::string msg = "invalid curve parameters: ";
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i) msg += "; ";
      msg += problems[i];
    }
    throw Error(ErrorCode::InvalidParams, msg);
  }
}

TrainingTrace generate_synthetic(const CurveParams& p, std::string run_id) {
  validate(p);
  std::mt19937_64 engine(p.seed);
  std::vector<EpochRecord> records;
  records.reserve(static_cast<std::size_t>(p.max_epochs));
  for (Epoch e = 1; e <= p.max_epochs; ++e) {
    const auto x = static_cast<double>(e);
    const double metric_noise = uniform_noise(engine, p.noise_amplitude);
    const double loss_noise = uniform_noise(engine, p.noise_amplitude);

    EpochRecord r;
    r.epoch = e;
    r.metric = std::clamp(p.metric_ceiling * (1.0 - std::exp(-x / p.metric_rate)) + metric_noise,
                          0.0, 100.0);
    const double overfit = p.overfit_slope * std::max(0.0, x - static_cast<double>(p.overfit_onset));
    r.val_loss = std::max(0.0, p.loss_floor + std::exp(-x / p.loss_rate) + overfit + loss_noise);
    records.push_back(r);
  }
  return TrainingTrace(std::move(run_id), std::move(records));
}

}  // namespace stopwindow
