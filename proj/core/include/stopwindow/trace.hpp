#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stopwindow {

using Epoch = std::int64_t;

/// One epoch's observations. `metric` is an accuracy-style percentage in
/// [0, 100]; losses are non-negative.
struct EpochRecord {
  Epoch epoch = 0;
  double metric = 0.0;
  std::optional<double> val_loss;
  std::optional<double> train_loss;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// Throws Error{InvalidRecord} when a field violates the EpochRecord bounds.
void validate_record(const EpochRecord& record);

/// An immutable, validated run: non-empty, epochs strictly consecutive
/// (unit spacing), every record within bounds.
class TrainingTrace {
 public:
  TrainingTrace(std::string run_id, std::vector<EpochRecord> records,
                std::string metric_name = "ImIoU");

  const std::string& run_id() const noexcept { return run_id_; }
  const std::string& metric_name() const noexcept { return metric_name_; }
  std::span<const EpochRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  Epoch first_epoch() const noexcept { return records_.front().epoch; }
  Epoch last_epoch() const noexcept { return records_.back().epoch; }
  bool contains(Epoch epoch) const noexcept {
    return epoch >= first_epoch() && epoch <= last_epoch();
  }
  const EpochRecord& at(Epoch epoch) const;

  std::vector<double> metrics() const;
  bool has_val_loss() const noexcept;

  friend bool operator==(const TrainingTrace&, const TrainingTrace&) = default;

 private:
  std::string run_id_;
  std::string metric_name_;
  std::vector<EpochRecord> records_;
};

struct ParseOptions {
  std::string run_id = "run";
  std::string metric_name = "ImIoU";
  /// Column (CSV) or key (JSONL) holding the monitored metric.
  std::string metric_column = "metric";
  /// Column (CSV) or key (JSONL) holding the validation loss.
  std::string loss_column = "val_loss";
  /// Receives non-fatal diagnostics such as ignored CSV columns.
  std::function<void(std::string_view)> on_warning;
};

TrainingTrace parse_csv(std::istream& in, const ParseOptions& options = {});
TrainingTrace parse_jsonl(std::istream& in, const ParseOptions& options = {});

/// Writes `epoch,metric,val_loss,train_loss` (optional columns only when
/// some record carries them) with shortest round-trip number formatting.
void write_csv(const TrainingTrace& trace, std::ostream& out);

/// Shape of a synthetic saturating training run with optional overfitting.
struct CurveParams {
  Epoch max_epochs = 200;
  double metric_ceiling = 85.0;
  double metric_rate = 5.0;
  double loss_floor = 0.2;
  double loss_rate = 5.0;
  Epoch overfit_onset = 30;
  double overfit_slope = 0.01;
  double noise_amplitude = 0.5;
  std::uint64_t seed = 42;
};

void validate(const CurveParams& params);

/// Generates epochs 1..max_epochs:
///
///   metric(e)   = clamp(ceiling * (1 - exp(-e / metric_rate)) + u, 0, 100)
///   val_loss(e) = max(0, floor + exp(-e / loss_rate)
///                        + slope * max(0, e - onset) + u')
///
/// where u, u' are independent draws from U[-noise, +noise]. The noise source
/// is std::mt19937_64 seeded with `seed`; each draw takes the top 53 bits of
/// one engine output, so the sequence is identical on every conforming
/// platform. Per epoch the metric draw precedes the loss draw.
TrainingTrace generate_synthetic(const CurveParams& params,
                                 std::string run_id = "synthetic");

}  // namespace stopwindow
