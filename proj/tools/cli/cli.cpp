#include "cli/cli.hpp"

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stopwindow/stopwindow.hpp"

#ifndef STOPWINDOW_VERSION
#define STOPWINDOW_VERSION "0.0.0"
#endif

namespace stopwindow::cli {

namespace {

constexpr int kServeProtocolRevision = 1;

struct DetectorFlags {
  int min_window = 4;
  double max_oscillation = 2.0;
  Epoch max_epochs = 200;
  std::string mode = "signchange";
  double epsilon = 0.0;
  std::string size = "exclusive";

  DetectorConfig to_config() const {
    DetectorConfig c;
    c.min_window = min_window;
    c.max_oscillation = max_oscillation;
    c.max_epochs = max_epochs;
    c.epsilon = epsilon;
    if (mode == "signchange") {
      c.mode = ExtremumMode::SignChange;
    } else if (mode == "strict") {
      c.mode = ExtremumMode::Strict;
    } else {
      throw Error(ErrorCode::InvalidConfig, "--mode must be strict or signchange, got '" + mode + "'");
    }
    if (size == "exclusive") {
      c.size_semantics = SizeSemantics::Exclusive;
    } else if (size == "inclusive") {
      c.size_semantics = SizeSemantics::Inclusive;
    } else {
      throw Error(ErrorCode::InvalidConfig, "--size must be inclusive or exclusive, got '" + size + "'");
    }
    c.validate();
    return c;
  }
};

struct InputFlags {
  std::string path;
  std::string input_format = "auto";
  std::string metric_col = "metric";
  std::string loss_col = "val_loss";
  std::string metric_name = "ImIoU";
};

CLI::Option* add_detector_flags(CLI::App* cmd, DetectorFlags& f) {
  cmd->add_option("--N", f.min_window, "Minimum stop-window size in epochs")->capture_default_str();
  cmd->add_option("--D", f.max_oscillation, "Maximum |consecutive difference| inside a window")
      ->capture_default_str();
  auto* max_epochs = cmd->add_option("--max-epochs", f.max_epochs, "Training epoch budget")
                         ->capture_default_str();
  cmd->add_option("--mode", f.mode, "Extremum detection: strict|signchange")->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon, "Derivative tolerance for strict mode")->capture_default_str();
  cmd->add_option("--size", f.size, "Window size counting: inclusive|exclusive")->capture_default_str();
  return max_epochs;
}

void add_input_flags(CLI::App* cmd, InputFlags& f) {
  cmd->add_option("trace", f.path, "Trace file (.csv or .jsonl), '-' for stdin")->required();
  cmd->add_option("--input-format", f.input_format, "auto|csv|jsonl")->capture_default_str();
  cmd->add_option("--metric-col", f.metric_col, "Column holding the monitored metric")->capture_default_str();
  cmd->add_option("--loss-col", f.loss_col, "Column holding the validation loss")->capture_default_str();
  cmd->add_option("--metric-name", f.metric_name, "Display name of the metric")->capture_default_str();
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

TrainingTrace load_trace(const InputFlags& f, std::istream& in, std::ostream& err) {
  ParseOptions options;
  options.run_id = f.path;
  options.metric_name = f.metric_name;
  options.metric_column = f.metric_col;
  options.loss_column = f.loss_col;
  options.on_warning = [&err](std::string_view msg) { err << "warning: " << msg << '\n'; };

  bool jsonl = false;
  if (f.input_format == "jsonl") {
    jsonl = true;
  } else if (f.input_format == "auto") {
    jsonl = ends_with(f.path, ".jsonl") || ends_with(f.path, ".ndjson");
  } else if (f.input_format != "csv") {
    throw Error(ErrorCode::InvalidConfig, "--input-format must be auto, csv or jsonl");
  }

  if (f.path == "-") return jsonl ? parse_jsonl(in, options) : parse_csv(in, options);
  std::ifstream file(f.path);
  if (!file) throw std::ios_base::failure("cannot open '" + f.path + "'");
  return jsonl ? parse_jsonl(file, options) : parse_csv(file, options);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidN:
    case ErrorCode::InvalidD:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidStrategy:
      return kExitConfig;
    case ErrorCode::MissingLoss:
      return kExitMissingLoss;
    default:
      return kExitIo;
  }
}

int exit_code_for(const Decision& decision) {
  return std::holds_alternative<Exhausted>(decision) ? kExitExhausted : kExitOk;
}

std::string error_response(std::string_view code, std::string_view detail) {
  nlohmann::ordered_json j{{"action", "error"}, {"code", code}, {"detail", detail}};
  return j.dump();
}

// Returns nullopt and fills `problem` when the line is not a valid request.
std::optional<EpochRecord> parse_request(const std::string& line, std::string& problem) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    problem = e.what();
    return std::nullopt;
  }
  if (!j.is_object()) {
    problem = "request must be a JSON object";
    return std::nullopt;
  }
  const auto epoch = j.find("epoch");
  const auto metric = j.find("metric");
  if (epoch == j.end() || !epoch->is_number_integer()) {
    problem = "'epoch' must be an integer";
    return std::nullopt;
  }
  if (metric == j.end() || !metric->is_number()) {
    problem = "'metric' must be a number";
    return std::nullopt;
  }
  EpochRecord r;
  r.epoch = epoch->get<Epoch>();
  r.metric = metric->get<double>();
  if (const auto loss = j.find("val_loss"); loss != j.end() && !loss->is_null()) {
    if (!loss->is_number()) {
      problem = "'val_loss' must be a number";
      return std::nullopt;
    }
    r.val_loss = loss->get<double>();
  }
  return r;
}

int serve(const DetectorConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  StopWindowDetector detector(config);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string problem;
    const auto record = parse_request(line, problem);
    if (!record) {
      out << error_response("malformed_request", problem) << '\n' << std::flush;
      continue;
    }
    try {
      const auto decision = detector.feed(*record);
      out << render(decision, Format::Json) << std::flush;
      if (!std::holds_alternative<Continue>(decision)) return exit_code_for(decision);
    } catch (const Error& e) {
      out << error_response(to_string(e.code()), e.what()) << '\n' << std::flush;
      if (e.code() == ErrorCode::NonConsecutiveEpoch) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
      }
    }
  }
  return kExitOk;
}

}  // namespace

std::string version_string() {
  return std::string("stopwindow ") + STOPWINDOW_VERSION + " (serve protocol " +
         std::to_string(kServeProtocolRevision) + ")";
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Stop-window early stopping for training metric traces", "stopwindow"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print version and serve protocol revision");

  DetectorFlags det;
  InputFlags input;
  std::string format;

  auto* detect = app.add_subcommand("detect", "Replay a trace through the stop-window detector");
  add_input_flags(detect, input);
  add_detector_flags(detect, det);
  detect->add_option("--format", format, "markdown|csv|json (default json)");

  auto* stats = app.add_subcommand("stats", "Summarise the metric inside the detected stop-window");
  add_input_flags(stats, input);
  add_detector_flags(stats, det);
  stats->add_option("--format", format, "markdown|csv|json (default markdown)");

  std::string strategies = "earlys1,earlys2,earlys3,earlys4";
  auto* cmp = app.add_subcommand("compare", "Compare the detector with loss-based strategies");
  add_input_flags(cmp, input);
  add_detector_flags(cmp, det);
  cmp->add_option("--strategies", strategies,
                  "Comma list: earlys1..4, previncrease:<f>, patience:<p>[:<min_delta>]")
      ->capture_default_str();
  cmp->add_option("--format", format, "markdown|csv|json (default markdown)");

  CurveParams curve;
  std::string output_path;
  std::string run_id = "synthetic";
  auto* sim = app.add_subcommand("simulate", "Write a seeded synthetic training trace as CSV");
  sim->add_option("--max-epochs", curve.max_epochs, "Number of epochs")->capture_default_str();
  sim->add_option("--ceiling", curve.metric_ceiling, "Metric saturation level")->capture_default_str();
  sim->add_option("--metric-rate", curve.metric_rate, "Metric saturation time constant")->capture_default_str();
  sim->add_option("--loss-floor", curve.loss_floor, "Asymptotic validation loss")->capture_default_str();
  sim->add_option("--loss-rate", curve.loss_rate, "Loss decay time constant")->capture_default_str();
  sim->add_option("--overfit-onset", curve.overfit_onset, "Epoch where loss starts rising")
      ->capture_default_str();
  sim->add_option("--overfit-slope", curve.overfit_slope, "Loss increase per epoch after onset")
      ->capture_default_str();
  sim->add_option("--noise", curve.noise_amplitude, "Uniform noise half-width")->capture_default_str();
  sim->add_option("--seed", curve.seed, "64-bit RNG seed")->capture_default_str();
  sim->add_option("--run-id", run_id, "Run label")->capture_default_str();
  sim->add_option("-o,--output", output_path, "Output path (default stdout)");

  DetectorFlags serve_flags;
  auto* srv = app.add_subcommand("serve", "Line protocol: one JSON request per epoch on stdin");
  add_detector_flags(srv, serve_flags)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (show_version) {
    out << version_string() << '\n';
    return kExitOk;
  }

  try {
    if (*detect) {
      const auto config = det.to_config();
      const auto fmt = parse_format(format.empty() ? "json" : format);
      const auto trace = load_trace(input, in, err);
      const auto decision = replay(trace, config);
      out << render(decision, fmt);
      return exit_code_for(decision);
    }
    if (*stats) {
      const auto config = det.to_config();
      const auto fmt = parse_format(format.empty() ? "markdown" : format);
      const auto trace = load_trace(input, in, err);
      const auto decision = replay(trace, config);
      const auto* stop = std::get_if<Stop>(&decision);
      if (!stop) {
        err << "no stop-window found; best epoch " << std::get<Exhausted>(decision).best_epoch << '\n';
        return kExitExhausted;
      }
      out << render(window_stats(trace, stop->window), fmt);
      return kExitOk;
    }
    if (*cmp) {
      const auto config = det.to_config();
      const auto fmt = parse_format(format.empty() ? "markdown" : format);
      const auto specs = parse_strategy_list(strategies);
      const auto trace = load_trace(input, in, err);
      out << render(compare(trace, config, specs), fmt);
      return kExitOk;
    }
    if (*sim) {
      const auto trace = generate_synthetic(curve, run_id);
      if (output_path.empty() || output_path == "-") {
        write_csv(trace, out);
        return kExitOk;
      }
      std::ofstream file(output_path, std::ios::binary | std::ios::trunc);
      if (!file) throw std::ios_base::failure("cannot write '" + output_path + "'");
      write_csv(trace, file);
      if (!file.flush()) throw std::ios_base::failure("write to '" + output_path + "' failed");
      return kExitOk;
    }
    if (*srv) {
      return serve(serve_flags.to_config(), in, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }

  out << app.help();
  return kExitConfig;
}

}  // namespace stopwindow::cli
