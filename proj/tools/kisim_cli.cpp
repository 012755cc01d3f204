// kisim: command-line front end for the experiment recipes and curve fitting.
//
// Exit codes: 0 success, 2 configuration / usage error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kisim/error.hpp"
#include "kisim/harness/config.hpp"
#include "kisim/harness/experiments.hpp"
#include "kisim/harness/table.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

using kisim::harness::SweepResult;

void emit(const SweepResult& result, const std::string& path) {
  if (path.empty() || path == "-") {
    kisim::harness::write_result(std::cout, result);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw kisim::Error(kisim::ErrorCode::IoError, "cannot write '" + path + "'");
  kisim::harness::write_result(out, result);
}

int exit_code_for(kisim::ErrorCode code) {
  switch (code) {
    case kisim::ErrorCode::ConfigError:
    case kisim::ErrorCode::IoError:
    case kisim::ErrorCode::InvalidArgument:
      return kConfigError;
    default:
      return kNumericalError;
  }
}

std::vector<double> parse_guess(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw kisim::Error(kisim::ErrorCode::ConfigError, "--guess: not a number: '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic-inductance resonator / rfSET simulator"};
  app.set_version_flag("--version", std::string(KISIM_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed_override;
  bool parallel = false;

  using Runner = SweepResult (*)(const kisim::harness::ExperimentConfig&, bool);
  const std::vector<std::tuple<std::string, std::string, Runner>> experiments{
      {"iv", "I-V curves per temperature", kisim::harness::run_iv},
      {"s11", "Reflection spectra, superconducting and normal", kisim::harness::run_s11},
      {"stability-map", "Coulomb diamonds with reflected signal and drain current", kisim::harness::run_stability_map},
      {"snr-benchmark", "SNR vs integration time and t_min vs power", kisim::harness::run_snr_benchmark},
      {"nonlinear", "Power-dependent resonance", kisim::harness::run_nonlinear_sweep},
  };
  Runner selected = nullptr;
  for (const auto& [name, help, runner] : experiments) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output file (default: output_path from the config, else stdout)");
    sub->add_option("--seed-override", seed_override, "replace the config seed");
    sub->add_flag("--parallel", parallel, "use a worker pool for independent sweep points");
    sub->callback([&selected, r = runner] { selected = r; });
  }

  std::string data_path;
  std::string model_name;
  std::string guess_text;
  CLI::App* fit = app.add_subcommand("fit", "Fit a built-in model to (x, y[, weight]) data");
  fit->add_option("--data", data_path, "numeric table with a header row")->required()->check(CLI::ExistingFile);
  fit->add_option("--model", model_name,
                  "eq1_temperature | eq2_current | resonance_lorentzian | powerlaw | constant")
      ->required();
  fit->add_option("--guess", guess_text, "comma-separated initial parameters")->required();
  fit->add_option("--out", out_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (fit->parsed()) {
      std::ifstream in(data_path, std::ios::binary);
      if (!in) throw kisim::Error(kisim::ErrorCode::IoError, "cannot open '" + data_path + "'");
      std::ostringstream raw;
      raw << in.rdbuf();
      std::istringstream parse(raw.str());
      const auto table = kisim::harness::read_numeric_table(parse);
      const std::vector<double> guess = parse_guess(guess_text);
      const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(guess.data(), static_cast<Eigen::Index>(guess.size()));
      const kisim::FitReport report = kisim::harness::run_fit(table, model_name, g);
      const std::string hash = kisim::harness::fnv1a_hex(model_name + "\n" + guess_text + "\n" + raw.str());
      emit(kisim::harness::fit_result(report, model_name, hash), out_path);
      return report.converged ? 0 : kNumericalError;
    }

    kisim::harness::ExperimentConfig config = kisim::harness::load_config(config_path);
    if (seed_override) kisim::harness::apply_seed_override(config, *seed_override);
    const SweepResult result = selected(config, parallel);
    emit(result, out_path.empty() ? config.output_path : out_path);
    return 0;
  } catch (const kisim::Error& e) {
    std::cerr << "kisim: " << kisim::to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "kisim: " << e.what() << '\n';
    return kNumericalError;
  }
}
