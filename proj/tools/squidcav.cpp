// Command-line front end: run, sweep, validate.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "squidcav/cli.hpp"

namespace sc = squidcav::cli;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

sc::GridSpec parse_grid_flags(const std::vector<std::string>& flags) {
  sc::GridSpec spec;
  for (const auto& f : flags) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw sc::ConfigError(f, "grid must be KEY=v1,v2,...");
    std::vector<std::string> values;
    for (auto& v : split(f.substr(eq + 1), ',')) {
      if (!v.empty()) values.push_back(v);
    }
    spec.emplace_back(f.substr(0, eq), std::move(values));
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-SQUID qutrit entanglement simulator"};
  app.set_version_flag("--version", std::string(squidcav::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_path;
  std::string format;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Configuration file (key = value)");
    cmd->add_option("--set", overrides, "Override one key, KEY=VALUE (repeatable)");
    cmd->add_option("--output", output_path, "Write output here instead of stdout");
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* run = app.add_subcommand("run", "Run the protocol once and emit a result record");
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "Run the protocol over a parameter grid");
  add_common(sweep);
  std::vector<std::string> grid_flags;
  bool fixed_drive = false;
  unsigned threads = 0;
  sweep->add_option("--grid", grid_flags, "Swept key and values, KEY=v1,v2 (delta, k, nbar, n_max)")
      ->required();
  sweep->add_flag("--fixed-drive", fixed_drive, "Keep configured k, k_prime when sweeping delta");
  sweep->add_option("--threads", threads, "Worker threads (0: all cores)");

  auto* validate = app.add_subcommand("validate", "Run the built-in verification battery");
  validate->add_option("--output", output_path, "Write the report here instead of stdout");
  validate->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? sc::kOk : sc::kConfigError;
  }

  try {
    if (validate->parsed()) {
      const auto fmt = format == "csv" ? sc::OutputFormat::csv : sc::OutputFormat::json;
      const auto result = sc::cmd_validate(fmt);
      sc::write_output(output_path, result.text, std::cout);
      return result.exit_code;
    }

    const std::string text = config_path.empty() ? std::string() : sc::read_file(config_path);
    sc::RunConfig config = sc::parse_config(text, overrides);
    if (!output_path.empty()) config.output_path = output_path;
    if (!format.empty()) {
      config.output_format = format == "csv" ? sc::OutputFormat::csv : sc::OutputFormat::json;
    }

    sc::CommandOutput result;
    if (run->parsed()) {
      result = sc::cmd_run(config);
    } else {
      result = sc::cmd_sweep(config, sc::build_grid(parse_grid_flags(grid_flags)), fixed_drive,
                             threads);
    }
    sc::write_output(config.output_path, result.text, std::cout);
    return result.exit_code;
  } catch (const sc::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sc::kIoError;
  } catch (const squidcav::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return sc::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sc::kValidationFailure;
  }
}
