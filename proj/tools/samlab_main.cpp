// Command-line front end: configuration-driven reproduction of the
// flatness/generalization experiments. Row data goes to stdout (or --out);
// a one-line summary goes to stderr.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "samlab/scenarios.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::string format = "csv";
  std::int64_t seed = -1;
  bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("config", opts.config_path, "Scenario config file")->required();
  cmd->add_option("--out", opts.out, "Write rows to this path instead of stdout");
  cmd->add_option("--format", opts.format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", opts.seed, "Run a single seed instead of the config's list");
}

samlab::ScenarioConfig load_config(const CommonOpts& opts) {
  samlab::ScenarioConfig cfg = samlab::parse_config_file(opts.config_path);
  if (opts.seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(opts.seed)};
  return cfg;
}

int emit(const std::vector<samlab::ResultRow>& rows, const CommonOpts& opts) {
  if (!opts.out.empty()) {
    samlab::write_rows(rows, opts.out, opts.format);
  } else if (opts.format == "json") {
    std::cout << samlab::rows_to_json(rows);
  } else {
    std::cout << samlab::rows_to_csv(rows);
  }
  long events = 0;
  bool all_ok = true;
  for (const auto& row : rows) {
    if (row.event_held) ++events;
    all_ok = all_ok && row.bound_satisfied;
  }
  std::cerr << "rows=" << rows.size() << " events=" << events
            << " bounds=" << (all_ok ? "ok" : "VIOLATED") << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sharpness-aware optimization experiment harness"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario config");
  add_common(run_cmd, run_opts);

  CommonOpts sweep_opts;
  std::string axis_name = "T";
  std::string values_csv;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a scenario across an axis");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--axis", axis_name, "Sweep axis: T, r, eta, or n")->required();
  sweep_cmd->add_option("--values", values_csv, "Comma-separated axis values")->required();

  CommonOpts verify_opts;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Verify loss properties for a config");
  add_common(verify_cmd, verify_opts);

  CommonOpts stability_opts;
  CLI::App* stability_cmd = app.add_subcommand("stability", "Leave-one-out stability audit");
  add_common(stability_cmd, stability_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return emit(samlab::run_scenario(load_config(run_opts)), run_opts);
    }
    if (sweep_cmd->parsed()) {
      std::vector<double> values;
      std::size_t pos = 0;
      while (pos < values_csv.size()) {
        std::size_t next = values_csv.find(',', pos);
        if (next == std::string::npos) next = values_csv.size();
        values.push_back(std::stod(values_csv.substr(pos, next - pos)));
        pos = next + 1;
      }
      samlab::ScenarioConfig cfg = load_config(sweep_opts);
      return emit(samlab::sweep(cfg, samlab::axis_from_string(axis_name), values), sweep_opts);
    }
    if (verify_cmd->parsed()) {
      samlab::ScenarioConfig cfg = load_config(verify_opts);
      cfg.scenario = samlab::Scenario::LossVerify;
      return emit(samlab::run_scenario(cfg), verify_opts);
    }
    if (stability_cmd->parsed()) {
      samlab::ScenarioConfig cfg = load_config(stability_opts);
      cfg.scenario = samlab::Scenario::StabilityAudit;
      return emit(samlab::run_scenario(cfg), stability_opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
