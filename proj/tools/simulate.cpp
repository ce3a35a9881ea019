// Command-line front end: simulate <subcommand> [--config path] [--preset name]
//   [--tau list] [--out path] [--seed u64] [--format csv|json]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pmdent/run.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string preset;
  std::vector<double> taus;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string format;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "key = value configuration file");
  sub->add_option("--preset", o.preset, "bundled preset: fig2a-130, fig2a-70, fig2b, fig3");
  sub->add_option("--tau", o.taus, "DGD value(s) in ps")->delimiter(',');
  sub->add_option("--out", o.out, "output path (default: stdout)");
  sub->add_option("--seed", o.seed, "tomography seed");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

int execute(pmdent::cli::Scenario scenario, const Options& o) {
  using namespace pmdent::cli;
  std::string text;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read config " << o.config_path << '\n';
      return kConfigError;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  if (!o.preset.empty()) text = "preset = " + o.preset + "\n" + text;

  RunConfig c;
  try {
    c = parse_config(text);
    if (c.scenario_given && c.scenario != scenario)
      throw ConfigError("validation-error: config scenario '" + std::string(to_string(c.scenario)) +
                        "' does not match subcommand '" + std::string(to_string(scenario)) + "'");
    c.scenario = scenario;
    if (!o.taus.empty()) c.taus = o.taus;
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.out = o.out;
    if (!o.format.empty()) c.format = o.format == "csv" ? Format::csv : Format::json;
  } catch (const pmdent::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return run(c, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  using pmdent::cli::Scenario;
  CLI::App app{"Entanglement degradation by polarization mode dispersion in one fiber arm"};
  app.set_version_flag("--version", std::string(pmdent::cli::kToolVersion));
  app.require_subcommand(1);

  Options options;
  const std::vector<std::pair<Scenario, const char*>> commands{
      {Scenario::curve, "concurrence and maximal CHSH value versus DGD"},
      {Scenario::sweep, "normalized tau_dec versus pump/channel bandwidth ratio"},
      {Scenario::mixed_sweep, "as sweep, with a Gaussian pump"},
      {Scenario::tomo, "simulated coincidence tomography at one DGD"},
      {Scenario::rho, "output density matrix at one DGD"}};
  std::optional<Scenario> chosen;
  for (const auto& [scenario, help] : commands) {
    CLI::App* sub = app.add_subcommand(std::string(pmdent::cli::to_string(scenario)), help);
    add_common(sub, options);
    sub->callback([&chosen, s = scenario] { chosen = s; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pmdent::cli::kConfigError;
  }
  return execute(*chosen, options);
}
