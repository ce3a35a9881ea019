#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pmdent/analysis.hpp"
#include "pmdent/errors.hpp"
#include "pmdent/pmdcore.hpp"
#include "pmdent/tomosim.hpp"

namespace pmdent::cli {

/// Raised for malformed or invalid run configurations (exit status 2).
class ConfigError : public Error {
public:
  using Error::Error;
};

enum class Scenario { curve, sweep, mixed_sweep, tomo, rho };
enum class Format { csv, json };

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::curve: return "curve";
    case Scenario::sweep: return "sweep";
    case Scenario::mixed_sweep: return "mixed-sweep";
    case Scenario::tomo: return "tomo";
    case Scenario::rho: return "rho";
  }
  return "?";
}

inline std::optional<Scenario> scenario_from(std::string_view s) {
  for (Scenario sc : {Scenario::curve, Scenario::sweep, Scenario::mixed_sweep, Scenario::tomo,
                      Scenario::rho})
    if (to_string(sc) == s) return sc;
  return std::nullopt;
}

inline std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

/// Presets bundled with the tool.
inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig2a-130", "fig2a-70", "fig2b", "fig3"};
  return names;
}

/// Fully validated description of one run.
struct RunConfig {
  Scenario scenario = Scenario::curve;
  /// True when the configuration text named the scenario explicitly.
  bool scenario_given = false;
  std::string preset;

  int order_a = 3;
  int order_b = 3;
  int pump_order = 3;
  double fwhm_a_ghz = 130.0;
  double fwhm_b_ghz = 130.0;
  double pump_ghz = 120.0;
  double center_a_ghz = 0.0;
  double center_b_ghz = 0.0;
  double center_pump_ghz = 0.0;
  PumpBandwidth pump_convention = PumpBandwidth::power;
  QuadratureSpec quadrature{};

  /// DGD values in ps. Empty means the scenario default.
  std::vector<double> taus;

  /// Sweep orders (sweep, mixed-sweep) and B_p / B_ch grid.
  std::vector<int> orders{3};
  std::vector<double> ratios = default_ratios();
  double sweep_channel_ghz = 100.0;
  double threshold = 0.1;

  double pairs = 1e6;
  double efficiency = 0.20;
  std::uint64_t seed = 0;
  bool noiseless = false;

  std::string out;
  std::optional<Format> format;

  LinkConfig link() const {
    LinkConfig c;
    c.filter_a = {order_a, fwhm_a_ghz, center_a_ghz};
    c.filter_b = {order_b, fwhm_b_ghz, center_b_ghz};
    c.pump = {pump_order, pump_power_fwhm(pump_ghz, pump_order, pump_convention),
              center_pump_ghz};
    c.quadrature = quadrature;
    return c;
  }

  SweepOptions sweep_options() const {
    SweepOptions o;
    o.channel_ghz = sweep_channel_ghz;
    o.threshold.level = threshold;
    o.quadrature = quadrature;
    o.pump_convention = pump_convention;
    return o;
  }

  TomographyPlan plan() const {
    TomographyPlan p = default_plan();
    p.pairs_per_setting = pairs;
    p.efficiency = efficiency;
    p.seed = seed;
    return p;
  }

  /// DGD grid after scenario defaults: 0..30 ps in 0.5 ps steps for curves,
  /// a single 0 ps point for rho and tomo.
  std::vector<double> effective_taus() const {
    if (!taus.empty()) return taus;
    if (scenario == Scenario::curve) return tau_grid(30.0, 0.5);
    return {0.0};
  }

  Format effective_format() const {
    if (format) return *format;
    return scenario == Scenario::rho ? Format::json : Format::csv;
  }

  /// Throws ConfigError naming the violated invariant.
  void validate() const {
    try {
      link().validate();
      DecThreshold{threshold}.validate();
      plan().validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("validation-error: ") + e.what());
    }
    if (!(threshold < 1.0))
      throw ConfigError("validation-error: threshold must lie in (0, 1)");
    for (int n : orders)
      if (n < 1) throw ConfigError("validation-error: sweep orders must be >= 1");
    if (orders.empty()) throw ConfigError("validation-error: at least one sweep order required");
    if (ratios.empty()) throw ConfigError("validation-error: ratio grid is empty");
    for (double r : ratios)
      if (!(r > 0.0)) throw ConfigError("validation-error: ratios must be positive");
    if (!(sweep_channel_ghz > 0.0))
      throw ConfigError("validation-error: sweep_bch_ghz must be positive");
    if ((scenario == Scenario::rho || scenario == Scenario::tomo) && effective_taus().size() != 1)
      throw ConfigError("validation-error: " + std::string(to_string(scenario)) +
                        " takes a single tau_ps value");
  }

  /// Stable text form of every setting that affects the output.
  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "scenario=" << to_string(scenario) << "\npreset=" << preset << "\norder_a=" << order_a
       << "\norder_b=" << order_b << "\npump_order=" << pump_order << "\nfwhm_a_ghz=" << fwhm_a_ghz
       << "\nfwhm_b_ghz=" << fwhm_b_ghz << "\nbp_ghz=" << pump_ghz
       << "\ncenter_a_ghz=" << center_a_ghz << "\ncenter_b_ghz=" << center_b_ghz
       << "\ncenter_p_ghz=" << center_pump_ghz << "\npump_bandwidth="
       << (pump_convention == PumpBandwidth::power ? "power" : "field")
       << "\nnodes=" << quadrature.nodes_per_axis << "\ntruncation_eps=" << quadrature.truncation_eps
       << "\ntau_ps=";
    for (double t : effective_taus()) os << t << ',';
    os << "\norders=";
    for (int n : orders) os << n << ',';
    os << "\nratios=";
    for (double r : ratios) os << r << ',';
    os << "\nsweep_bch_ghz=" << sweep_channel_ghz << "\nthreshold=" << threshold
       << "\npairs=" << pairs << "\nefficiency=" << efficiency << "\nseed=" << seed
       << "\nnoiseless=" << noiseless << "\n";
    return os.str();
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
public:
  Reader(const std::map<std::string, Entry>& entries) : entries_(entries) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  double real(const std::string& key) const {
    const Entry& e = entries_.at(key);
    return parse_real(e.value, key, e.line);
  }

  long long integer(const std::string& key) const {
    const Entry& e = entries_.at(key);
    long long v = 0;
    const char* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(key, e.line, "expected an integer");
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const Entry& e = entries_.at(key);
    std::uint64_t v = 0;
    const char* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(key, e.line, "expected an unsigned integer");
    return v;
  }

  const std::string& text(const std::string& key) const { return entries_.at(key).value; }
  int line(const std::string& key) const { return entries_.at(key).line; }

  std::vector<double> reals(const std::string& key) const {
    const Entry& e = entries_.at(key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), key, e.line));
    if (out.empty()) fail(key, e.line, "expected a comma-separated list");
    return out;
  }

  [[noreturn]] static void fail(const std::string& key, int line, const std::string& why) {
    throw ConfigError("parse-error: line " + std::to_string(line) + ", key '" + key + "': " + why);
  }

private:
  static double parse_real(const std::string& s, const std::string& key, int line) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) fail(key, line, "trailing characters in number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail(key, line, "expected a number, got '" + s + "'");
    }
  }

  const std::map<std::string, Entry>& entries_;
};

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "scenario",     "preset",       "order",         "order_a",      "order_b",
      "pump_order",   "bch_ghz",      "fwhm_a_ghz",    "fwhm_b_ghz",   "bp_ghz",
      "center_a_ghz", "center_b_ghz", "center_p_ghz",  "pump_bandwidth", "nodes",
      "truncation_eps", "tau_ps",     "tau_start_ps",  "tau_stop_ps",  "tau_step_ps",
      "orders",       "ratios",       "ratio_start",   "ratio_stop",   "ratio_step",
      "sweep_bch_ghz", "threshold",   "pairs",         "efficiency",   "seed",
      "noiseless",    "out",          "format"};
  return keys;
}

inline void apply_preset(RunConfig& c, const std::string& name) {
  c.preset = name;
  if (name == "fig2a-130" || name == "fig2b") {
    c.scenario = Scenario::curve;
    c.order_a = c.order_b = c.pump_order = 3;
    c.fwhm_a_ghz = c.fwhm_b_ghz = 130.0;
    c.pump_ghz = 120.0;
  } else if (name == "fig2a-70") {
    c.scenario = Scenario::curve;
    c.order_a = c.order_b = c.pump_order = 3;
    c.fwhm_a_ghz = c.fwhm_b_ghz = 70.0;
    c.pump_ghz = 75.0;
  } else if (name == "fig3") {
    c.scenario = Scenario::sweep;
    c.orders = {1, 2, 3, 4};
  }
}

}  // namespace detail

/// Parses `key = value` lines ('#' starts a comment). Unknown keys,
/// duplicates and malformed values raise ConfigError with the line number.
/// Settings apply on top of the optional preset, which applies on top of the
/// defaults (third-order filters, threshold 0.1, 513 quadrature nodes).
inline RunConfig parse_config(std::string_view text) {
  std::map<std::string, detail::Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("parse-error: line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (detail::known_keys().count(key) == 0)
      throw ConfigError("parse-error: line " + std::to_string(line_no) + ": unknown key '" + key +
                        "'");
    if (value.empty()) detail::Reader::fail(key, line_no, "missing value");
    if (!entries.emplace(key, detail::Entry{value, line_no}).second)
      detail::Reader::fail(key, line_no, "duplicate key");
  }

  const detail::Reader r(entries);
  RunConfig c;
  if (r.has("preset")) {
    const std::string& name = r.text("preset");
    if (std::find(preset_names().begin(), preset_names().end(), name) == preset_names().end())
      detail::Reader::fail("preset", r.line("preset"), "unknown preset '" + name + "'");
    detail::apply_preset(c, name);
  }
  if (r.has("scenario")) {
    const auto sc = scenario_from(r.text("scenario"));
    if (!sc) detail::Reader::fail("scenario", r.line("scenario"), "unknown scenario");
    c.scenario = *sc;
    c.scenario_given = true;
  }

  auto as_int = [&](const std::string& key) { return static_cast<int>(r.integer(key)); };
  if (r.has("order")) c.order_a = c.order_b = c.pump_order = as_int("order");
  if (r.has("order_a")) c.order_a = as_int("order_a");
  if (r.has("order_b")) c.order_b = as_int("order_b");
  if (r.has("pump_order")) c.pump_order = as_int("pump_order");
  if (r.has("bch_ghz")) c.fwhm_a_ghz = c.fwhm_b_ghz = r.real("bch_ghz");
  if (r.has("fwhm_a_ghz")) c.fwhm_a_ghz = r.real("fwhm_a_ghz");
  if (r.has("fwhm_b_ghz")) c.fwhm_b_ghz = r.real("fwhm_b_ghz");
  if (r.has("bp_ghz")) c.pump_ghz = r.real("bp_ghz");
  if (r.has("center_a_ghz")) c.center_a_ghz = r.real("center_a_ghz");
  if (r.has("center_b_ghz")) c.center_b_ghz = r.real("center_b_ghz");
  if (r.has("center_p_ghz")) c.center_pump_ghz = r.real("center_p_ghz");
  if (r.has("pump_bandwidth")) {
    const std::string& v = r.text("pump_bandwidth");
    if (v == "power")
      c.pump_convention = PumpBandwidth::power;
    else if (v == "field")
      c.pump_convention = PumpBandwidth::field;
    else
      detail::Reader::fail("pump_bandwidth", r.line("pump_bandwidth"), "expected power|field");
  }
  if (r.has("nodes")) c.quadrature.nodes_per_axis = as_int("nodes");
  if (r.has("truncation_eps")) c.quadrature.truncation_eps = r.real("truncation_eps");

  const bool tau_range = r.has("tau_start_ps") || r.has("tau_stop_ps") || r.has("tau_step_ps");
  if (r.has("tau_ps") && tau_range)
    detail::Reader::fail("tau_ps", r.line("tau_ps"), "give either tau_ps or a tau range, not both");
  if (r.has("tau_ps")) c.taus = r.reals("tau_ps");
  if (tau_range) {
    if (!(r.has("tau_stop_ps") && r.has("tau_step_ps")))
      throw ConfigError("parse-error: a tau range needs tau_stop_ps and tau_step_ps");
    const double start = r.has("tau_start_ps") ? r.real("tau_start_ps") : 0.0;
    const double stop = r.real("tau_stop_ps");
    const double step = r.real("tau_step_ps");
    if (!(step > 0.0) || stop < start)
      throw ConfigError("validation-error: tau range must have step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    c.taus.clear();
    for (std::size_t i = 0; i < n; ++i) c.taus.push_back(start + step * static_cast<double>(i));
  }

  if (r.has("orders")) {
    c.orders.clear();
    for (double v : r.reals("orders")) {
      if (v != std::floor(v)) detail::Reader::fail("orders", r.line("orders"), "orders are integers");
      c.orders.push_back(static_cast<int>(v));
    }
  } else if (r.has("order")) {
    c.orders = {as_int("order")};
  }
  const bool ratio_range = r.has("ratio_start") || r.has("ratio_stop") || r.has("ratio_step");
  if (r.has("ratios") && ratio_range)
    detail::Reader::fail("ratios", r.line("ratios"), "give either ratios or a ratio range");
  if (r.has("ratios")) c.ratios = r.reals("ratios");
  if (ratio_range) {
    if (!(r.has("ratio_start") && r.has("ratio_stop") && r.has("ratio_step")))
      throw ConfigError("parse-error: a ratio range needs ratio_start, ratio_stop and ratio_step");
    try {
      c.ratios = ratio_grid(r.real("ratio_start"), r.real("ratio_stop"), r.real("ratio_step"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("validation-error: ") + e.what());
    }
  }
  if (r.has("sweep_bch_ghz")) c.sweep_channel_ghz = r.real("sweep_bch_ghz");
  if (r.has("threshold")) c.threshold = r.real("threshold");

  if (r.has("pairs")) c.pairs = r.real("pairs");
  if (r.has("efficiency")) c.efficiency = r.real("efficiency");
  if (r.has("seed")) c.seed = r.unsigned_integer("seed");
  if (r.has("noiseless")) {
    const std::string& v = r.text("noiseless");
    if (v != "true" && v != "false")
      detail::Reader::fail("noiseless", r.line("noiseless"), "expected true|false");
    c.noiseless = v == "true";
  }
  if (r.has("out")) c.out = r.text("out");
  if (r.has("format")) {
    const std::string& v = r.text("format");
    if (v == "csv")
      c.format = Format::csv;
    else if (v == "json")
      c.format = Format::json;
    else
      detail::Reader::fail("format", r.line("format"), "expected csv|json");
  }

  c.validate();
  return c;
}

}  // namespace pmdent::cli
