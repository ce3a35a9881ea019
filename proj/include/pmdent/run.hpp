#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pmdent/analysis.hpp"
#include "pmdent/config.hpp"
#include "pmdent/pmdcore.hpp"
#include "pmdent/qinfo.hpp"
#include "pmdent/tomosim.hpp"

namespace pmdent::cli {

inline constexpr const char* kToolName = "simulate";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kIoError = 1, kConfigError = 2, kNumericalError = 3 };

/// FNV-1a 64-bit.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(c.canonical())));
  return buf;
}

/// Fixed six decimals; negative zero prints as zero.
inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

inline std::string csv_comment(const RunConfig& c) {
  std::ostringstream os;
  os << "# " << kToolName << ' ' << kToolVersion << " config_hash=" << config_hash(c)
     << " seed=" << c.seed << " scenario=" << to_string(c.scenario);
  if (!c.preset.empty()) os << " preset=" << c.preset;
  os << '\n';
  return os.str();
}

using Json = nlohmann::ordered_json;

inline Json to_json(const TwoQubitState& s) {
  Json rows = Json::array();
  for (int i = 0; i < 4; ++i) {
    Json row = Json::array();
    for (int j = 0; j < 4; ++j) row.push_back({s(i, j).real(), s(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline Json basis_json() {
  Json b = Json::array();
  for (auto label : kBasisLabels) b.push_back(std::string(label));
  return b;
}

inline Json header_json(const RunConfig& c) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"config_hash", config_hash(c)},
          {"seed", c.seed},
          {"scenario", std::string(to_string(c.scenario))},
          {"preset", c.preset}};
}

/// Serializes a count record as `setting,analyzer_a,analyzer_b,counts`.
inline std::string counts_csv(const TomographyPlan& plan, const std::vector<double>& counts,
                              bool integral) {
  std::ostringstream os;
  os << "setting,analyzer_a,analyzer_b,counts\n";
  for (std::size_t s = 0; s < plan.settings.size(); ++s) {
    const auto& set = plan.settings[s];
    os << s << ',' << (set.label_a.empty() ? "custom" : set.label_a) << ','
       << (set.label_b.empty() ? "custom" : set.label_b) << ',';
    if (integral)
      os << static_cast<std::uint64_t>(counts[s]);
    else
      os << fixed6(counts[s]);
    os << '\n';
  }
  return os.str();
}

inline std::string counts_csv(const CountRecord& record) {
  return counts_csv(record.plan,
                    std::vector<double>(record.counts.begin(), record.counts.end()), true);
}

/// Reads the body written by counts_csv (comment lines are skipped) back
/// into a record for `plan`.
inline CountRecord read_counts_csv(std::string_view text, const TomographyPlan& plan) {
  std::istringstream in{std::string(text)};
  std::string line;
  CountRecord record{{}, plan};
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "setting,analyzer_a,analyzer_b,counts")
        throw ConfigError("count record: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw ConfigError("count record: malformed row '" + line + "'");
    try {
      record.counts.push_back(std::stoull(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw ConfigError("count record: bad count in '" + line + "'");
    }
  }
  if (record.counts.size() != plan.settings.size())
    throw ConfigError("count record: expected " + std::to_string(plan.settings.size()) +
                      " rows, got " + std::to_string(record.counts.size()));
  return record;
}

namespace detail {

inline std::string render_curve(const RunConfig& c, Format f) {
  std::vector<std::pair<std::string, LinkConfig>> links;
  if (c.preset == "fig2b") {
    for (const auto& p : fig2_presets()) links.emplace_back(p.name, p.link);
  } else {
    links.emplace_back(c.preset, c.link());
  }
  const std::vector<double> taus = c.effective_taus();
  const bool tagged = links.size() > 1;

  if (f == Format::csv) {
    std::ostringstream os;
    os << csv_comment(c) << (tagged ? "preset,tau_ps,concurrence,s_max\n" : "tau_ps,concurrence,s_max\n");
    for (const auto& [name, link] : links)
      for (const auto& p : concurrence_curve(link, taus)) {
        if (tagged) os << name << ',';
        os << fixed6(p.tau) << ',' << fixed6(p.concurrence) << ',' << fixed6(p.s_max) << '\n';
      }
    return os.str();
  }
  Json j = header_json(c);
  Json curves = Json::array();
  for (const auto& [name, link] : links) {
    Json points = Json::array();
    for (const auto& p : concurrence_curve(link, taus))
      points.push_back({{"tau_ps", p.tau}, {"concurrence", p.concurrence}, {"s_max", p.s_max}});
    curves.push_back({{"name", name}, {"points", points}});
  }
  j["curves"] = curves;
  return j.dump(2) + "\n";
}

inline std::string render_sweep(const RunConfig& c, Format f, bool mixed) {
  const SweepOptions options = c.sweep_options();
  struct Series {
    int order;
    std::vector<SweepPoint> points;
    SweepOptimum optimum;
  };
  std::vector<Series> series;
  for (int n : c.orders) {
    const int pump_order = mixed ? 1 : n;
    auto points = bandwidth_sweep(n, pump_order, c.ratios, options);
    const SweepOptimum opt = locate_optimum(n, pump_order, points, options);
    series.push_back({n, std::move(points), opt});
  }
  const bool tagged = series.size() > 1;

  if (f == Format::csv) {
    std::ostringstream os;
    os << csv_comment(c) << (tagged ? "order,ratio,tau_dec_times_bch\n" : "ratio,tau_dec_times_bch\n");
    for (const auto& s : series)
      for (const auto& p : s.points) {
        if (tagged) os << s.order << ',';
        os << fixed6(p.ratio) << ',' << fixed6(p.tau_dec_normalized) << '\n';
      }
    return os.str();
  }
  Json j = header_json(c);
  j["threshold"] = c.threshold;
  Json arr = Json::array();
  for (const auto& s : series) {
    Json points = Json::array();
    for (const auto& p : s.points)
      points.push_back({{"ratio", p.ratio}, {"tau_dec_times_bch", p.tau_dec_normalized}});
    arr.push_back({{"channel_order", s.order},
                   {"pump_order", mixed ? 1 : s.order},
                   {"points", points},
                   {"optimum",
                    {{"interior", s.optimum.interior},
                     {"ratio", s.optimum.ratio},
                     {"tau_dec_times_bch", s.optimum.tau_dec_normalized}}}});
  }
  j["series"] = arr;
  return j.dump(2) + "\n";
}

inline std::string render_rho(const RunConfig& c, Format f) {
  const double tau = c.effective_taus().front();
  const Complex r = compute_R(c.link(), Dgd{tau});
  const TwoQubitState rho = build_density_matrix(r);
  if (f == Format::csv) {
    std::ostringstream os;
    os << csv_comment(c) << "row,col,re,im\n";
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k)
        os << kBasisLabels[i] << ',' << kBasisLabels[k] << ',' << fixed6(rho(i, k).real()) << ','
           << fixed6(rho(i, k).imag()) << '\n';
    return os.str();
  }
  const MetricReport m = metrics(rho);
  Json j = header_json(c);
  j["tau_ps"] = tau;
  j["coherence"] = {r.real(), r.imag()};
  j["basis"] = basis_json();
  j["rho"] = to_json(rho);
  j["concurrence"] = m.concurrence;
  j["s_max"] = m.s_max;
  j["purity"] = m.purity;
  return j.dump(2) + "\n";
}

inline std::string render_tomo(const RunConfig& c, Format f) {
  const double tau = c.effective_taus().front();
  const TomographyPlan plan = c.plan();
  const ExperimentResult e =
      run_experiment(c.link(), Dgd{tau}, plan, c.noiseless ? CountModel::expected : CountModel::poisson);
  if (f == Format::csv) return csv_comment(c) + counts_csv(plan, e.counts, !c.noiseless);

  Json j = header_json(c);
  j["tau_ps"] = tau;
  j["pairs_per_setting"] = plan.pairs_per_setting;
  j["efficiency"] = plan.efficiency;
  j["noiseless"] = c.noiseless;
  Json counts = Json::array();
  for (std::size_t s = 0; s < plan.settings.size(); ++s)
    counts.push_back({{"setting", s},
                      {"analyzer_a", plan.settings[s].label_a},
                      {"analyzer_b", plan.settings[s].label_b},
                      {"counts", e.counts[s]}});
  j["counts"] = counts;
  j["basis"] = basis_json();
  j["theory"] = to_json(e.theory);
  j["reconstructed"] = to_json(e.measured);
  j["concurrence"] = e.metrics.concurrence;
  j["s_max"] = e.metrics.s_max;
  j["purity"] = e.metrics.purity;
  j["fidelity_to_theory"] = e.fidelity_to_theory;
  return j.dump(2) + "\n";
}

}  // namespace detail

/// Produces the artifact text for a validated configuration.
inline std::string render(const RunConfig& c) {
  const Format f = c.effective_format();
  switch (c.scenario) {
    case Scenario::curve: return detail::render_curve(c, f);
    case Scenario::sweep: return detail::render_sweep(c, f, false);
    case Scenario::mixed_sweep: return detail::render_sweep(c, f, true);
    case Scenario::rho: return detail::render_rho(c, f);
    case Scenario::tomo: return detail::render_tomo(c, f);
  }
  throw ConfigError("unknown scenario");
}

/// Writes via a sibling temporary file and rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os << text;
    if (!os.flush()) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

/// Runs one configuration. The artifact goes to c.out, or to `out` when no
/// path is set. Returns the process exit status; failures print a single
/// diagnostic line to `err`.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    c.validate();
    const std::string text = render(c);
    if (c.out.empty())
      out << text;
    else
      write_atomic(c.out, text);
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "error: validation-error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: numerical: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace pmdent::cli
