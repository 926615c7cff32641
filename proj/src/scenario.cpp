#include "biphoton/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "biphoton/density_model.hpp"
#include "biphoton/montecarlo.hpp"
#include "biphoton/quadrature.hpp"
#include "biphoton/timetags.hpp"
#include "format.hpp"

namespace biphoton {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Walks a JSON document while tracking the key path for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

  const Node& require_object(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, _] : value_.items()) {
      if (!known.count(key)) throw ConfigError(child_path(key), "unknown key");
    }
    return *this;
  }

  bool has(const std::string& key) const { return value_.contains(key); }

  Node at(const std::string& key) const {
    if (!value_.contains(key)) throw ConfigError(child_path(key), "missing required key");
    return Node(value_.at(key), child_path(key));
  }

  Node at(std::size_t index) const {
    return Node(value_.at(index), path_ + "[" + std::to_string(index) + "]");
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<std::int64_t>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return value_.get<std::uint64_t>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::size_t array_size() const {
    if (!value_.is_array()) fail("expected an array");
    if (value_.empty()) fail("expected a non-empty array");
    return value_.size();
  }

  /// Single-key object acting as a tagged union; returns the tag.
  std::string variant_tag(std::initializer_list<const char*> tags) const {
    if (!value_.is_object() || value_.size() != 1) {
      fail("expected an object with exactly one of its variant keys");
    }
    const std::string tag = value_.begin().key();
    for (const char* t : tags)
      if (tag == t) return tag;
    throw ConfigError(child_path(tag), "unknown key");
  }

 private:
  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& value_;
  std::string path_;
};

SourceModel parse_source(const Node& node) {
  node.require_object({"splitting_S", "exciton_lifetime_tau_X", "jitter_fwhm", "coherence"});
  SourceModel m;
  m.splitting_S = node.at("splitting_S").number();
  const Node tau_x = node.at("exciton_lifetime_tau_X");
  m.exciton_lifetime_tau_X = tau_x.number();
  if (!(m.exciton_lifetime_tau_X > 0.0)) tau_x.fail("must be > 0");
  const Node jitter = node.at("jitter_fwhm");
  m.jitter_fwhm = jitter.number();
  if (!(m.jitter_fwhm >= 0.0)) jitter.fail("must be >= 0");

  const Node coh = node.at("coherence");
  const std::string tag = coh.variant_tag({"constant", "decaying"});
  const Node body = coh.at(tag);
  if (tag == "constant") {
    body.require_object({"v"});
    const Node v = body.at("v");
    ConstantCoherence c{v.number()};
    if (!(c.v >= 0.0 && c.v <= 1.0)) v.fail("must lie in [0, 1]");
    m.coherence = c;
  } else {
    body.require_object(
        {"background_ratio_beta", "background_lifetime_tau_B", "spin_scattering_tau_ss"});
    DecayingCoherence d;
    const Node beta = body.at("background_ratio_beta");
    d.background_ratio_beta = beta.number();
    if (!(d.background_ratio_beta >= 0.0)) beta.fail("must be >= 0");
    const Node tau_b = body.at("background_lifetime_tau_B");
    d.background_lifetime_tau_B = tau_b.number();
    if (!(d.background_lifetime_tau_B > 0.0)) tau_b.fail("must be > 0");
    const Node tau_ss = body.at("spin_scattering_tau_ss");
    d.spin_scattering_tau_ss = tau_ss.number();
    if (!(d.spin_scattering_tau_ss > 0.0)) tau_ss.fail("must be > 0");
    m.coherence = d;
  }
  m.validate();
  return m;
}

std::vector<double> parse_positive_list(const Node& node) {
  std::vector<double> out;
  for (std::size_t i = 0, n = node.array_size(); i < n; ++i) {
    const Node item = node.at(i);
    const double v = item.number();
    if (!(v > 0.0)) item.fail("must be > 0");
    out.push_back(v);
  }
  return out;
}

ScanSpec parse_scan(const Node& node) {
  const std::string tag =
      node.variant_tag({"gate_width_scan", "gate_delay_scan", "spectrum"});
  const Node body = node.at(tag);
  if (tag == "gate_width_scan") {
    body.require_object({"tau_g", "w"});
    return GateWidthScan{body.at("tau_g").number(), parse_positive_list(body.at("w"))};
  }
  if (tag == "gate_delay_scan") {
    body.require_object({"tau_g", "w"});
    GateDelayScan s;
    const Node delays = body.at("tau_g");
    for (std::size_t i = 0, n = delays.array_size(); i < n; ++i) {
      s.delays.push_back(delays.at(i).number());
    }
    const Node w = body.at("w");
    s.w = w.number();
    if (!(s.w > 0.0)) w.fail("must be > 0");
    return s;
  }
  body.require_object({"t_cut", "grid"});
  SpectrumScan s;
  const Node cuts = body.at("t_cut");
  for (std::size_t i = 0, n = cuts.array_size(); i < n; ++i) {
    const Node item = cuts.at(i);
    if (item.raw().is_string()) {
      if (item.string() != "inf") item.fail("expected a number or \"inf\"");
      s.t_cuts.push_back(kInf);
    } else {
      const double t = item.number();
      if (!(t > 0.0)) item.fail("must be > 0");
      s.t_cuts.push_back(t);
    }
  }
  if (body.has("grid")) {
    const Node g = body.at("grid");
    g.require_object({"e_min", "e_max", "n_points"});
    EnergyGrid grid{g.at("e_min").number(), g.at("e_max").number(),
                    static_cast<std::size_t>(g.at("n_points").unsigned_integer())};
    try {
      grid.validate();
    } catch (const InvalidArgument& e) {
      g.fail(e.what());
    }
    s.grid = grid;
  }
  return s;
}

Engine parse_engine(const Node& node) {
  if (node.raw().is_string()) {
    if (node.string() != "analytic") node.fail("expected \"analytic\" or a montecarlo object");
    return AnalyticEngine{};
  }
  node.variant_tag({"montecarlo"});
  const Node body = node.at("montecarlo");
  body.require_object({"n_pairs", "seed"});
  MonteCarloEngine mc;
  const Node pairs = body.at("n_pairs");
  mc.n_pairs = pairs.unsigned_integer();
  if (mc.n_pairs == 0) pairs.fail("must be > 0");
  mc.seed = body.at("seed").unsigned_integer();
  return mc;
}

json t_cut_json(double t) { return std::isinf(t) ? json("inf") : json(t); }

std::string command_name(Command c) {
  switch (c) {
    case Command::scan_width: return "scan-width";
    case Command::scan_delay: return "scan-delay";
    case Command::spectrum: return "spectrum";
    case Command::simulate: return "simulate";
  }
  return "unknown";
}

// Tracks files written during a run and deletes them unless committed.
class OutputSet {
 public:
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : paths_) std::filesystem::remove(p, ec);
  }

  std::ofstream open(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    paths_.push_back(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open output file " + path);
    return out;
  }

  std::vector<std::string> commit() {
    committed_ = true;
    return paths_;
  }
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::vector<std::string> paths_;
  bool committed_ = false;
};

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw DataError("failed writing " + path);
}

const MonteCarloEngine* monte_carlo(const ScenarioConfig& config) {
  return std::get_if<MonteCarloEngine>(&config.engine);
}

std::vector<GateWindow> width_gates(const GateWidthScan& s) {
  std::vector<GateWindow> gates;
  for (double w : s.widths) gates.emplace_back(s.tau_g, w);
  return gates;
}

std::vector<GateWindow> delay_gates(const GateDelayScan& s) {
  std::vector<GateWindow> gates;
  for (double t : s.delays) gates.emplace_back(t, s.w);
  return gates;
}

struct Row {
  double x, fidelity, sigma, retained;
};

std::vector<Row> fidelity_rows(const ScenarioConfig& config, std::span<const GateWindow> gates,
                               unsigned threads) {
  std::vector<Row> rows;
  if (const auto* mc = monte_carlo(config)) {
    SimulationOptions opts;
    opts.threads = threads;
    for (const ScanPoint& p : scan(config.source, gates, mc->n_pairs, mc->seed, opts)) {
      rows.push_back({0.0, p.fidelity.value, p.fidelity.sigma, p.retained_fraction});
    }
  } else {
    for (const FidelityPoint& p :
         fidelity_curve(gates, config.source, BellTarget::psi_plus())) {
      rows.push_back({0.0, p.fidelity, 0.0, p.retained_fraction});
    }
  }
  return rows;
}

template <class T>
const T& require_scan(const ScenarioConfig& config, Command command, const char* expected) {
  if (!config.scan || !std::holds_alternative<T>(*config.scan)) {
    throw ConfigError("scan", command_name(command) + " needs a " + expected + " scan");
  }
  return std::get<T>(*config.scan);
}

std::string t_cut_label(double t_cut) {
  if (std::isinf(t_cut)) return "inf";
  std::ostringstream os;
  os << t_cut;
  return os.str();
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
  const Node root(doc, "");
  root.require_object({"source", "scan", "engine", "output"});
  ScenarioConfig config;
  config.source = parse_source(root.at("source"));
  if (root.has("scan")) config.scan = parse_scan(root.at("scan"));
  if (root.has("engine")) config.engine = parse_engine(root.at("engine"));
  const Node out = root.at("output");
  config.output = out.string();
  if (config.output.empty()) out.fail("must be a non-empty path prefix");
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ScenarioConfig& config) {
  json doc;
  const SourceModel& m = config.source;
  json source = {{"splitting_S", m.splitting_S},
                 {"exciton_lifetime_tau_X", m.exciton_lifetime_tau_X},
                 {"jitter_fwhm", m.jitter_fwhm}};
  if (const auto* c = std::get_if<ConstantCoherence>(&m.coherence)) {
    source["coherence"] = {{"constant", {{"v", c->v}}}};
  } else {
    const auto& d = std::get<DecayingCoherence>(m.coherence);
    source["coherence"] = {{"decaying",
                            {{"background_ratio_beta", d.background_ratio_beta},
                             {"background_lifetime_tau_B", d.background_lifetime_tau_B},
                             {"spin_scattering_tau_ss", d.spin_scattering_tau_ss}}}};
  }
  doc["source"] = source;

  if (config.scan) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, GateWidthScan>) {
            doc["scan"] = {{"gate_width_scan", {{"tau_g", s.tau_g}, {"w", s.widths}}}};
          } else if constexpr (std::is_same_v<T, GateDelayScan>) {
            doc["scan"] = {{"gate_delay_scan", {{"tau_g", s.delays}, {"w", s.w}}}};
          } else {
            json cuts = json::array();
            for (double t : s.t_cuts) cuts.push_back(t_cut_json(t));
            json body = {{"t_cut", cuts}};
            if (s.grid) {
              body["grid"] = {{"e_min", s.grid->e_min},
                              {"e_max", s.grid->e_max},
                              {"n_points", s.grid->n_points}};
            }
            doc["scan"] = {{"spectrum", body}};
          }
        },
        *config.scan);
  }

  if (const auto* mc = monte_carlo(config)) {
    doc["engine"] = {{"montecarlo", {{"n_pairs", mc->n_pairs}, {"seed", mc->seed}}}};
  } else {
    doc["engine"] = "analytic";
  }
  doc["output"] = config.output;
  return doc;
}

ScenarioConfig apply_overrides(ScenarioConfig config, const Overrides& overrides) {
  if (overrides.engine) {
    if (*overrides.engine == "analytic") {
      config.engine = AnalyticEngine{};
    } else if (*overrides.engine == "mc") {
      if (!monte_carlo(config)) {
        if (!overrides.pairs || !overrides.seed) {
          throw ConfigError("--engine", "mc needs engine.montecarlo in the config or both "
                                        "--pairs and --seed");
        }
        config.engine = MonteCarloEngine{};
      }
    } else {
      throw ConfigError("--engine", "expected analytic or mc");
    }
  }
  if (overrides.pairs || overrides.seed) {
    auto* mc = std::get_if<MonteCarloEngine>(&config.engine);
    if (!mc) throw ConfigError("--pairs/--seed", "only valid with the mc engine");
    if (overrides.pairs) mc->n_pairs = *overrides.pairs;
    if (overrides.seed) mc->seed = *overrides.seed;
    if (mc->n_pairs == 0) throw ConfigError("--pairs", "must be > 0");
  }
  if (overrides.out) {
    if (overrides.out->empty()) throw ConfigError("--out", "must be a non-empty path prefix");
    config.output = *overrides.out;
  }
  return config;
}

std::string width_scan_path(const std::string& prefix) { return prefix + "_width.csv"; }
std::string delay_scan_path(const std::string& prefix) { return prefix + "_delay.csv"; }
std::string spectrum_path(const std::string& prefix, double t_cut) {
  return prefix + "_spectrum_" + t_cut_label(t_cut) + ".csv";
}
std::string timetags_path(const std::string& prefix) { return prefix + "_timetags.csv"; }
std::string manifest_path(const std::string& prefix) { return prefix + "_manifest.json"; }

std::vector<std::string> run_scenario(const ScenarioConfig& config, Command command,
                                      unsigned threads) {
  OutputSet outputs;
  const std::string& prefix = config.output;

  switch (command) {
    case Command::scan_width: {
      const auto& s = require_scan<GateWidthScan>(config, command, "gate_width_scan");
      const auto gates = width_gates(s);
      const auto rows = fidelity_rows(config, gates, threads);
      const std::string path = width_scan_path(prefix);
      auto out = outputs.open(path);
      out << "w_ps,fidelity,sigma,retained_fraction\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out << format_sig6(s.widths[i]) << ',' << format_sig6(rows[i].fidelity) << ','
            << format_sig6(rows[i].sigma) << ',' << format_sig6(rows[i].retained) << '\n';
      }
      finish(out, path);
      break;
    }
    case Command::scan_delay: {
      const auto& s = require_scan<GateDelayScan>(config, command, "gate_delay_scan");
      const auto gates = delay_gates(s);
      const auto rows = fidelity_rows(config, gates, threads);
      const std::string path = delay_scan_path(prefix);
      auto out = outputs.open(path);
      out << "tau_g_ps,fidelity,sigma\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out << format_sig6(s.delays[i]) << ',' << format_sig6(rows[i].fidelity) << ','
            << format_sig6(rows[i].sigma) << '\n';
      }
      finish(out, path);
      break;
    }
    case Command::spectrum: {
      const auto& s = require_scan<SpectrumScan>(config, command, "spectrum");
      const EnergyGrid grid =
          s.grid.value_or(EnergyGrid::natural(config.source.exciton_lifetime_tau_X));
      for (double t_cut : s.t_cuts) {
        const Spectrum spec =
            truncated_decay_spectrum(config.source.exciton_lifetime_tau_X, t_cut, grid)
                .peak_normalized();
        const std::string path = spectrum_path(prefix, t_cut);
        auto out = outputs.open(path);
        out << "energy_uev,power_normalized\n";
        for (std::size_t i = 0; i < spec.energies.size(); ++i) {
          out << format_sig6(spec.energies[i]) << ',' << format_sig6(spec.power[i]) << '\n';
        }
        finish(out, path);
      }
      break;
    }
    case Command::simulate: {
      const auto* mc = monte_carlo(config);
      if (!mc) throw ConfigError("engine", "simulate needs the montecarlo engine");
      SimulationOptions opts;
      opts.threads = threads;
      const auto events = simulate_pairs(config.source, mc->n_pairs, mc->seed, opts);
      const std::string path = timetags_path(prefix);
      auto out = outputs.open(path);
      write_timetags(out, to_records(events));
      finish(out, path);
      break;
    }
  }

  const std::string path = manifest_path(prefix);
  json manifest = {{"command", command_name(command)},
                   {"config", to_json(config)},
                   {"outputs", outputs.paths()}};
  auto out = outputs.open(path);
  out << manifest.dump(2) << '\n';
  finish(out, path);
  return outputs.commit();
}

int execute(Command command, const std::string& config_path, const Overrides& overrides,
            unsigned threads, std::ostream& out, std::ostream& err) {
  ScenarioConfig config;
  try {
    config = apply_overrides(load_config(config_path), overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    for (const auto& path : run_scenario(config, command, threads)) out << path << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int execute_analyze(const std::string& input, double tau_g, double width,
                    const std::optional<std::string>& out_prefix, std::ostream& out,
                    std::ostream& err) {
  std::optional<GateWindow> gate;
  try {
    gate = std::isinf(tau_g) && tau_g < 0 ? GateWindow::unbounded() : GateWindow(tau_g, width);
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  OutputSet outputs;
  try {
    const AnalysisReport report = analyze_timetags(input, *gate);
    write_report(out, report);
    if (out_prefix) {
      const std::string path = *out_prefix + "_analysis.csv";
      auto file = outputs.open(path);
      write_report(file, report);
      finish(file, path);
    }
    outputs.commit();
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace biphoton
