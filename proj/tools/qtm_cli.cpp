// Command-line front end: reproduces the figure-level results as
// machine-readable tables and runs the validation suites.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
// failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtm/exact_diag.hpp"
#include "qtm/free_fermion.hpp"
#include "qtm/qubit_pair.hpp"
#include "qtm/qtm_network.hpp"
#include "qtm/table_io.hpp"
#include "qtm/tmrg.hpp"
#include "qtm/validation.hpp"
#include "qtm/version.hpp"

namespace {

using qtm::SpinChainModel;

struct CommonOpts {
  std::string model = "ising";
  double lambda = 1.0;
  double delta = 1.0;
  double j = 1.0;
  double temp = 1.0;
  std::vector<double> temps;
  double dbeta = 0.025;
  int m_kept = 64;
  std::string method = "tmrg";
  std::string out;
  std::string format = "csv";
  std::string config_file;
};

// flag values override config-file values; defaults fill the rest
void apply_config_file(CLI::App* cmd, CommonOpts& o) {
  if (o.config_file.empty()) return;
  std::ifstream is(o.config_file);
  if (!is) throw CLI::ValidationError("--config", "cannot open " + o.config_file);
  nlohmann::json j;
  is >> j;
  const auto maybe = [&](const char* flag, auto& target) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    const std::string key = flag + 2;  // strip "--"
    if (j.contains(key) && (opt == nullptr || opt->count() == 0)) j.at(key).get_to(target);
  };
  maybe("--model", o.model);
  maybe("--lambda", o.lambda);
  maybe("--delta", o.delta);
  maybe("--j", o.j);
  maybe("--temp", o.temp);
  maybe("--temps", o.temps);
  maybe("--dbeta", o.dbeta);
  maybe("--m-kept", o.m_kept);
  maybe("--method", o.method);
  maybe("--out", o.out);
  maybe("--format", o.format);
}

SpinChainModel make_model(const CommonOpts& o) {
  if (o.model == "ising") return SpinChainModel::transverse_ising(o.lambda, o.j);
  if (o.model == "xxz") return SpinChainModel::xxz(o.delta, o.j);
  if (o.model == "heisenberg-pair") return SpinChainModel::heisenberg_pair();
  throw CLI::ValidationError("--model", "unknown model " + o.model);
}

void add_common_model_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--model", o.model, "Model: ising | xxz | heisenberg-pair");
  cmd->add_option("--lambda", o.lambda, "Transverse field (ising)");
  cmd->add_option("--delta", o.delta, "Exchange anisotropy (xxz)");
  cmd->add_option("--j", o.j, "Overall coupling J");
}

void add_output_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--out", o.out, "Output path (stdout if omitted)");
  cmd->add_option("--format", o.format, "Output format: csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--config", o.config_file, "JSON config file; flags override its values");
}

void emit(const CommonOpts& o, const qtm::TableMeta& meta, const qtm::Table& table) {
  if (o.out.empty()) {
    std::cout << (o.format == "json" ? qtm::render_json(meta, table)
                                     : qtm::render_csv(meta, table));
    return;
  }
  if (o.format == "json")
    qtm::write_json(o.out, meta, table);
  else
    qtm::write_csv(o.out, meta, table);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// ---- qubit-demo -----------------------------------------------------------

int cmd_qubit_demo(const CommonOpts& o) {
  if (o.temps.empty()) {
    std::cerr << "qubit-demo: empty temperature grid\n";
    return 2;
  }
  for (double t : o.temps)
    if (!(t > 0)) {
      std::cerr << "qubit-demo: temperatures must be positive\n";
      return 2;
    }
  qtm::Table table;
  const bool asym = std::any_of(o.temps.begin(), o.temps.end(), [](double t) { return t > 10; });
  table.columns = {"T", "s_pure", "s_canonical", "mutual_info", "s_bar"};
  if (asym) {
    table.columns.push_back("mutual_info_asymptote_ratio");  // vs 3/(32 T^2)
    table.columns.push_back("s_bar_asymptote_ratio");        // vs 3(1+6ln2+2lnT)/(64T^2)
  }
  for (double t : o.temps) {
    const qtm::QubitMeasures m = qtm::qubit_measures(t);
    std::vector<double> row{t, m.s_pure, m.s_canonical, m.mutual_info, m.s_bar};
    if (asym) {
      row.push_back(m.mutual_info / (3.0 / (32.0 * t * t)));
      row.push_back(m.s_bar / (3.0 * (1.0 + 6.0 * std::log(2.0) + 2.0 * std::log(t)) /
                               (64.0 * t * t)));
    }
    table.rows.push_back(std::move(row));
  }
  qtm::TableMeta meta;
  meta.tool = "qtm qubit-demo";
  meta.config = {{"temps", [&] {
                    std::ostringstream os;
                    for (size_t i = 0; i < o.temps.size(); ++i)
                      os << (i ? "," : "") << fmt(o.temps[i]);
                    return os.str();
                  }()}};
  emit(o, meta, table);
  return 0;
}

// ---- spectrum ---------------------------------------------------------------

struct LevelCluster {
  double position = 0.0;  // mean -ln(weight/weight0)
  long multiplicity = 0;
  std::vector<int> sz_labels;
};

std::vector<LevelCluster> cluster_levels(const qtm::EntanglementSpectrum& spec, double gap) {
  std::vector<LevelCluster> levels;
  const double w0 = spec.weights.empty() ? 1.0 : spec.weights.front();
  for (size_t i = 0; i < spec.weights.size(); ++i) {
    if (spec.weights[i] <= 0.0) break;
    const double x = -std::log(spec.weights[i] / w0);
    if (levels.empty() || x - levels.back().position > gap) {
      levels.push_back({x, 1, {}});
    } else {
      // running mean keeps clusters centered
      LevelCluster& c = levels.back();
      c.position = (c.position * c.multiplicity + x) / (c.multiplicity + 1);
      c.multiplicity += 1;
    }
    if (!spec.labels.empty()) levels.back().sz_labels.push_back(spec.labels[i]);
  }
  return levels;
}

int cmd_spectrum(const CommonOpts& o) {
  const SpinChainModel model = make_model(o);
  qtm::EntanglementSpectrum spec;
  if (o.method == "dense") {
    const qtm::TrotterGrid grid = qtm::TrotterGrid::for_temperature(o.dbeta, o.temp);
    const qtm::QTMOperator qtmop = qtm::build_qtm(model, grid);
    const qtm::LeadingState st = qtm::leading_state(qtmop);
    const qtm::DenseOperator rho =
        qtm::rho_bar_reduced(st, qtm::AuxCut{0, qtmop.aux_sites() / 2});
    std::vector<int> charges;
    if (model.conserves_sz())
      charges = qtm::cut_alternating_charges(qtmop.aux_sites(),
                                             qtm::AuxCut{0, qtmop.aux_sites() / 2});
    spec = qtm::entanglement_spectrum(rho, model.conserves_sz() ? &charges : nullptr);
  } else if (o.method == "tmrg") {
    qtm::TMRGConfig cfg;
    cfg.kept_states = o.m_kept;
    cfg.delta_beta = o.dbeta;
    cfg.target_temperatures = {o.temp};
    const auto pts = qtm::tmrg_sweep(model, cfg);
    spec = pts.back().spectrum;
  } else {
    std::cerr << "spectrum: unknown method " << o.method << "\n";
    return 2;
  }

  // free-fermion comparison when the phase has one
  std::optional<qtm::FreeFermionSpectrum> ff;
  try {
    ff = qtm::single_particle_levels(model, 24);
  } catch (const std::invalid_argument&) {
    ff.reset();
  }
  const double unit = ff ? ff->spacing_unit : 1.0;
  const auto levels = cluster_levels(spec, 0.25 * unit);

  qtm::Table table;
  table.columns = {"index", "weight", "minus_ln_weight", "multiplicity"};
  const bool labeled = !spec.labels.empty();
  if (labeled) table.columns.push_back("sz_label");
  size_t li = 0, consumed = 0;
  for (size_t i = 0; i < spec.weights.size(); ++i) {
    if (spec.weights[i] <= 0.0) break;
    if (li < levels.size() && consumed == static_cast<size_t>(levels[li].multiplicity)) {
      ++li;
      consumed = 0;
    }
    ++consumed;
    std::vector<double> row{static_cast<double>(i), spec.weights[i], -std::log(spec.weights[i]),
                            li < levels.size() ? static_cast<double>(levels[li].multiplicity)
                                               : 0.0};
    if (labeled) row.push_back(static_cast<double>(spec.labels[i]));
    table.rows.push_back(std::move(row));
  }

  qtm::TableMeta meta;
  meta.tool = "qtm spectrum";
  meta.config = {{"model", model.name()},
                 {"temp", fmt(o.temp)},
                 {"method", o.method},
                 {"dbeta", fmt(o.dbeta)},
                 {"m-kept", fmt(o.m_kept)},
                 {"entropy", fmt(spec.entropy)}};
  if (ff) {
    meta.config.emplace_back("ff_spacing_unit", fmt(unit));
    // per-level comparison block: measured spacing over predicted, and the
    // multiplicity match against the occupation enumerator
    const auto mb = qtm::many_body_spectrum(*ff, 12.5 * unit);
    for (size_t l = 1; l < levels.size() && l < 9; ++l) {
      const double measured = levels[l].position - levels[l - 1].position;
      const double predicted = (l < mb.size()) ? (mb[l].first - mb[l - 1].first) : 0.0;
      std::ostringstream key, val;
      key << "level" << l;
      val << "spacing_ratio=" << fmt(predicted > 0 ? measured / predicted : 0.0)
          << " multiplicity=" << levels[l].multiplicity << " predicted="
          << (l < mb.size() ? mb[l].second : 0)
          << (l < mb.size() && levels[l].multiplicity == mb[l].second ? " match" : " MISMATCH");
      meta.config.emplace_back(key.str(), val.str());
    }
  }
  emit(o, meta, table);
  return 0;
}

// ---- sweep ------------------------------------------------------------------

int cmd_sweep(const CommonOpts& o) {
  if (o.temps.empty()) {
    std::cerr << "sweep: no target temperatures\n";
    return 2;
  }
  const SpinChainModel model = make_model(o);
  qtm::TMRGConfig cfg;
  cfg.kept_states = o.m_kept;
  cfg.delta_beta = o.dbeta;
  cfg.target_temperatures = o.temps;
  const auto pts = qtm::tmrg_sweep(model, cfg);

  qtm::Table table;
  table.columns = {"T", "s_bar", "free_energy", "discarded_weight"};
  for (const auto& p : pts)
    table.rows.push_back({p.temperature, p.s_bar, p.free_energy, p.discarded_weight});

  qtm::TableMeta meta;
  meta.tool = "qtm sweep";
  meta.config = {{"model", model.name()},
                 {"dbeta", fmt(o.dbeta)},
                 {"m-kept", fmt(o.m_kept)}};
  emit(o, meta, table);
  return 0;
}

// ---- fit --------------------------------------------------------------------

int cmd_fit(const CommonOpts& o, const std::string& input, std::optional<double> velocity) {
  std::ifstream is(input);
  if (!is) {
    std::cerr << "fit: cannot open " << input << "\n";
    return 2;
  }
  std::vector<std::pair<double, double>> pts;
  std::string line;
  int col_t = -1, col_s = -1;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (col_t < 0) {
      for (size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "T") col_t = static_cast<int>(i);
        if (cells[i] == "s_bar") col_s = static_cast<int>(i);
      }
      if (col_t < 0 || col_s < 0) {
        std::cerr << "fit: input table must have columns T and s_bar\n";
        return 2;
      }
      continue;
    }
    pts.emplace_back(std::stod(cells[col_t]), std::stod(cells[col_s]));
  }
  const qtm::ScalingFit fit = qtm::fit_scaling(pts, velocity);
  nlohmann::json j;
  j["c"] = fit.central_charge;
  j["intercept"] = fit.intercept;
  if (fit.c1) j["C1"] = *fit.c1;
  j["residual"] = fit.residual;
  j["points"] = pts.size();
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty())
    std::cout << text;
  else {
    std::ofstream os(o.out, std::ios::trunc);
    os << text;
  }
  return 0;
}

// ---- validate ---------------------------------------------------------------

int cmd_validate(const std::string& scope, double tolerance_scale) {
  const qtm::ValidationScope s =
      scope == "full" ? qtm::ValidationScope::Full : qtm::ValidationScope::Quick;
  const auto results = qtm::run_validation(s, tolerance_scale);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  measured=" << fmt(r.measured)
              << "  tol=" << fmt(r.tolerance) << (r.detail.empty() ? "" : "  " + r.detail)
              << "\n";
    all = all && r.passed;
  }
  std::cout << (all ? "validation OK" : "validation FAILED") << " (" << results.size()
            << " checks)\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum transfer matrix toolkit for finite-temperature spin chains"};
  app.set_version_flag("--version", qtm::kVersion);
  app.require_subcommand(1);

  CommonOpts o;

  CLI::App* qd = app.add_subcommand("qubit-demo", "Exact two-qubit entanglement measures");
  qd->add_option("--temps", o.temps, "Temperature grid")->delimiter(',');
  add_output_flags(qd, o);

  CLI::App* sp = app.add_subcommand("spectrum", "Entanglement spectrum of rho_bar_A");
  add_common_model_flags(sp, o);
  sp->add_option("--temp", o.temp, "Temperature");
  sp->add_option("--dbeta", o.dbeta, "Trotter step");
  sp->add_option("--m-kept", o.m_kept, "Kept states (tmrg)");
  sp->add_option("--method", o.method, "dense | tmrg")->check(CLI::IsMember({"dense", "tmrg"}));
  add_output_flags(sp, o);

  CLI::App* sw = app.add_subcommand("sweep", "TMRG temperature sweep");
  add_common_model_flags(sw, o);
  sw->add_option("--temps", o.temps, "Target temperatures (descending)")->delimiter(',');
  sw->add_option("--dbeta", o.dbeta, "Trotter step");
  sw->add_option("--m-kept", o.m_kept, "Kept states");
  add_output_flags(sw, o);

  std::string fit_input;
  double velocity_val = 0.0;
  CLI::App* ft = app.add_subcommand("fit", "Conformal scaling fit of s_bar vs ln T");
  ft->add_option("input", fit_input, "CSV table with columns T, s_bar")->required();
  CLI::Option* vopt = ft->add_option("--velocity", velocity_val, "Excitation velocity v");
  add_output_flags(ft, o);

  std::string scope = "quick";
  double tol_scale = 1.0;
  CLI::App* va = app.add_subcommand("validate", "Run the invariant suites");
  va->add_option("--scope", scope, "quick | full")->check(CLI::IsMember({"quick", "full"}));
  va->add_option("--tolerance-scale", tol_scale,
                 "Multiply all tolerances (self-test hook; 0 must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (qd->parsed()) {
      apply_config_file(qd, o);
      return cmd_qubit_demo(o);
    }
    if (sp->parsed()) {
      apply_config_file(sp, o);
      return cmd_spectrum(o);
    }
    if (sw->parsed()) {
      apply_config_file(sw, o);
      return cmd_sweep(o);
    }
    if (ft->parsed()) {
      apply_config_file(ft, o);
      return cmd_fit(o, fit_input,
                     vopt->count() ? std::optional<double>(velocity_val) : std::nullopt);
    }
    if (va->parsed()) return cmd_validate(scope, tol_scale);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
