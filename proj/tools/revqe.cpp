// Batch experiment runner: configuration, orchestration, deterministic
// CSV/JSON emission for all library modules.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "revqe/dynamics.hpp"
#include "revqe/geometry.hpp"
#include "revqe/numerics.hpp"
#include "revqe/semiclassics.hpp"
#include "revqe/specfun.hpp"
#include "revqe/spectral.hpp"
#include "revqe/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace revqe;

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json default_config() {
  return json{
      {"surface", "sphere"},
      {"aspect", 2.0},
      {"table", ""},
      {"grid", 2000},
      {"c", 1.0},
      {"beta", 1.0 / 6.0},
      {"vartheta", 0.0},
      {"h", json::array({1e-1, 1e-2, 1e-3})},
      {"modes", json::array({0})},
      {"mode_list", json::array({0, 1, 2})},
      {"mode_count", 8},
      {"m", 0},
      {"l_min", 20},
      {"l_max", 200},
      {"l_cap", 1200},
      {"a", "theta"},
      {"a_table", ""},
      {"epsilon", 0.3},
      {"zonal_epsilon", 0.5},
      {"partition_length", 30},
      {"flow",
       json{{"theta0", 1.0},
            {"phi0", 0.0},
            {"p_theta0", 1.0},
            {"p_phi0", 0.0},
            {"T", 3.0},
            {"dt", 1e-3},
            {"sample_every", 10}}},
      {"seed", 0},
      {"out", "out"},
  };
}

std::vector<TableSample> read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("table: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,R,z", 0) != 0)
    throw ValidationError("table: expected header t,R,z in " + path);
  std::vector<TableSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    TableSample s{};
    char c1 = 0, c2 = 0;
    if (!(ss >> s.t >> c1 >> s.R >> c2 >> s.z) || c1 != ',' || c2 != ',')
      throw ValidationError("table: bad row '" + line + "' in " + path);
    samples.push_back(s);
  }
  return samples;
}

SurfaceSpec surface_from(const json& cfg) {
  const std::string kind = cfg.at("surface").get<std::string>();
  const std::size_t n = cfg.at("grid").get<std::size_t>();
  if (kind == "sphere") return SurfaceSpec::round_sphere(n);
  if (kind == "ellipsoid")
    return SurfaceSpec::ellipsoid(cfg.at("aspect").get<double>(), n);
  if (kind == "table")
    return SurfaceSpec::table(
        read_table_csv(cfg.at("table").get<std::string>()), n);
  throw ValidationError("surface: unknown kind '" + kind + "'");
}

std::function<double(double)> observable_from(const json& cfg) {
  const std::string name = cfg.at("a").get<std::string>();
  if (name == "one") return [](double) { return 1.0; };
  if (name == "theta") return [](double th) { return th; };
  if (name == "cos") return [](double th) { return std::cos(th); };
  if (name == "table") {
    std::ifstream in(cfg.at("a_table").get<std::string>());
    if (!in) throw ValidationError("a_table: cannot open file");
    std::vector<double> xs, ys;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      double x, y;
      char c = 0;
      if (!(ss >> x >> c >> y) || c != ',')
        throw ValidationError("a_table: bad row '" + line + "'");
      xs.push_back(x);
      ys.push_back(y);
    }
    if (xs.size() < 2) throw ValidationError("a_table: need >= 2 rows");
    auto interp = std::make_shared<CubicHermite>(xs, ys);
    return [interp](double th) { return (*interp)(th); };
  }
  throw ValidationError("a: unknown test function '" + name + "'");
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

void write_summary(const fs::path& dir, const std::string& name, json body,
                   const json& cfg) {
  body["config"] = cfg;
  std::ofstream out = open_out(dir, name);
  out << body.dump(2) << "\n";
}

// Flattened spectrum covering [0, e_top] for the configured surface: the
// closed form on the round sphere, otherwise numeric per-mode solves.
std::vector<SpectrumEntry> spectrum_up_to(const json& cfg,
                                          const ProfileCurve& curve,
                                          const std::vector<int>& modes,
                                          double e_top) {
  if (cfg.at("surface").get<std::string>() == "sphere") {
    const int l_cap = cfg.at("l_cap").get<int>();
    const double e_max = static_cast<double>(l_cap) * (l_cap + 1.0);
    if (e_max < e_top)
      throw std::runtime_error("l_cap too small for the requested window");
    return sphere_closed_spectrum(l_cap);
  }
  const std::size_t N = cfg.at("grid").get<std::size_t>();
  const std::size_t count = cfg.at("mode_count").get<std::size_t>();
  std::vector<ModeSpectrum> spectra;
  for (int m : modes) {
    spectra.push_back(solve_mode(assemble_mode(curve, m, N), count));
    if (spectra.back().pairs.back().eigenvalue < e_top)
      throw std::runtime_error(
          "mode_count too small: spectrum does not reach the window top");
  }
  return flatten(spectra);
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const json& cfg, const fs::path& out) {
  const ProfileCurve curve = build_profile(surface_from(cfg));
  const std::size_t N = cfg.at("grid").get<std::size_t>();
  const std::size_t count = cfg.at("mode_count").get<std::size_t>();

  {
    std::ofstream f = open_out(out, "profile.csv");
    f << "theta,R,z,dR\n";
    const auto& grid = curve.theta_grid();
    for (std::size_t i = 0; i < grid.size(); ++i)
      f << num(grid[i]) << ',' << num(curve.radius_samples()[i]) << ','
        << num(curve.height_samples()[i]) << ','
        << num(curve.radius_deriv_samples()[i]) << "\n";
  }

  std::ofstream spec_csv = open_out(out, "spectrum.csv");
  spec_csv << "m,k,l_label,E\n";
  json eigen = json::array();
  for (const auto& mj : cfg.at("mode_list")) {
    const int m = mj.get<int>();
    const ModeSpectrum spec = solve_mode(assemble_mode(curve, m, N), count);
    for (const auto& p : spec.pairs) {
      spec_csv << p.m << ',' << p.index_in_mode << ',' << p.l_label << ','
               << num(p.eigenvalue) << "\n";
      eigen.push_back(json{{"m", p.m},
                           {"k", p.index_in_mode},
                           {"l_label", p.l_label},
                           {"E", p.eigenvalue}});
      std::ostringstream name;
      name << "eigenfunction_m" << p.m << "_k" << p.index_in_mode << ".csv";
      std::ofstream ef = open_out(out, name.str());
      ef << "theta,f\n";
      const auto& grid = curve.theta_grid();
      for (std::size_t i = 0; i < grid.size(); ++i)
        ef << num(grid[i]) << ',' << num(p.f[i]) << "\n";
    }
  }
  write_summary(out, "spectrum.json",
                json{{"arc_length", curve.arc_length()},
                     {"surface_area", surface_area(curve)},
                     {"eigenvalues", eigen}},
                cfg);
  return 0;
}

int cmd_qlimit(const json& cfg, const fs::path& out) {
  if (cfg.at("surface").get<std::string>() != "sphere")
    throw ValidationError("qlimit: closed-form scan requires surface=sphere");
  const ProfileCurve curve = build_profile(surface_from(cfg));
  const QuantumLimitReport rep = quantum_limit_scan(
      curve, cfg.at("m").get<int>(), cfg.at("l_min").get<int>(),
      cfg.at("l_max").get<int>(), observable_from(cfg));

  std::ofstream f = open_out(out, "qlimit.csv");
  f << "l,deviation\n";
  for (std::size_t i = 0; i < rep.l_values.size(); ++i)
    f << rep.l_values[i] << ',' << num(rep.deviation[i]) << "\n";
  write_summary(out, "qlimit.json",
                json{{"m", rep.m},
                     {"alpha", rep.alpha},
                     {"slope", rep.decay_slope},
                     {"r2", rep.decay_r2}},
                cfg);
  return 0;
}

int cmd_partition(const json& cfg, const fs::path& out) {
  const int n = cfg.at("partition_length").get<int>();
  if (n < 2) throw ValidationError("partition_length: need >= 2");
  std::vector<double> a;
  for (int j = 1; j <= n; ++j) a.push_back(static_cast<double>(j) * (j + 1.0));
  const PartitionResult res = partition(a, cfg.at("beta").get<double>());

  std::ofstream f = open_out(out, "partition.csv");
  f << "jk\n";
  for (std::size_t i = 0; i < res.jk.size(); ++i)
    f << (i ? "," : "") << res.jk[i];
  f << "\nP\n";
  for (std::size_t i = 0; i < res.P.size(); ++i) f << (i ? "," : "") << res.P[i];
  f << "\n";
  write_summary(out, "partition.json",
                json{{"jk", res.jk}, {"P", res.P}}, cfg);
  return 0;
}

int cmd_window(const json& cfg, const fs::path& out) {
  const ProfileCurve curve = build_profile(surface_from(cfg));
  const double c = cfg.at("c").get<double>();
  const double beta = cfg.at("beta").get<double>();
  const std::vector<int> modes = cfg.at("modes").get<std::vector<int>>();
  json sizes = json::array();
  int idx = 0;
  for (const auto& hj : cfg.at("h")) {
    const double h = hj.get<double>();
    const double e_top = (c + std::pow(h, beta)) / (h * h);
    const std::vector<SpectrumEntry> spec =
        spectrum_up_to(cfg, curve, modes, e_top);
    const SpectralWindow w = spectral_window(spec, c, beta, h, modes);
    std::ostringstream name;
    name << "window_" << idx++ << ".csv";
    std::ofstream f = open_out(out, name.str());
    f << "index,m,k,l_label,E\n";
    for (std::size_t i = 0; i < w.members.size(); ++i)
      f << w.indices[i] << ',' << w.members[i].m << ',' << w.members[i].k
        << ',' << w.members[i].l_label << ',' << num(w.members[i].E) << "\n";
    sizes.push_back(json{{"h", h}, {"count", w.members.size()}});
  }
  write_summary(out, "window.json", json{{"windows", sizes}}, cfg);
  return 0;
}

int cmd_qe_stat(const json& cfg, const fs::path& out) {
  if (cfg.at("surface").get<std::string>() != "sphere")
    throw ValidationError("qe-stat: requires surface=sphere");
  const ProfileCurve curve = build_profile(surface_from(cfg));
  const double c = cfg.at("c").get<double>();
  const double beta = cfg.at("beta").get<double>();
  const double vartheta = cfg.at("vartheta").get<double>();
  const BetaInterval adm = admissible_exponents(vartheta);
  // The admissible interval is open at the top; the boundary value is the
  // customary working choice, so accept it.
  if (!(beta > adm.lo && beta <= adm.hi))
    throw ValidationError("beta: outside the admissible interval for vartheta");
  const std::vector<int> modes = cfg.at("modes").get<std::vector<int>>();
  const auto a = observable_from(cfg);
  const double alpha = limit_target(curve, a);

  std::ofstream f = open_out(out, "qe_stat.csv");
  f << "h,S,weyl_stat,ref_volume\n";
  json rows = json::array();
  for (const auto& hj : cfg.at("h")) {
    const double h = hj.get<double>();
    const double e_top = (c + std::pow(h, beta)) / (h * h);
    const std::vector<SpectrumEntry> spec =
        spectrum_up_to(cfg, curve, modes, e_top);
    const SpectralWindow w = spectral_window(spec, c, beta, h, modes);
    if (w.members.empty()) throw std::runtime_error("empty spectral window");
    int l_min = w.members.front().l_label, l_max = l_min;
    for (const auto& e : w.members) {
      l_min = std::min(l_min, e.l_label);
      l_max = std::max(l_max, e.l_label);
    }
    // One batched closed-form pass per mode in the family.
    std::vector<std::vector<double>> mu_by_mode;
    for (int m : modes)
      mu_by_mode.push_back(sphere_matrix_elements(
          m, std::max(std::abs(m), l_min), l_max, a));
    const auto mu_of = [&](const SpectrumEntry& e) {
      const std::size_t mi = static_cast<std::size_t>(
          std::find(modes.begin(), modes.end(), e.m) - modes.begin());
      const int base = std::max(std::abs(e.m), l_min);
      return mu_by_mode[mi][static_cast<std::size_t>(e.l_label - base)];
    };
    const double S = integrated_qe_statistic(w, mu_of, alpha);
    const WeylResult wr = weyl_statistic(curve, w);
    std::vector<double> dev;
    for (const auto& e : w.members) dev.push_back(std::abs(mu_of(e) - alpha));
    const SelectionResult sel = select_density_one(w, dev, S);
    f << num(h) << ',' << num(S) << ',' << num(wr.statistic) << ','
      << num(wr.reference_volume) << "\n";
    rows.push_back(json{{"h", h},
                        {"S", S},
                        {"window_size", w.members.size()},
                        {"weyl_stat", wr.statistic},
                        {"ref_volume", wr.reference_volume},
                        {"density_ratio", sel.density_ratio}});
  }
  write_summary(out, "qe_stat.json", json{{"alpha", alpha}, {"series", rows}},
                cfg);
  return 0;
}

int cmd_weyl(const json& cfg, const fs::path& out) {
  const ProfileCurve curve = build_profile(surface_from(cfg));
  const double c = cfg.at("c").get<double>();
  const double beta = cfg.at("beta").get<double>();
  const std::vector<int> modes = cfg.at("modes").get<std::vector<int>>();

  std::ofstream f = open_out(out, "weyl.csv");
  f << "h,weyl_stat,ref_volume,ratio\n";
  json rows = json::array();
  for (const auto& hj : cfg.at("h")) {
    const double h = hj.get<double>();
    const double e_top = (c + std::pow(h, beta)) / (h * h);
    const std::vector<SpectrumEntry> spec =
        spectrum_up_to(cfg, curve, modes, e_top);
    const SpectralWindow w = spectral_window(spec, c, beta, h, modes);
    if (w.members.empty()) throw std::runtime_error("empty spectral window");
    const WeylResult wr = weyl_statistic(curve, w);
    const double ratio = wr.statistic / wr.reference_volume;
    f << num(h) << ',' << num(wr.statistic) << ',' << num(wr.reference_volume)
      << ',' << num(ratio) << "\n";
    rows.push_back(json{{"h", h},
                        {"window_size", w.members.size()},
                        {"weyl_stat", wr.statistic},
                        {"ref_volume", wr.reference_volume},
                        {"ratio", ratio}});
  }
  write_summary(out, "weyl.json", json{{"series", rows}}, cfg);
  return 0;
}

int cmd_legendre(const json& cfg, const fs::path& out) {
  const AsymptoticFitReport rep = asymptotic_residual_scan(
      cfg.at("l_min").get<int>(), cfg.at("l_max").get<int>(),
      cfg.at("m").get<int>(), cfg.at("epsilon").get<double>());
  std::ofstream f = open_out(out, "legendre.csv");
  f << "l,sup_residual\n";
  for (std::size_t i = 0; i < rep.l_values.size(); ++i)
    f << rep.l_values[i] << ',' << num(rep.residuals[i]) << "\n";
  write_summary(out, "legendre.json",
                json{{"slope", rep.fitted_slope}, {"r2", rep.fit_r2}}, cfg);
  return 0;
}

int cmd_zonal(const json& cfg, const fs::path& out) {
  const ZonalReport rep =
      zonal_decay_scan(cfg.at("l_min").get<int>(), cfg.at("l_max").get<int>(),
                       cfg.at("zonal_epsilon").get<double>());
  std::ofstream f = open_out(out, "zonal.csv");
  f << "l,zonal_mass\n";
  for (std::size_t i = 0; i < rep.l_values.size(); ++i)
    f << rep.l_values[i] << ',' << num(rep.outside_mass[i]) << "\n";
  write_summary(out, "zonal.json",
                json{{"decay_rate", rep.decay_rate}, {"r2", rep.fit_r2}}, cfg);
  return 0;
}

int cmd_flow(const json& cfg, const fs::path& out) {
  const ProfileCurve curve = build_profile(surface_from(cfg));
  const json& fc = cfg.at("flow");
  const PhaseState s0{fc.at("theta0").get<double>(),
                      fc.at("phi0").get<double>(),
                      fc.at("p_theta0").get<double>(),
                      fc.at("p_phi0").get<double>()};
  const double T = fc.at("T").get<double>();
  const double dt = fc.at("dt").get<double>();
  if (!(T > 0.0)) throw ValidationError("flow.T: need > 0");
  const std::size_t every = fc.at("sample_every").get<std::size_t>();
  const TrajectoryReport rep = integrate(curve, s0, T, dt, every);

  {
    std::ofstream f = open_out(out, "trajectory.csv");
    f << "t,theta,phi,p_theta,p_phi,H\n";
    for (std::size_t i = 0; i < rep.states.size(); ++i) {
      const PhaseState& s = rep.states[i];
      f << num(rep.times[i]) << ',' << num(s.theta) << ',' << num(s.phi) << ','
        << num(s.p_theta) << ',' << num(s.p_phi) << ','
        << num(hamiltonian(curve, s)) << "\n";
    }
  }

  json body{{"energy_drift", rep.energy_drift},
            {"p_phi_drift", rep.p_phi_drift}};
  if (s0.p_phi == 0.0) {
    std::ofstream f = open_out(out, "reduced.csv");
    f << "t,theta,p_theta,branch\n";
    for (std::size_t i = 0; i < rep.states.size(); ++i) {
      const ReducedState r = reduce(rep.states[i]);
      f << num(rep.times[i]) << ',' << num(r.theta) << ',' << num(r.p_theta)
        << ',' << (r.branch == Branch::Up ? "up" : "down") << "\n";
    }
    const double cval = s0.p_theta * s0.p_theta;
    if (cval > 0.0) {
      const auto a = observable_from(cfg);
      const double period = curve.arc_length() / std::sqrt(cval);
      const double t_avg = birkhoff_average(curve, a, reduce(s0), period);
      const ShellAverage s_avg = space_average_reduced_shell(curve, a, cval);
      body["birkhoff_average"] = t_avg;
      body["space_average"] = s_avg.mean;
      body["shell_volume"] = s_avg.volume;
      body["average_discrepancy"] = std::abs(t_avg - s_avg.mean);
    }
  }
  write_summary(out, "flow.json", body, cfg);
  return 0;
}

int cmd_verify(const json& cfg, const fs::path& out) {
  const std::vector<CheckResult> results =
      run_acceptance(cfg.at("seed").get<unsigned>());
  json checks = json::array();
  int failures = 0;
  for (const auto& r : results) {
    std::printf("%s  %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    checks.push_back(
        json{{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    if (!r.passed) ++failures;
  }
  write_summary(out, "verify.json",
                json{{"checks", checks}, {"failures", failures}}, cfg);
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and dynamical experiments on surfaces of revolution"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--override", overrides, "key=value config overrides");
  app.fallthrough();

  const std::vector<std::pair<std::string, int (*)(const json&, const fs::path&)>>
      commands = {{"spectrum", cmd_spectrum}, {"qlimit", cmd_qlimit},
                  {"partition", cmd_partition}, {"window", cmd_window},
                  {"qe-stat", cmd_qe_stat},    {"weyl", cmd_weyl},
                  {"legendre", cmd_legendre},  {"zonal", cmd_zonal},
                  {"flow", cmd_flow},          {"verify", cmd_verify}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are validation errors
  }

  try {
    json cfg = default_config();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      json user;
      try {
        in >> user;
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
      }
      if (!user.is_object()) throw ValidationError("config: expected an object");
      cfg.update(user);
    }
    for (const std::string& kv : overrides) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ValidationError("override: expected key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      json parsed;
      try {
        parsed = json::parse(val);
      } catch (const json::parse_error&) {
        parsed = val;  // bare string
      }
      cfg[key] = parsed;
    }
    if (!out_dir.empty()) cfg["out"] = out_dir;
    const fs::path out = cfg.at("out").get<std::string>();

    const std::string sub = app.get_subcommands().front()->get_name();
    for (const auto& [name, fn] : commands)
      if (name == sub) return fn(cfg, out);
    throw ValidationError("unknown subcommand " + sub);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
}
