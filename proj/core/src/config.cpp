#include "tbg/config.hpp"

#include "tbg/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace tbg {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError("key '" + key + "': expected an integer");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <class F>
Setter dbl(F field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) { field(c) = to_double(k, v); };
}
template <class F>
Setter integer(F field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) { field(c) = to_int(k, v); };
}
template <class F>
Setter list(F field) {
  return [field](RunConfig& c, const std::string&, const std::string& v) { field(c) = parse_list(v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"lattice.a", dbl([](RunConfig& c) -> double& { return c.lattice.a; })},
      {"lattice.theta_deg",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.lattice.theta = to_double(k, v) * kDeg; }},
      {"lattice.L",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.lattice.L = to_double(k, v);
         c.hopping.L = c.lattice.L;
       }},
      {"hopping.t0", dbl([](RunConfig& c) -> double& { return c.hopping.t0; })},
      {"hopping.h0", dbl([](RunConfig& c) -> double& { return c.hopping.h0; })},
      {"hopping.alpha0", dbl([](RunConfig& c) -> double& { return c.hopping.alpha0; })},
      {"hopping.interlayer_cutoff", dbl([](RunConfig& c) -> double& { return c.hopping.interlayer_cutoff; })},
      {"bm.mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "derived") c.bm_derived = true;
         else if (v == "explicit") c.bm_derived = false;
         else throw ConfigError("key '" + k + "': expected derived or explicit");
       }},
      {"bm.v", dbl([](RunConfig& c) -> double& { return c.bm_v; })},
      {"bm.w", dbl([](RunConfig& c) -> double& { return c.bm_w; })},
      {"bm.cutoff", integer([](RunConfig& c) -> int& { return c.bm_cutoff; })},
      {"bm.step_tol", dbl([](RunConfig& c) -> double& { return c.bm_step.tol; })},
      {"bm.dt_initial", dbl([](RunConfig& c) -> double& { return c.bm_step.dt_initial; })},
      {"bm.grid_spacing", dbl([](RunConfig& c) -> double& { return c.grid_spacing; })},
      {"wavepacket.kind",
       [](RunConfig& c, const std::string&, const std::string& v) { c.wavepacket.kind = parse_packet_kind(v); }},
      {"wavepacket.band", integer([](RunConfig& c) -> int& { return c.wavepacket.band; })},
      {"wavepacket.kx", dbl([](RunConfig& c) -> double& { return c.wavepacket.k.x(); })},
      {"wavepacket.ky", dbl([](RunConfig& c) -> double& { return c.wavepacket.k.y(); })},
      {"wavepacket.sigma_r", dbl([](RunConfig& c) -> double& { return c.wavepacket.sigma_r; })},
      {"wavepacket.epsilon",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.epsilon = to_double(k, v);
         c.wavepacket.sigma_r = sigma_from_epsilon(c.epsilon, c.sigma_units, c.lattice.a);
       }},
      {"wavepacket.sigma_units",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "angstrom") c.sigma_units = SigmaUnits::Angstrom;
         else if (v == "lattice") c.sigma_units = SigmaUnits::LatticeConstant;
         else throw ConfigError("key '" + k + "': expected angstrom or lattice");
       }},
      {"wavepacket.pattern",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.wavepacket.coefficients = coefficient_pattern(to_int(k, v));
       }},
      {"wavepacket.cutoff", integer([](RunConfig& c) -> int& { return c.wavepacket.cutoff; })},
      {"propagation.method",
       [](RunConfig& c, const std::string&, const std::string& v) { c.propagation.method = parse_method(v); }},
      {"propagation.tol", dbl([](RunConfig& c) -> double& { return c.propagation.tol; })},
      {"propagation.times", list([](RunConfig& c) -> std::vector<double>& { return c.propagation.snapshot_times; })},
      {"propagation.dense_limit",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.propagation.dense_limit = static_cast<std::size_t>(to_int(k, v));
       }},
      {"run.threads", integer([](RunConfig& c) -> int& { return c.threads; })},

      {"truncation.radii", list([](RunConfig& c) -> std::vector<double>& { return c.truncation.radii; })},
      {"truncation.reference_radius", dbl([](RunConfig& c) -> double& { return c.truncation.reference_radius; })},
      {"truncation.times", list([](RunConfig& c) -> std::vector<double>& { return c.truncation.times; })},
      {"truncation.r", dbl([](RunConfig& c) -> double& { return c.truncation.r; })},
      {"truncation.sigma_r", dbl([](RunConfig& c) -> double& { return c.truncation.sigma_r; })},
      {"truncation.patterns", integer([](RunConfig& c) -> int& { return c.truncation.patterns; })},
      {"truncation.nu", dbl([](RunConfig& c) -> double& { return c.truncation.nu; })},
      {"truncation.d_points", integer([](RunConfig& c) -> int& { return c.truncation.d_points; })},

      {"bands.path_points", integer([](RunConfig& c) -> int& { return c.bands.path_points; })},
      {"bands.grid_n", integer([](RunConfig& c) -> int& { return c.bands.grid_n; })},
      {"bands.check_theta_deg", dbl([](RunConfig& c) -> double& { return c.bands.check_theta_deg; })},
      {"bands.check_cutoff", integer([](RunConfig& c) -> int& { return c.bands.check_cutoff; })},

      {"compare.times", list([](RunConfig& c) -> std::vector<double>& { return c.compare.times; })},
      {"compare.radius", dbl([](RunConfig& c) -> double& { return c.compare.radius; })},
      {"compare.r", dbl([](RunConfig& c) -> double& { return c.compare.r; })},
      {"compare.write_snapshots",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.compare.write_snapshots = to_bool(k, v); }},

      {"scaling.times", list([](RunConfig& c) -> std::vector<double>& { return c.scaling.times; })},
      {"scaling.lambda0", dbl([](RunConfig& c) -> double& { return c.scaling.lambda0; })},
      {"scaling.lambda1", dbl([](RunConfig& c) -> double& { return c.scaling.lambda1; })},
      {"scaling.regime_eps", list([](RunConfig& c) -> std::vector<double>& { return c.scaling.regime_eps; })},
      {"scaling.hfrak", list([](RunConfig& c) -> std::vector<double>& { return c.scaling.hfrak; })},
      {"scaling.eps", list([](RunConfig& c) -> std::vector<double>& { return c.scaling.eps; })},
      {"scaling.theta_deg", list([](RunConfig& c) -> std::vector<double>& { return c.scaling.theta_deg; })},
      {"scaling.eps_fixed", dbl([](RunConfig& c) -> double& { return c.scaling.eps_fixed; })},
      {"scaling.theta_fixed_deg", dbl([](RunConfig& c) -> double& { return c.scaling.theta_fixed_deg; })},
      {"scaling.patterns", integer([](RunConfig& c) -> int& { return c.scaling.patterns; })},
      {"scaling.front_speed", dbl([](RunConfig& c) -> double& { return c.scaling.front_speed; })},
      {"scaling.margin", dbl([](RunConfig& c) -> double& { return c.scaling.margin; })},
      {"scaling.substudies",
       [](RunConfig& c, const std::string&, const std::string& v) {
         c.scaling.substudies.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           item = trim(item);
           if (item != "regime" && item != "hfrak" && item != "eps" && item != "theta")
             throw ConfigError("unknown scaling sub-study '" + item + "'");
           c.scaling.substudies.push_back(item);
         }
       }},

      {"flat.times", list([](RunConfig& c) -> std::vector<double>& { return c.flat.times; })},
      {"flat.sigma_r", dbl([](RunConfig& c) -> double& { return c.flat.sigma_r; })},
      {"flat.k1x", dbl([](RunConfig& c) -> double& { return c.flat.k1.x(); })},
      {"flat.k1y", dbl([](RunConfig& c) -> double& { return c.flat.k1.y(); })},

      {"bound.t", dbl([](RunConfig& c) -> double& { return c.bound.t; })},
      {"bound.target", dbl([](RunConfig& c) -> double& { return c.bound.target; })},
      {"bound.r", dbl([](RunConfig& c) -> double& { return c.bound.r; })},
      {"bound.phi_r", dbl([](RunConfig& c) -> double& { return c.bound.phi_r; })},
      {"bound.psi0_norm_inside", dbl([](RunConfig& c) -> double& { return c.bound.psi0_norm_inside; })},
      {"bound.nu", dbl([](RunConfig& c) -> double& { return c.bound.nu; })},
      {"bound.d_points", integer([](RunConfig& c) -> int& { return c.bound.d_points; })},
  };
  return table;
}

}  // namespace

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double("list", item));
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' has no section");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::array<std::complex<double>, 4> coefficient_pattern(int index) {
  const std::complex<double> h{0.5, 0.0}, ih{0.0, 0.5};
  switch (index) {
    case 0: return {h, h, h, h};
    case 1: return {h, ih, h, ih};
    case 2: return {h, -h, h, -h};
    case 3: return {h, -ih, h, -ih};
    default: throw ConfigError("coefficient pattern index must be 0..3");
  }
}

RunConfig RunConfig::preset_named(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.wavepacket.cutoff = c.bm_cutoff;
  if (name == "desk") return c;
  if (name == "paper") {
    // Production scale: reference radius 86.60 and long snapshot times.
    c.truncation.radii = {40.0, 50.0, 60.0, 70.0};
    c.truncation.reference_radius = 86.60;
    c.truncation.sigma_r = 10.0;
    c.compare.times = {0.0, 20.0, 40.0};
    c.compare.radius = 86.60;
    c.scaling.times = {5.0, 10.0, 20.0, 40.0};
    c.flat.times = {5.0, 10.0, 20.0, 40.0};
    c.bm_cutoff = 6;
    c.wavepacket.cutoff = 6;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
  const auto& table = setters();
  for (const auto& [k, v] : kv) {
    const auto it = table.find(k);
    if (it == table.end()) throw ConfigError("unknown config key '" + k + "'");
    it->second(*this, k, v);
  }
  // epsilon depends on the unit convention, which may sort after it
  if (kv.count("wavepacket.epsilon") && !kv.count("wavepacket.sigma_r"))
    wavepacket.sigma_r = sigma_from_epsilon(epsilon, sigma_units, lattice.a);
  lattice.validate();
  hopping.validate();
  propagation.validate();
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply(parse_key_values(ss.str()));
}

BmParams RunConfig::bm_params() const {
  return bm_derived ? BmParams::derived(hopping, lattice) : BmParams::make(bm_v, bm_w, lattice);
}

Grid RunConfig::grid_for(double half) const {
  if (!(half > 0.0) || !(grid_spacing > 0.0)) throw PreconditionError("grid extent and spacing must be positive");
  int n = static_cast<int>(std::ceil(2.0 * half / grid_spacing));
  n += n % 2;
  return Grid{n * grid_spacing, n};
}

std::string RunConfig::to_json() const {
  using nlohmann::json;
  auto cplx_list = [](const std::array<std::complex<double>, 4>& c) {
    json a = json::array();
    for (const auto& z : c) a.push_back({z.real(), z.imag()});
    return a;
  };
  const MoireData md = lattice.theta != 0.0 ? moire_data(lattice) : MoireData{};
  json j;
  j["preset"] = preset;
  j["code_version"] = TBG_VERSION;
  j["lattice"] = {{"a", lattice.a}, {"theta_rad", lattice.theta}, {"theta_deg", lattice.theta / kDeg},
                  {"L", lattice.L}};
  j["hopping"] = {{"t0", hopping.t0},         {"h0", hopping.h0},
                  {"alpha0", hopping.alpha0}, {"L", hopping.L},
                  {"interlayer_cutoff", hopping.interlayer_cutoff}};
  const BmParams bm = lattice.theta != 0.0 ? bm_params() : BmParams{};
  j["bm"] = {{"mode", bm_derived ? "derived" : "explicit"},
             {"v", bm.v},
             {"w", bm.w},
             {"hfrak", lattice.a * bm.w / bm.v},
             {"cutoff", bm_cutoff},
             {"step_tol", bm_step.tol},
             {"dt_initial", bm_step.dt_initial},
             {"grid_spacing", grid_spacing}};
  j["wavepacket"] = {{"kind", packet_kind_name(wavepacket.kind)},
                     {"band", wavepacket.band},
                     {"k", {wavepacket.k.x(), wavepacket.k.y()}},
                     {"sigma_r", wavepacket.sigma_r},
                     {"epsilon", epsilon},
                     {"sigma_units", sigma_units == SigmaUnits::Angstrom ? "angstrom" : "lattice"},
                     {"coefficients", cplx_list(wavepacket.coefficients)}};
  j["propagation"] = {{"method", method_name(propagation.method)},
                      {"tol", propagation.tol},
                      {"times", propagation.snapshot_times}};
  j["truncation"] = {{"radii", truncation.radii},     {"reference_radius", truncation.reference_radius},
                     {"times", truncation.times},     {"r", truncation.r},
                     {"sigma_r", truncation.sigma_r}, {"patterns", truncation.patterns},
                     {"nu", truncation.nu},           {"d_points", truncation.d_points}};
  j["bands"] = {{"path_points", bands.path_points},
                {"grid_n", bands.grid_n},
                {"check_theta_deg", bands.check_theta_deg},
                {"check_cutoff", bands.check_cutoff}};
  j["compare"] = {{"times", compare.times}, {"radius", compare.radius}, {"r", compare.r}};
  j["scaling"] = {{"times", scaling.times},
                  {"lambda0", scaling.lambda0},
                  {"lambda1", scaling.lambda1},
                  {"regime_eps", scaling.regime_eps},
                  {"hfrak", scaling.hfrak},
                  {"eps", scaling.eps},
                  {"theta_deg", scaling.theta_deg},
                  {"eps_fixed", scaling.eps_fixed},
                  {"theta_fixed_deg", scaling.theta_fixed_deg},
                  {"patterns", scaling.patterns},
                  {"front_speed", scaling.front_speed},
                  {"margin", scaling.margin},
                  {"substudies", scaling.substudies}};
  j["flat"] = {{"times", flat.times},
               {"sigma_r", flat.sigma_r},
               {"k1", {flat.k1.x(), flat.k1.y()}},
               {"dispersive_band", flat.dispersive_band},
               {"flat_band", flat.flat_band}};
  j["bound"] = {{"t", bound.t},   {"target", bound.target}, {"r", bound.r},
                {"phi_r", bound.phi_r}, {"nu", bound.nu}, {"d_points", bound.d_points}};
  j["conventions"] = {
      {"units", "eV, Angstrom, hbar/eV"},
      {"layer_rotation", "layer 1 by -theta/2, layer 2 by +theta/2"},
      {"K_m", md.K_m_convention},
      {"K_m_value", {bm.K_m.x(), bm.K_m.y()}},
      {"layer2_offset", "envelope gauge diag(1,1,e^{i s1 r},e^{i s1 r})"},
      {"envelope_normalisation", "sum_c int |f_c|^2 / |Gamma| = lattice norm"},
      {"sigma_units", sigma_units == SigmaUnits::Angstrom ? "sigma_r = 1/epsilon Angstrom" : "sigma_r = a/epsilon"},
      {"coefficient_patterns", "(1,1,1,1)/2, (1,i,1,i)/2, (1,-1,1,-1)/2, (1,-i,1,-i)/2"},
      {"band_labels", "1,2 flat pair; 3 next above; 0 next below"},
  };
  return j.dump();
}

}  // namespace tbg
