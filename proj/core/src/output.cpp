#include "tbg/output.hpp"

#include "tbg/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <iomanip>

namespace tbg {

namespace {

using nlohmann::json;

json to_json_value(const Summary::mapped_type& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string metadata_json(const std::string& config_json, const Summary& extras) {
  json j = json::parse(config_json);
  for (const auto& [k, v] : extras) j[k] = to_json_value(v);
  return j.dump();
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& metadata,
                     std::vector<std::string> columns)
    : path_(path), width_(columns.size()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw Error("cannot write " + path.string());
  out_ << "# metadata: " << metadata << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
  out_ << std::setprecision(12);
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != width_) throw DimensionMismatchError("CSV row width differs from the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [this](const auto& x) {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>)
            out_ << csv_escape(x);
          else
            out_ << x;
        },
        cells[i]);
  }
  out_ << '\n';
}

Manifest::Manifest(std::string study, std::string config_json)
    : study_(std::move(study)), config_json_(std::move(config_json)) {}

void Manifest::add_file(const std::filesystem::path& file, const std::string& description) {
  files_.emplace_back(file.filename().string(), description);
}

void Manifest::set(const std::string& key,
                   std::variant<double, long long, bool, std::string, std::vector<double>> value) {
  summary_[key] = std::move(value);
}

void Manifest::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  json j;
  j["study"] = study_;
  j["config"] = json::parse(config_json_);
  json files = json::array();
  for (const auto& [name, desc] : files_) files.push_back({{"file", name}, {"description", desc}});
  j["files"] = files;
  json s = json::object();
  for (const auto& [k, v] : summary_) s[k] = to_json_value(v);
  j["summary"] = s;
  std::ofstream out(dir / "run.json");
  if (!out) throw Error("cannot write " + (dir / "run.json").string());
  out << j.dump(2) << '\n';
}

std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

void write_lattice_snapshot(const std::filesystem::path& path, const std::string& metadata,
                            const LatticeState& psi) {
  CsvWriter w(path, metadata, {"layer", "sublattice", "n1", "n2", "x", "y", "re", "im", "abs"});
  const SiteTable& t = *psi.table;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const SiteIndex& s = t.site(i);
    const auto z = psi.amplitudes[static_cast<Eigen::Index>(i)];
    w.row({static_cast<long long>(s.layer), std::string(1, sublattice_name(s.sublattice)),
           static_cast<long long>(s.n1), static_cast<long long>(s.n2), t.position(i).x(), t.position(i).y(),
           z.real(), z.imag(), std::abs(z)});
  }
}

void write_envelope_snapshot(const std::filesystem::path& path, const std::string& metadata,
                             const Envelope& f, double min_abs) {
  CsvWriter w(path, metadata, {"x", "y", "component", "re", "im"});
  for (int iy = 0; iy < f.grid.n; ++iy)
    for (int ix = 0; ix < f.grid.n; ++ix) {
      const auto p = static_cast<Eigen::Index>(f.grid.index(ix, iy));
      for (long long c = 0; c < 4; ++c) {
        const auto z = f.comp[static_cast<std::size_t>(c)][p];
        if (std::abs(z) < min_abs) continue;
        w.row({f.grid.coord(ix), f.grid.coord(iy), c, z.real(), z.imag()});
      }
    }
}

void write_bands_csv(const std::filesystem::path& path, const std::string& metadata,
                     const std::vector<BandPoint>& points, int bands_each_side) {
  CsvWriter w(path, metadata, {"kx", "ky", "band_index", "energy"});
  for (const auto& p : points) {
    const int dim = static_cast<int>(p.energies.size());
    for (int n = 2 - bands_each_side; n <= 1 + bands_each_side; ++n) {
      const int pos = band_position(n, dim);
      if (pos < 0 || pos >= dim) continue;
      w.row({p.k.x(), p.k.y(), static_cast<long long>(n), p.energies[pos]});
    }
  }
}

}  // namespace tbg
