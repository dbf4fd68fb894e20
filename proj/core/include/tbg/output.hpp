#pragma once

#include "tbg/bm_model.hpp"
#include "tbg/envelope.hpp"
#include "tbg/propagator.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tbg {

using Cell = std::variant<double, long long, std::string>;
using Summary = std::map<std::string, std::variant<double, long long, bool, std::string, std::vector<double>>>;

/// Merges `extras` into the config JSON object and returns a single line.
std::string metadata_json(const std::string& config_json, const Summary& extras = {});

/// CSV with a "# metadata: <json>" first line, then the header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& metadata,
            std::vector<std::string> columns);
  void row(const std::vector<Cell>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

/// run.json: study name, resolved config, produced files and summary values.
class Manifest {
 public:
  Manifest(std::string study, std::string config_json);
  void add_file(const std::filesystem::path& file, const std::string& description);
  void set(const std::string& key, std::variant<double, long long, bool, std::string, std::vector<double>> value);
  const Summary& summary() const { return summary_; }
  void write(const std::filesystem::path& dir) const;

 private:
  std::string study_;
  std::string config_json_;
  std::vector<std::pair<std::string, std::string>> files_;
  Summary summary_;
};

/// "tb_t<time>.csv"-style stem with a compact time label (4 -> "4", 2.5 -> "2.5").
std::string time_label(double t);

/// Columns layer,sublattice,n1,n2,x,y,re,im,abs.
void write_lattice_snapshot(const std::filesystem::path& path, const std::string& metadata,
                            const LatticeState& psi);
/// Columns x,y,component,re,im (component 0..3 = 1A,1B,2A,2B).
void write_envelope_snapshot(const std::filesystem::path& path, const std::string& metadata,
                             const Envelope& f, double min_abs = 0.0);
/// Columns kx,ky,band_index,energy with band_index relative to the flat pair.
void write_bands_csv(const std::filesystem::path& path, const std::string& metadata,
                     const std::vector<BandPoint>& points, int bands_each_side);

}  // namespace tbg
