#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slicedmi/distributions.hpp"
#include "slicedmi/ksg.hpp"
#include "slicedmi/random.hpp"

namespace slicedmi {

/// How the values in SweepConfig::mi_grid are read.
enum class GridScale { total, per_component };

struct SweepConfig {
  Family family = Family::correlated_normal;
  std::vector<Eigen::Index> d_list;
  std::vector<Eigen::Index> k_list;
  std::vector<double> mi_grid;
  GridScale mi_grid_scale = GridScale::total;
  Eigen::Index n_samples = 10000;
  Eigen::Index n_slices = 128;
  Eigen::Index n_runs = 10;
  Allocation allocation = Allocation::equal;
  MasterSeed seed{0};
  // Joint-space KSG is skipped above this dimension.
  Eigen::Index joint_ksg_max_d = 16;
  int neighbors = 1;

  /// Throws ConfigError on empty lists, zero counts, or a grid with no
  /// feasible (d, k) pair.
  void validate() const;
};

struct SweepRecord {
  Family family = Family::correlated_normal;
  Eigen::Index d = 0;
  Eigen::Index k = 0;
  double target_total_mi = 0.0;
  double normalized_mi = 0.0;  // target_total_mi / d
  double smi_mean = 0.0;
  double smi_std = 0.0;
  std::optional<double> ksg_mi_mean;
  std::optional<double> ksg_mi_std;
  std::vector<std::uint64_t> run_seeds;
  std::string status = "ok";
  std::string warning;

  bool ok() const { return status == "ok"; }
};

/// Records in grid order: d outermost, then k, then MI. Points with k > d or
/// a target the family cannot represent are returned with a non-ok status.
/// Datasets depend on (d, MI, run) only, so every k at a grid point sees the
/// same samples.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, int threads = 1);

struct DecaySlope {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  Eigen::Index n_points = 0;
};

/// OLS of ln(smi_mean) on ln(d) over ok records with normalized MI at or
/// above `min_normalized_mi`. Needs three distinct d values and positive
/// smi_mean throughout (DomainError otherwise).
DecaySlope fit_decay_slope(const std::vector<SweepRecord>& records, double min_normalized_mi = 2.0);

/// Same fit on bare (d, value) pairs.
DecaySlope fit_decay_slope(const std::vector<double>& d, const std::vector<double>& values);

enum class AwgnBase { uniform, normal };
enum class Normalization { whitening, standardization };

std::string_view to_string(AwgnBase base);
std::string_view to_string(Normalization normalization);
AwgnBase parse_awgn_base(std::string_view name);
Normalization parse_normalization(std::string_view name);

struct AwgnConfig {
  double sigma = 0.1;
  AwgnBase base = AwgnBase::uniform;
  Eigen::MatrixXd mixing_matrix = default_mixing(5);
  Normalization normalization = Normalization::whitening;
  Eigen::Index n_samples = 10000;
  Eigen::Index n_slices = 128;
  Eigen::Index n_runs = 10;
  MasterSeed seed{0};

  void validate() const;
  /// 1e-2 I + 1 1^T.
  static Eigen::MatrixXd default_mixing(Eigen::Index d);
};

struct AwgnResult {
  AwgnBase base = AwgnBase::uniform;
  Normalization normalization = Normalization::whitening;
  double mi_mean = 0.0, mi_std = 0.0;
  double smi_mean = 0.0, smi_std = 0.0;
  double smi2_mean = 0.0, smi2_std = 0.0;
  std::vector<double> mi_runs, smi_runs, smi2_runs;
};

/// Per run: X = normalize(base * A^T) from the sample, Y = X + sigma Z.
/// Reports joint KSG MI, 1-SMI and 2-SMI. Run r uses seed.child(r), so
/// configs that differ only in normalization share base samples and noise.
AwgnResult run_awgn(const AwgnConfig& cfg, int threads = 1);

// Flat "key = value" configuration files. Blank lines and '#' comments are
// ignored; lists are comma separated; matrix rows are separated by ';'.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);
SweepConfig sweep_config_from(const KeyValues& kv);
AwgnConfig awgn_config_from(const KeyValues& kv);
KeyValues to_key_values(const SweepConfig& cfg);
KeyValues to_key_values(const AwgnConfig& cfg);

/// Fixed 6-significant-digit rendering used by every CSV writer.
std::string format_number(double value);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(std::istream& in);
void write_awgn_csv(std::ostream& out, const std::vector<AwgnResult>& rows);

}  // namespace slicedmi
