#include "slicedmi/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "slicedmi/errors.hpp"
#include "slicedmi/parallel.hpp"
#include "slicedmi/sliced.hpp"
#include "slicedmi/stats.hpp"

namespace slicedmi {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + text + "'");
  }
}

long long parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + text + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: '" + text + "'");
  }
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& text, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw ConfigError("config key '" + key + "': empty list entry");
    out.push_back(static_cast<T>(parse(key, item)));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& values, const char* sep, std::string (*fmt)(T)) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += fmt(values[i]);
  }
  return out;
}

std::string int_text(Eigen::Index v) { return std::to_string(v); }
std::string u64_text(std::uint64_t v) { return std::to_string(v); }
std::string double_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Stream tags for child seeds.
constexpr std::uint64_t kAllocationStream = 0xA110C;
constexpr std::uint64_t kSampleStream = 0x5A3B1E;
constexpr std::uint64_t kSliceStream = 0x511CE00;
constexpr std::uint64_t kNoiseStream = 0x4015E;

std::string sanitize(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

void SweepConfig::validate() const {
  if (d_list.empty() || k_list.empty() || mi_grid.empty()) {
    throw ConfigError("sweep: d_list, k_list and mi_grid must be non-empty");
  }
  if (n_samples < 1 || n_slices < 1 || n_runs < 1) {
    throw ConfigError("sweep: n_samples, n_slices and n_runs must be >= 1");
  }
  if (neighbors < 1) throw ConfigError("sweep: neighbors must be >= 1");
  if (n_samples <= neighbors + 1) throw ConfigError("sweep: n_samples must exceed neighbors + 1");
  for (auto d : d_list) {
    if (d < 1) throw ConfigError("sweep: every d must be >= 1");
  }
  for (auto k : k_list) {
    if (k < 1) throw ConfigError("sweep: every k must be >= 1");
  }
  for (double m : mi_grid) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("sweep: mi_grid values must be finite and >= 0");
  }
  bool any = false;
  for (auto d : d_list) {
    for (auto k : k_list) any = any || k <= d;
  }
  if (!any) throw ConfigError("sweep: no (d, k) pair with k <= d");
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, int threads) {
  cfg.validate();
  const std::size_t nd = cfg.d_list.size();
  const std::size_t nm = cfg.mi_grid.size();
  const std::size_t nk = cfg.k_list.size();
  const auto runs = static_cast<std::size_t>(cfg.n_runs);

  struct RunOutput {
    std::uint64_t seed = 0;
    std::vector<double> smi;  // per k; NaN where k > d
    std::optional<double> ksg;
    std::string failure;
  };
  std::vector<RunOutput> outputs(nd * nm * runs);
  auto slot = [&](std::size_t di, std::size_t mj, std::size_t r) -> RunOutput& {
    return outputs[(di * nm + mj) * runs + r];
  };

  auto total_mi = [&](std::size_t di, std::size_t mj) {
    const double v = cfg.mi_grid[mj];
    return cfg.mi_grid_scale == GridScale::total ? v : v * static_cast<double>(cfg.d_list[di]);
  };

  parallel_for(outputs.size(), threads, [&](std::size_t task) {
    const std::size_t r = task % runs;
    const std::size_t mj = (task / runs) % nm;
    const std::size_t di = task / (runs * nm);
    const Eigen::Index d = cfg.d_list[di];
    RunOutput& out = slot(di, mj, r);
    const MasterSeed run_seed =
        cfg.seed.child(static_cast<std::uint64_t>(d)).child(mj).child(r);
    out.seed = run_seed.value;
    out.smi.assign(nk, std::numeric_limits<double>::quiet_NaN());

    PairedDataset ds;
    try {
      DistributionSpec spec = DistributionSpec::equal(cfg.family, d, total_mi(di, mj));
      if (cfg.allocation == Allocation::simplex_random && cfg.family != Family::rank_one_normal) {
        Rng alloc = run_seed.child(kAllocationStream).rng();
        spec.per_component_mi = allocate_component_mi(total_mi(di, mj), d, cfg.allocation, alloc);
        spec.allocation = cfg.allocation;
      }
      ds = sample(spec, cfg.n_samples, run_seed.child(kSampleStream));
    } catch (const DomainError& e) {
      out.failure = e.what();
      return;
    }

    KsgConfig ksg;
    ksg.neighbors = cfg.neighbors;
    ksg.jitter_seed = run_seed.value;
    for (std::size_t kj = 0; kj < nk; ++kj) {
      const Eigen::Index k = cfg.k_list[kj];
      if (k > d) continue;
      out.smi[kj] =
          estimate_smi_mc(ds, k, cfg.n_slices, ksg, run_seed.child(kSliceStream + k), 1).mean;
    }
    if (d <= cfg.joint_ksg_max_d) out.ksg = estimate_mi_ksg(ds.x, ds.y, ksg);
  });

  std::vector<SweepRecord> records;
  records.reserve(nd * nk * nm);
  for (std::size_t di = 0; di < nd; ++di) {
    const Eigen::Index d = cfg.d_list[di];
    for (std::size_t kj = 0; kj < nk; ++kj) {
      const Eigen::Index k = cfg.k_list[kj];
      for (std::size_t mj = 0; mj < nm; ++mj) {
        SweepRecord rec;
        rec.family = cfg.family;
        rec.d = d;
        rec.k = k;
        rec.target_total_mi = total_mi(di, mj);
        rec.normalized_mi = rec.target_total_mi / static_cast<double>(d);
        std::vector<double> smi, ksg;
        std::string failure;
        for (std::size_t r = 0; r < runs; ++r) {
          const RunOutput& out = slot(di, mj, r);
          rec.run_seeds.push_back(out.seed);
          if (!out.failure.empty()) failure = out.failure;
          smi.push_back(out.smi[kj]);
          if (out.ksg) ksg.push_back(*out.ksg);
        }
        if (k > d) {
          rec.status = "skipped: k > d";
          rec.smi_mean = rec.smi_std = std::numeric_limits<double>::quiet_NaN();
        } else if (!failure.empty()) {
          rec.status = "infeasible: " + sanitize(failure);
          rec.smi_mean = rec.smi_std = std::numeric_limits<double>::quiet_NaN();
        } else {
          rec.smi_mean = mean(smi);
          rec.smi_std = sample_std(smi);
          if (!ksg.empty()) {
            rec.ksg_mi_mean = mean(ksg);
            rec.ksg_mi_std = sample_std(ksg);
            rec.warning = "joint KSG is an estimate and is biased low in high dimension";
          } else {
            rec.warning = "joint KSG skipped: d above " + std::to_string(cfg.joint_ksg_max_d);
          }
        }
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

DecaySlope fit_decay_slope(const std::vector<double>& d, const std::vector<double>& values) {
  if (d.size() != values.size()) throw DomainError("fit_decay_slope: size mismatch");
  std::set<double> distinct(d.begin(), d.end());
  if (distinct.size() < 3) throw DomainError("fit_decay_slope: need at least three distinct d values");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(values[i] > 0.0) || !(d[i] > 0.0)) {
      throw DomainError("fit_decay_slope: non-positive value " + format_number(values[i]) +
                        " at d = " + format_number(d[i]) + "; cannot take the log");
    }
    lx.push_back(std::log(d[i]));
    ly.push_back(std::log(values[i]));
  }
  const LinearFit fit = fit_line(lx, ly);
  return {fit.slope, fit.slope_stderr, fit.intercept, static_cast<Eigen::Index>(lx.size())};
}

DecaySlope fit_decay_slope(const std::vector<SweepRecord>& records, double min_normalized_mi) {
  std::vector<double> d, v;
  for (const auto& rec : records) {
    if (!rec.ok() || rec.normalized_mi < min_normalized_mi) continue;
    d.push_back(static_cast<double>(rec.d));
    v.push_back(rec.smi_mean);
  }
  return fit_decay_slope(d, v);
}

std::string_view to_string(AwgnBase base) {
  return base == AwgnBase::uniform ? "uniform" : "normal";
}

std::string_view to_string(Normalization normalization) {
  return normalization == Normalization::whitening ? "whitening" : "standardization";
}

AwgnBase parse_awgn_base(std::string_view name) {
  if (name == "uniform") return AwgnBase::uniform;
  if (name == "normal") return AwgnBase::normal;
  throw ConfigError("unknown AWGN base '" + std::string(name) + "' (uniform|normal)");
}

Normalization parse_normalization(std::string_view name) {
  if (name == "whitening") return Normalization::whitening;
  if (name == "standardization") return Normalization::standardization;
  throw ConfigError("unknown normalization '" + std::string(name) +
                    "' (whitening|standardization)");
}

Eigen::MatrixXd AwgnConfig::default_mixing(Eigen::Index d) {
  return 1e-2 * Eigen::MatrixXd::Identity(d, d) + Eigen::MatrixXd::Ones(d, d);
}

void AwgnConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("awgn: sigma must be > 0");
  if (mixing_matrix.rows() < 2 || mixing_matrix.rows() != mixing_matrix.cols()) {
    throw ConfigError("awgn: mixing_matrix must be square with d >= 2");
  }
  if (!mixing_matrix.allFinite()) throw ConfigError("awgn: mixing_matrix has non-finite entries");
  if (n_samples < 3 || n_slices < 1 || n_runs < 1) {
    throw ConfigError("awgn: need n_samples >= 3, n_slices >= 1, n_runs >= 1");
  }
}

AwgnResult run_awgn(const AwgnConfig& cfg, int threads) {
  cfg.validate();
  const Eigen::Index d = cfg.mixing_matrix.rows();
  const Eigen::Index n = cfg.n_samples;
  const auto runs = static_cast<std::size_t>(cfg.n_runs);
  AwgnResult res;
  res.base = cfg.base;
  res.normalization = cfg.normalization;
  res.mi_runs.assign(runs, 0.0);
  res.smi_runs.assign(runs, 0.0);
  res.smi2_runs.assign(runs, 0.0);

  parallel_for(runs, threads, [&](std::size_t r) {
    const MasterSeed run_seed = cfg.seed.child(r);
    Rng base_rng = run_seed.child(kSampleStream).rng();
    Eigen::MatrixXd base(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        base(i, j) = cfg.base == AwgnBase::uniform ? base_rng.uniform(-1.0, 1.0) : base_rng.normal();
      }
    }
    PairedDataset ds;
    ds.x = base * cfg.mixing_matrix.transpose();
    ds.y = ds.x;
    ds.seed = run_seed;
    const LinearMap map = cfg.normalization == Normalization::whitening ? LinearMap{Whitening{}}
                                                                          : LinearMap{Standardization{}};
    ds = apply_linear(ds, map, Side::x);
    Rng noise = run_seed.child(kNoiseStream).rng();
    ds.y.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) ds.y(i, j) = ds.x(i, j) + cfg.sigma * noise.normal();
    }
    KsgConfig ksg;
    ksg.jitter_seed = run_seed.value;
    res.mi_runs[r] = estimate_mi_ksg(ds.x, ds.y, ksg);
    res.smi_runs[r] = estimate_smi_mc(ds, 1, cfg.n_slices, ksg, run_seed.child(kSliceStream + 1), 1).mean;
    res.smi2_runs[r] = estimate_smi_mc(ds, 2, cfg.n_slices, ksg, run_seed.child(kSliceStream + 2), 1).mean;
  });

  res.mi_mean = mean(res.mi_runs);
  res.mi_std = sample_std(res.mi_runs);
  res.smi_mean = mean(res.smi_runs);
  res.smi_std = sample_std(res.smi_runs);
  res.smi2_mean = mean(res.smi2_runs);
  res.smi2_std = sample_std(res.smi2_runs);
  return res;
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    // Accept TOML-style quoted strings and bracketed lists.
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = trim(value.substr(1, value.size() - 2));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

SweepConfig sweep_config_from(const KeyValues& kv) {
  SweepConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "family") {
      try {
        cfg.family = parse_family(value);
      } catch (const UnsupportedError& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "d_list") {
      cfg.d_list = parse_list<Eigen::Index>(key, value, parse_int);
    } else if (key == "k_list") {
      cfg.k_list = parse_list<Eigen::Index>(key, value, parse_int);
    } else if (key == "mi_grid") {
      cfg.mi_grid = parse_list<double>(key, value, parse_double);
    } else if (key == "mi_grid_scale") {
      if (value == "total") {
        cfg.mi_grid_scale = GridScale::total;
      } else if (value == "per_component") {
        cfg.mi_grid_scale = GridScale::per_component;
      } else {
        throw ConfigError("mi_grid_scale must be total or per_component");
      }
    } else if (key == "n_samples") {
      cfg.n_samples = parse_int(key, value);
    } else if (key == "n_slices") {
      cfg.n_slices = parse_int(key, value);
    } else if (key == "n_runs") {
      cfg.n_runs = parse_int(key, value);
    } else if (key == "allocation") {
      cfg.allocation = parse_allocation(value);
    } else if (key == "seed") {
      cfg.seed = MasterSeed{parse_u64(key, value)};
    } else if (key == "joint_ksg_max_d") {
      cfg.joint_ksg_max_d = parse_int(key, value);
    } else if (key == "neighbors") {
      cfg.neighbors = static_cast<int>(parse_int(key, value));
    } else {
      throw ConfigError("unknown sweep config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

AwgnConfig awgn_config_from(const KeyValues& kv) {
  AwgnConfig cfg;
  bool have_matrix = false;
  for (const auto& [key, value] : kv) {
    if (key == "sigma") {
      cfg.sigma = parse_double(key, value);
    } else if (key == "base") {
      cfg.base = parse_awgn_base(value);
    } else if (key == "normalization") {
      cfg.normalization = parse_normalization(value);
    } else if (key == "n_samples") {
      cfg.n_samples = parse_int(key, value);
    } else if (key == "n_slices") {
      cfg.n_slices = parse_int(key, value);
    } else if (key == "n_runs") {
      cfg.n_runs = parse_int(key, value);
    } else if (key == "seed") {
      cfg.seed = MasterSeed{parse_u64(key, value)};
    } else if (key == "mixing_matrix") {
      const auto rows = split(value, ';');
      std::vector<std::vector<double>> parsed;
      for (const auto& row : rows) parsed.push_back(parse_list<double>(key, row, parse_double));
      const auto d = static_cast<Eigen::Index>(parsed.size());
      cfg.mixing_matrix.resize(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        if (static_cast<Eigen::Index>(parsed[i].size()) != d) throw ConfigError("mixing_matrix must be square");
        for (Eigen::Index j = 0; j < d; ++j) cfg.mixing_matrix(i, j) = parsed[i][j];
      }
      have_matrix = true;
    } else if (key != "d") {
      throw ConfigError("unknown awgn config key '" + key + "'");
    }
  }
  if (auto it = kv.find("d"); it != kv.end()) {
    const auto d = parse_int("d", it->second);
    if (have_matrix && d != cfg.mixing_matrix.rows()) throw ConfigError("awgn: d disagrees with mixing_matrix");
    if (d < 2) throw ConfigError("awgn: d must be >= 2");
    if (!have_matrix) cfg.mixing_matrix = AwgnConfig::default_mixing(d);
  }
  cfg.validate();
  return cfg;
}

KeyValues to_key_values(const SweepConfig& cfg) {
  KeyValues kv;
  kv["family"] = std::string(to_string(cfg.family));
  kv["d_list"] = join(cfg.d_list, ", ", int_text);
  kv["k_list"] = join(cfg.k_list, ", ", int_text);
  kv["mi_grid"] = join(cfg.mi_grid, ", ", double_text);
  kv["mi_grid_scale"] = cfg.mi_grid_scale == GridScale::total ? "total" : "per_component";
  kv["n_samples"] = int_text(cfg.n_samples);
  kv["n_slices"] = int_text(cfg.n_slices);
  kv["n_runs"] = int_text(cfg.n_runs);
  kv["allocation"] = std::string(to_string(cfg.allocation));
  kv["seed"] = u64_text(cfg.seed.value);
  kv["joint_ksg_max_d"] = int_text(cfg.joint_ksg_max_d);
  kv["neighbors"] = std::to_string(cfg.neighbors);
  return kv;
}

KeyValues to_key_values(const AwgnConfig& cfg) {
  KeyValues kv;
  kv["sigma"] = double_text(cfg.sigma);
  kv["base"] = std::string(to_string(cfg.base));
  kv["normalization"] = std::string(to_string(cfg.normalization));
  kv["n_samples"] = int_text(cfg.n_samples);
  kv["n_slices"] = int_text(cfg.n_slices);
  kv["n_runs"] = int_text(cfg.n_runs);
  kv["seed"] = u64_text(cfg.seed.value);
  std::string m;
  for (Eigen::Index i = 0; i < cfg.mixing_matrix.rows(); ++i) {
    if (i) m += "; ";
    for (Eigen::Index j = 0; j < cfg.mixing_matrix.cols(); ++j) {
      if (j) m += ", ";
      m += double_text(cfg.mixing_matrix(i, j));
    }
  }
  kv["mixing_matrix"] = m;
  return kv;
}

namespace {

const char* kSweepHeader =
    "family,d,k,target_total_mi,normalized_mi,smi_mean,smi_std,ksg_mi_mean,ksg_mi_std,run_seeds,"
    "status,warning";

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kSweepHeader << '\n';
  for (const auto& r : records) {
    out << to_string(r.family) << ',' << r.d << ',' << r.k << ',' << format_number(r.target_total_mi) << ','
        << format_number(r.normalized_mi) << ',' << format_number(r.smi_mean) << ','
        << format_number(r.smi_std) << ',' << optional_number(r.ksg_mi_mean) << ','
        << optional_number(r.ksg_mi_std) << ',' << join(r.run_seeds, ";", u64_text) << ','
        << sanitize(r.status) << ',' << sanitize(r.warning) << '\n';
  }
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kSweepHeader) {
    throw ConfigError("sweep CSV: missing or unexpected header");
  }
  std::vector<SweepRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 12) throw ConfigError("sweep CSV line " + std::to_string(line_no) + ": expected 12 fields");
    SweepRecord r;
    try {
      r.family = parse_family(f[0]);
    } catch (const UnsupportedError& e) {
      throw ConfigError(e.what());
    }
    r.d = parse_int("d", f[1]);
    r.k = parse_int("k", f[2]);
    r.target_total_mi = parse_double("target_total_mi", f[3]);
    r.normalized_mi = parse_double("normalized_mi", f[4]);
    r.smi_mean = parse_double("smi_mean", f[5]);
    r.smi_std = parse_double("smi_std", f[6]);
    if (!f[7].empty()) r.ksg_mi_mean = parse_double("ksg_mi_mean", f[7]);
    if (!f[8].empty()) r.ksg_mi_std = parse_double("ksg_mi_std", f[8]);
    if (!f[9].empty()) {
      for (const auto& s : split(f[9], ';')) r.run_seeds.push_back(parse_u64("run_seeds", s));
    }
    r.status = f[10];
    r.warning = f[11];
    records.push_back(std::move(r));
  }
  return records;
}

void write_awgn_csv(std::ostream& out, const std::vector<AwgnResult>& rows) {
  out << "base,normalization,mi_mean,mi_std,smi_mean,smi_std,smi2_mean,smi2_std\n";
  for (const auto& r : rows) {
    out << to_string(r.base) << ',' << to_string(r.normalization) << ',' << format_number(r.mi_mean) << ','
        << format_number(r.mi_std) << ',' << format_number(r.smi_mean) << ',' << format_number(r.smi_std)
        << ',' << format_number(r.smi2_mean) << ',' << format_number(r.smi2_std) << '\n';
  }
}

}  // namespace slicedmi
