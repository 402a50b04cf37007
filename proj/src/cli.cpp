#include "slicedmi/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slicedmi/bench.hpp"
#include "slicedmi/distributions.hpp"
#include "slicedmi/errors.hpp"
#include "slicedmi/haar.hpp"
#include "slicedmi/io.hpp"
#include "slicedmi/ksg.hpp"
#include "slicedmi/sliced.hpp"
#include "slicedmi/specfun.hpp"
#include "slicedmi/stats.hpp"

namespace slicedmi {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "1.0.0";

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  int threads = 1;
};

void add_common(CLI::App* app, Common& c, const std::string& formats, const std::string& default_format) {
  c.format = default_format;
  app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app->add_option("--out", c.out, "Output path (default: stdout)");
  app->add_option("--format", c.format, "Output format: " + formats)
      ->check(CLI::IsMember(CLI::detail::split(formats, '|')))
      ->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

// Opens --out or falls back to the given stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open '" + path + "' for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json key_values_json(const KeyValues& kv) {
  json j = json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

void write_manifest(const std::string& path, const std::string& command, const json& config, std::uint64_t seed,
                    double wall, const json& stages) {
  if (path.empty()) return;
  json m;
  m["tool"] = "smi";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = config;
  m["wall_time_s"] = wall;
  m["stages_s"] = stages;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open manifest '" + path + "'");
  f << m.dump(2) << '\n';
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw ConfigError("not a number list: '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_key_values(in);
}

// ---- analytic -------------------------------------------------------------

struct AnalyticArgs {
  Common common;
  Eigen::Index d = 0;
  Eigen::Index k = 1;
  double rho = 0.0;
  bool rho_sq_limit = false;
  Eigen::Index n_mc = 100000;
  std::string canonical;
};

void emit_value(std::ostream& out, const std::string& format, const std::string& quantity,
                const std::vector<std::pair<std::string, std::string>>& fields, double value,
                std::optional<double> std_error = std::nullopt) {
  if (format == "text") {
    out << format_number(value) << '\n';
    return;
  }
  if (format == "csv") {
    out << "quantity";
    for (const auto& f : fields) out << ',' << f.first;
    out << ",value" << (std_error ? ",std_error" : "") << '\n';
    out << quantity;
    for (const auto& f : fields) out << ',' << f.second;
    out << ',' << format_number(value);
    if (std_error) out << ',' << format_number(*std_error);
    out << '\n';
    return;
  }
  json j;
  j["quantity"] = quantity;
  for (const auto& f : fields) j[f.first] = f.second;
  j["value"] = value;
  if (std_error) j["std_error"] = *std_error;
  out << j.dump(2) << '\n';
}

GaussianSpec analytic_spec(const AnalyticArgs& a) {
  if (!a.canonical.empty()) {
    const auto rhos = parse_double_list(a.canonical);
    const auto n = static_cast<Eigen::Index>(rhos.size());
    GaussianSpec s = GaussianSpec::isotropic(n, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) s.sigma_xy(i, i) = rhos[static_cast<std::size_t>(i)];
    return s;
  }
  if (a.d < 1) throw ConfigError("--d is required (or --canonical)");
  return GaussianSpec::isotropic(a.d, a.rho);
}

// ---- validate ---------------------------------------------------------------

struct ValidateArgs {
  Common common;
  std::string d_list = "2,4,16";
  Eigen::Index n_draws = 100000;
  double ks_threshold = 0.01;
};

int run_validate(const ValidateArgs& a, std::ostream& stdout_stream) {
  std::vector<Eigen::Index> ds;
  for (double v : parse_double_list(a.d_list)) {
    if (v < 2 || v != std::floor(v)) throw ConfigError("validate: every d must be an integer >= 2");
    ds.push_back(static_cast<Eigen::Index>(v));
  }
  if (a.n_draws < 10) throw ConfigError("validate: --n-draws must be >= 10");
  struct Row {
    std::string check;
    Eigen::Index d, k;
    double statistic, threshold;
    bool pass;
  };
  std::vector<Row> rows;
  const MasterSeed master{a.common.seed};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Eigen::Index d = ds[i];
    Rng rng = master.child(i).rng();
    std::vector<double> draws(static_cast<std::size_t>(a.n_draws));
    for (auto& v : draws) v = squared_inner_product_sample(d, rng);
    const double b = 0.5 * static_cast<double>(d - 1);
    const double ks = ks_statistic(draws, [b](double x) { return beta_cdf(x, 0.5, b); });
    rows.push_back({"beta_law_ks", d, 1, ks, a.ks_threshold, ks < a.ks_threshold});

    Rng srng = master.child(1000 + i).rng();
    double worst = 0.0;
    for (Eigen::Index k = 1; k <= d; ++k) {
      for (int rep = 0; rep < 20; ++rep) {
        worst = std::max(worst, orthonormality_defect(sample_stiefel(d, k, srng).matrix()));
      }
    }
    rows.push_back({"stiefel_orthonormality", d, d, worst, 1e-12, worst < 1e-12});
  }
  bool all = true;
  Sink sink(a.common.out, stdout_stream);
  std::ostream& out = sink.get();
  if (a.common.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"check", r.check}, {"d", r.d}, {"k", r.k}, {"statistic", r.statistic},
                     {"threshold", r.threshold}, {"pass", r.pass}});
    }
    out << arr.dump(2) << '\n';
  } else {
    out << "check,d,k,statistic,threshold,pass\n";
    for (const auto& r : rows) {
      out << r.check << ',' << r.d << ',' << r.k << ',' << format_number(r.statistic) << ','
          << format_number(r.threshold) << ',' << (r.pass ? "true" : "false") << '\n';
    }
  }
  for (const auto& r : rows) all = all && r.pass;
  return all ? 0 : 2;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sliced mutual information toolkit"};
  app.name("smi");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // generate
  struct {
    Common common;
    std::string family = "correlated_normal";
    Eigen::Index d = 1;
    double mi = 0.0;
    Eigen::Index n = 10000;
    std::string allocation = "equal";
  } gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic paired dataset as CSV");
  add_common(generate, gen.common, "csv", "csv");
  generate->add_option("--family", gen.family, "Distribution family")->capture_default_str();
  generate->add_option("--d", gen.d, "Components per side")->capture_default_str();
  generate->add_option("--mi", gen.mi, "Total ground-truth MI in nats")->capture_default_str();
  generate->add_option("--n", gen.n, "Sample count")->capture_default_str();
  generate->add_option("--allocation", gen.allocation, "equal | simplex_random")->capture_default_str();

  // estimate
  struct {
    Common common;
    std::string input;
    std::string x_cols, y_cols;
    Eigen::Index k = 1;
    Eigen::Index n_slices = 128;
    std::string method = "smi";
    int neighbors = 1;
  } est;
  auto* estimate = app.add_subcommand("estimate", "MI or k-SMI of two column groups of a CSV file");
  add_common(estimate, est.common, "csv|json", "csv");
  estimate->add_option("--input", est.input, "CSV with a header row")->required();
  estimate->add_option("--x-cols", est.x_cols, "Columns of X, e.g. 0,1 or 0-4")->required();
  estimate->add_option("--y-cols", est.y_cols, "Columns of Y")->required();
  estimate->add_option("--k", est.k, "Slice dimension")->capture_default_str();
  estimate->add_option("--n-slices", est.n_slices, "Projection pairs")->capture_default_str();
  estimate->add_option("--method", est.method, "smi | ksg")
      ->check(CLI::IsMember({"smi", "ksg"}))
      ->capture_default_str();
  estimate->add_option("--neighbors", est.neighbors, "KSG neighbours")->capture_default_str();

  // analytic
  auto* analytic = app.add_subcommand("analytic", "Closed-form Gaussian quantities");
  analytic->require_subcommand(1);
  AnalyticArgs si_args, ksmi_args, msmi_args, mi_args;
  auto* si = analytic->add_subcommand("si", "Sliced MI of the isotropic Gaussian pair");
  add_common(si, si_args.common, "text|csv|json", "text");
  si->add_option("--d", si_args.d, "Dimension")->required();
  auto* si_rho = si->add_option("--rho", si_args.rho, "Correlation per component");
  si->add_flag("--rho-sq-limit", si_args.rho_sq_limit, "Saturation value as rho^2 -> 1")->excludes(si_rho);
  auto* ksmi = analytic->add_subcommand("ksmi", "k-SMI of the isotropic Gaussian pair (Jacobi average)");
  add_common(ksmi, ksmi_args.common, "text|csv|json", "text");
  ksmi->add_option("--d", ksmi_args.d, "Dimension")->required();
  ksmi->add_option("--k", ksmi_args.k, "Slice dimension")->required();
  ksmi->add_option("--rho", ksmi_args.rho, "Correlation per component")->required();
  ksmi->add_option("--n-mc", ksmi_args.n_mc, "Eigenvalue draws")->capture_default_str();
  auto* msmi = analytic->add_subcommand("msmi", "Max-sliced MI of a Gaussian pair");
  add_common(msmi, msmi_args.common, "text|csv|json", "text");
  msmi->add_option("--d", msmi_args.d, "Dimension (isotropic pair)");
  msmi->add_option("--rho", msmi_args.rho, "Correlation per component");
  msmi->add_option("--canonical", msmi_args.canonical, "Comma-separated canonical correlations");
  msmi->add_option("--k", msmi_args.k, "Slice dimension")->required();
  auto* mi = analytic->add_subcommand("mi", "MI of a Gaussian pair");
  add_common(mi, mi_args.common, "text|csv|json", "text");
  mi->add_option("--d", mi_args.d, "Dimension (isotropic pair)");
  mi->add_option("--rho", mi_args.rho, "Correlation per component");
  mi->add_option("--canonical", mi_args.canonical, "Comma-separated canonical correlations");

  // sweep
  struct {
    Common common;
    std::string config;
    std::string manifest;
  } sw;
  auto* sweep = app.add_subcommand("sweep", "Saturation sweep over (d, k, MI)");
  add_common(sweep, sw.common, "csv|json", "csv");
  sweep->add_option("--config", sw.config, "key = value config file")->required();
  sweep->add_option("--manifest", sw.manifest, "JSON run manifest (default: <out>.manifest.json)");

  // awgn
  struct {
    Common common;
    std::string config;
    std::string manifest;
    std::string base;
    std::string normalization;
    std::optional<double> sigma;
    std::optional<Eigen::Index> d, n_samples, n_slices, n_runs;
  } aw;
  auto* awgn = app.add_subcommand("awgn", "Additive white Gaussian noise channel table");
  add_common(awgn, aw.common, "csv|json", "csv");
  awgn->add_option("--config", aw.config, "key = value config file");
  awgn->add_option("--manifest", aw.manifest, "JSON run manifest (default: <out>.manifest.json)");
  awgn->add_option("--base", aw.base, "uniform | normal | both")->check(CLI::IsMember({"uniform", "normal", "both"}));
  awgn->add_option("--normalization", aw.normalization, "whitening | standardization | both")
      ->check(CLI::IsMember({"whitening", "standardization", "both"}));
  awgn->add_option("--sigma", aw.sigma, "Noise standard deviation");
  awgn->add_option("--d", aw.d, "Dimension for the default mixing matrix");
  awgn->add_option("--n-samples", aw.n_samples, "Samples per run");
  awgn->add_option("--n-slices", aw.n_slices, "Projection pairs per estimate");
  awgn->add_option("--n-runs", aw.n_runs, "Independent runs");

  // validate
  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Statistical self-checks of the Haar samplers");
  add_common(validate, val.common, "csv|json", "csv");
  validate->add_option("--d-list", val.d_list, "Dimensions")->capture_default_str();
  validate->add_option("--n-draws", val.n_draws, "Draws per dimension")->capture_default_str();

  // decay-fit
  struct {
    Common common;
    std::string input;
    std::string limits;
    double min_normalized_mi = 2.0;
  } df;
  auto* decay = app.add_subcommand("decay-fit", "Log-log slope of saturated SMI against d");
  add_common(decay, df.common, "csv|json", "csv");
  auto* df_input = decay->add_option("--input", df.input, "Sweep CSV");
  decay->add_option("--limits", df.limits, "Fit the exact saturation values at these d instead")->excludes(df_input);
  decay->add_option("--min-normalized-mi", df.min_normalized_mi, "Saturation threshold in nats per component")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run 'smi --help' for usage\n";
    return 1;
  }

  try {
    const auto t0 = Clock::now();
    if (*generate) {
      const DistributionSpec spec = [&] {
        DistributionSpec s = DistributionSpec::equal(parse_family(gen.family), gen.d, gen.mi);
        const Allocation alloc = parse_allocation(gen.allocation);
        if (alloc == Allocation::simplex_random && s.family != Family::rank_one_normal) {
          Rng rng = MasterSeed{gen.common.seed}.child(1).rng();
          s.per_component_mi = allocate_component_mi(gen.mi, gen.d, alloc, rng);
          s.allocation = alloc;
        }
        return s;
      }();
      if (gen.n < 1) throw ConfigError("--n must be >= 1");
      const PairedDataset ds = sample(spec, gen.n, MasterSeed{gen.common.seed});
      Sink sink(gen.common.out, out);
      write_dataset_csv(sink.get(), ds);
      if (!gen.common.out.empty()) {
        // Ground truth next to the data, in the config-file format.
        std::ofstream meta(gen.common.out + ".meta");
        std::string mi_list;
        for (Eigen::Index j = 0; j < spec.per_component_mi.size(); ++j) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.17g", spec.per_component_mi(j));
          mi_list += (j ? ", " : "") + std::string(buf);
        }
        meta << "family = " << to_string(spec.family) << "\n"
             << "d = " << spec.d << "\n"
             << "per_component_mi = " << mi_list << "\n"
             << "ground_truth_mi = " << format_number(ground_truth_mi(spec)) << "\n"
             << "n = " << gen.n << "\n"
             << "seed = " << gen.common.seed << "\n";
      }
      return 0;
    }

    if (*estimate) {
      const NumericTable table = read_numeric_csv_file(est.input);
      const Eigen::MatrixXd x = select_columns(table, parse_column_list(est.x_cols));
      const Eigen::MatrixXd y = select_columns(table, parse_column_list(est.y_cols));
      KsgConfig cfg;
      cfg.neighbors = est.neighbors;
      cfg.jitter_seed = est.common.seed;
      cfg.threads = est.common.threads;
      double value = 0.0;
      std::optional<double> se;
      if (est.method == "ksg") {
        value = estimate_mi_ksg(x, y, cfg);
      } else {
        cfg.threads = 1;
        const SliceEstimate e =
            estimate_smi_mc(x, y, est.k, est.n_slices, cfg, MasterSeed{est.common.seed}, est.common.threads);
        value = e.mean;
        se = e.std_error();
      }
      Sink sink(est.common.out, out);
      const std::vector<std::pair<std::string, std::string>> fields = {
          {"method", est.method},
          {"k", est.method == "ksg" ? "" : std::to_string(est.k)},
          {"n_slices", est.method == "ksg" ? "" : std::to_string(est.n_slices)},
          {"n", std::to_string(x.rows())}};
      emit_value(sink.get(), est.common.format, "estimate", fields, value, se);
      return 0;
    }

    if (*analytic) {
      if (*si) {
        Sink sink(si_args.common.out, out);
        if (si_args.rho_sq_limit) {
          emit_value(sink.get(), si_args.common.format, "si_saturation_limit",
                     {{"d", std::to_string(si_args.d)}}, si_saturation_limit(si_args.d));
        } else {
          const AnalyticSi v = analytic_si_gaussian_detail(si_args.d, si_args.rho);
          emit_value(sink.get(), si_args.common.format, "si",
                     {{"d", std::to_string(si_args.d)},
                      {"rho", format_number(si_args.rho)},
                      {"path", v.path == SiPath::series ? "series" : "quadrature"}},
                     v.value);
        }
      } else if (*ksmi) {
        const MonteCarloValue v = analytic_ksmi_gaussian(ksmi_args.d, ksmi_args.k, ksmi_args.rho, ksmi_args.n_mc,
                                                         MasterSeed{ksmi_args.common.seed});
        Sink sink(ksmi_args.common.out, out);
        emit_value(sink.get(), ksmi_args.common.format, "ksmi",
                   {{"d", std::to_string(ksmi_args.d)},
                    {"k", std::to_string(ksmi_args.k)},
                    {"rho", format_number(ksmi_args.rho)},
                    {"n_mc", std::to_string(ksmi_args.n_mc)}},
                   v.value, v.std_error);
      } else if (*msmi) {
        const double v = msmi_gaussian(analytic_spec(msmi_args), msmi_args.k);
        Sink sink(msmi_args.common.out, out);
        emit_value(sink.get(), msmi_args.common.format, "msmi", {{"k", std::to_string(msmi_args.k)}}, v);
      } else if (*mi) {
        const double v = gaussian_mi(analytic_spec(mi_args));
        Sink sink(mi_args.common.out, out);
        emit_value(sink.get(), mi_args.common.format, "mi", {}, v);
      }
      return 0;
    }

    if (*sweep) {
      KeyValues kv = read_config_file(sw.config);
      if (sweep->count("--seed")) kv["seed"] = std::to_string(sw.common.seed);
      const SweepConfig cfg = sweep_config_from(kv);
      const auto t_run = Clock::now();
      const auto records = run_sweep(cfg, sw.common.threads);
      const double run_time = seconds_since(t_run);
      const auto t_write = Clock::now();
      {
        Sink sink(sw.common.out, out);
        if (sw.common.format == "json") {
          json arr = json::array();
          for (const auto& r : records) {
            json j;
            j["family"] = to_string(r.family);
            j["d"] = r.d;
            j["k"] = r.k;
            j["target_total_mi"] = r.target_total_mi;
            j["normalized_mi"] = r.normalized_mi;
            j["smi_mean"] = r.ok() ? json(r.smi_mean) : json(nullptr);
            j["smi_std"] = r.ok() ? json(r.smi_std) : json(nullptr);
            j["ksg_mi_mean"] = r.ksg_mi_mean ? json(*r.ksg_mi_mean) : json(nullptr);
            j["ksg_mi_std"] = r.ksg_mi_std ? json(*r.ksg_mi_std) : json(nullptr);
            j["run_seeds"] = r.run_seeds;
            j["status"] = r.status;
            j["warning"] = r.warning;
            arr.push_back(std::move(j));
          }
          sink.get() << arr.dump(2) << '\n';
        } else {
          write_sweep_csv(sink.get(), records);
        }
      }
      const std::string manifest =
          !sw.manifest.empty() ? sw.manifest : (sw.common.out.empty() ? "" : sw.common.out + ".manifest.json");
      json stages;
      stages["sweep"] = run_time;
      stages["write"] = seconds_since(t_write);
      json config = key_values_json(to_key_values(cfg));
      config["threads"] = sw.common.threads;
      write_manifest(manifest, "sweep", config, cfg.seed.value, seconds_since(t0), stages);
      return 0;
    }

    if (*awgn) {
      KeyValues kv;
      if (!aw.config.empty()) kv = read_config_file(aw.config);
      std::vector<AwgnBase> bases;
      std::vector<Normalization> norms;
      const std::string base_choice = !aw.base.empty() ? aw.base : (kv.count("base") ? kv["base"] : "both");
      const std::string norm_choice =
          !aw.normalization.empty() ? aw.normalization : (kv.count("normalization") ? kv["normalization"] : "both");
      kv.erase("base");
      kv.erase("normalization");
      if (awgn->count("--seed")) kv["seed"] = std::to_string(aw.common.seed);
      if (aw.sigma) kv["sigma"] = std::to_string(*aw.sigma);
      if (aw.d) kv["d"] = std::to_string(*aw.d);
      if (aw.n_samples) kv["n_samples"] = std::to_string(*aw.n_samples);
      if (aw.n_slices) kv["n_slices"] = std::to_string(*aw.n_slices);
      if (aw.n_runs) kv["n_runs"] = std::to_string(*aw.n_runs);
      if (base_choice == "both") {
        bases = {AwgnBase::uniform, AwgnBase::normal};
      } else {
        bases = {parse_awgn_base(base_choice)};
      }
      if (norm_choice == "both") {
        norms = {Normalization::whitening, Normalization::standardization};
      } else {
        norms = {parse_normalization(norm_choice)};
      }
      const AwgnConfig base_cfg = awgn_config_from(kv);
      std::vector<AwgnResult> rows;
      json stages = json::object();
      for (AwgnBase b : bases) {
        for (Normalization nm : norms) {
          AwgnConfig c = base_cfg;
          c.base = b;
          c.normalization = nm;
          const auto ts = Clock::now();
          rows.push_back(run_awgn(c, aw.common.threads));
          stages[std::string(to_string(b)) + "/" + std::string(to_string(nm))] = seconds_since(ts);
        }
      }
      {
        Sink sink(aw.common.out, out);
        if (aw.common.format == "json") {
          json arr = json::array();
          for (const auto& r : rows) {
            arr.push_back({{"base", to_string(r.base)},
                           {"normalization", to_string(r.normalization)},
                           {"mi_mean", r.mi_mean},
                           {"mi_std", r.mi_std},
                           {"smi_mean", r.smi_mean},
                           {"smi_std", r.smi_std},
                           {"smi2_mean", r.smi2_mean},
                           {"smi2_std", r.smi2_std}});
          }
          sink.get() << arr.dump(2) << '\n';
        } else {
          write_awgn_csv(sink.get(), rows);
        }
      }
      const std::string manifest =
          !aw.manifest.empty() ? aw.manifest : (aw.common.out.empty() ? "" : aw.common.out + ".manifest.json");
      json config = key_values_json(to_key_values(base_cfg));
      config.erase("base");
      config.erase("normalization");
      config["bases"] = base_choice;
      config["normalizations"] = norm_choice;
      config["normalization_moments"] = "sample";
      config["threads"] = aw.common.threads;
      write_manifest(manifest, "awgn", config, base_cfg.seed.value, seconds_since(t0), stages);
      return 0;
    }

    if (*validate) return run_validate(val, out);

    if (*decay) {
      DecaySlope fit;
      if (!df.limits.empty()) {
        std::vector<double> d = parse_double_list(df.limits), v;
        for (double di : d) {
          if (di < 2 || di != std::floor(di)) throw ConfigError("--limits: d must be integers >= 2");
          v.push_back(si_saturation_limit(static_cast<Eigen::Index>(di)));
        }
        fit = fit_decay_slope(d, v);
      } else {
        if (df.input.empty()) throw ConfigError("decay-fit needs --input or --limits");
        std::ifstream in(df.input);
        if (!in) throw ConfigError("cannot open '" + df.input + "'");
        fit = fit_decay_slope(read_sweep_csv(in), df.min_normalized_mi);
      }
      Sink sink(df.common.out, out);
      if (df.common.format == "json") {
        json j{{"slope", fit.slope},
               {"slope_stderr", fit.slope_stderr},
               {"intercept", fit.intercept},
               {"n_points", fit.n_points}};
        sink.get() << j.dump(2) << '\n';
      } else {
        sink.get() << "slope,slope_stderr,intercept,n_points\n"
                   << format_number(fit.slope) << ',' << format_number(fit.slope_stderr) << ','
                   << format_number(fit.intercept) << ',' << fit.n_points << '\n';
      }
      return 0;
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace slicedmi
