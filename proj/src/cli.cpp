#include "specnet/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <tuple>

#include "CLI11.hpp"
#include "specnet/evaluation.hpp"
#include "specnet/io.hpp"
#include "specnet/sampler.hpp"
#include "specnet/simulator.hpp"

namespace fs = std::filesystem;

namespace specnet::cli {
namespace {

// "12/12, 6/18" -> {(12,12), (6,18)}
std::vector<std::pair<double, double>> parse_photoperiods(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  for (const auto& cell : split_csv_line(text)) {
    const std::string item = Config::trim(cell);
    if (item.empty()) continue;
    const auto slash = item.find('/');
    if (slash == std::string::npos)
      throw DataError("photoperiod '" + item + "' must be on/off, e.g. 12/12");
    out.emplace_back(parse_number(Config::trim(item.substr(0, slash))),
                     parse_number(Config::trim(item.substr(slash + 1))));
  }
  if (out.empty()) throw DataError("no photoperiods given");
  return out;
}

// Semicolon-separated replicate variants, comma-separated gene names inside;
// an empty segment is the wildtype. "; G1; G2,G3" -> {{}, {G1}, {G2,G3}}.
std::vector<std::vector<std::string>> parse_knockout_groups(const std::string& text) {
  std::vector<std::vector<std::string>> groups;
  std::string segment;
  std::stringstream ss(text);
  bool saw_any = false;
  while (std::getline(ss, segment, ';')) {
    saw_any = true;
    std::vector<std::string> names;
    for (const auto& cell : split_csv_line(segment)) {
      const std::string name = Config::trim(cell);
      if (!name.empty()) names.push_back(name);
    }
    groups.push_back(std::move(names));
  }
  if (!saw_any) groups.push_back({});
  return groups;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw DataError("cannot create output directory: " + dir.string());
}

void write_table(const fs::path& path, const Matrix<double>& values,
                 const std::vector<std::string>& row_names,
                 const std::vector<std::string>& col_names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "gene";
  for (const auto& c : col_names) out << ',' << c;
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    out << row_names[static_cast<std::size_t>(i)];
    for (Index j = 0; j < values.cols(); ++j) out << ',' << format_number(values(i, j));
    out << '\n';
  }
}

void write_trace(const fs::path& path, const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "iteration,value\n";
  for (std::size_t t = 0; t < trace.size(); ++t)
    out << t << ',' << format_number(trace[t]) << '\n';
}

}  // namespace

void cmd_simulate(const fs::path& config_path, const fs::path& out_dir,
                  std::optional<long> seed_override) {
  if (!fs::exists(config_path))
    throw DataError("config file not found: " + config_path.string());
  Config cfg = Config::load(config_path);

  const long n_genes = cfg.take_integer("genes", 0);
  if (n_genes < 2) throw DataError("config must set genes >= 2");
  const double density = cfg.take_number("edge_density", 0.25);
  const auto decay_range = cfg.take_pair("decay_range", {0.2, 0.6});
  const auto weight_range = cfg.take_pair("weight_range", {0.2, 0.8});
  const auto photoperiods = parse_photoperiods(cfg.take("photoperiods").value_or("12/12"));
  const auto knockout_groups = parse_knockout_groups(cfg.take("knockouts").value_or(""));
  const long n_cycles = cfg.take_integer("cycles", 1);
  const long samples = cfg.take_integer("samples", 28);
  long seed = cfg.take_integer("seed", 0);
  const double snr = cfg.take_number("snr", 0.0);
  const bool with_similarity = cfg.take_flag("similarity", false);
  const auto similarity_range = cfg.take_pair("similarity_range", {0.1, 0.6});
  cfg.reject_unknown();
  if (seed_override) seed = *seed_override;
  if (seed < 0) throw DataError("seed must be non-negative");

  ensure_dir(out_dir);
  auto gt = generate_network<double>(n_genes, density, decay_range, weight_range,
                                     static_cast<std::uint64_t>(seed));
  std::vector<std::string> gene_names;
  for (long i = 0; i < n_genes; ++i) gene_names.push_back("G" + std::to_string(i + 1));

  auto resolve = [&](const std::vector<std::string>& names) {
    std::vector<Index> idx;
    for (const auto& name : names) {
      const auto it = std::find(gene_names.begin(), gene_names.end(), name);
      if (it == gene_names.end()) throw DataError("unknown knockout gene: " + name);
      idx.push_back(static_cast<Index>(it - gene_names.begin()));
    }
    return idx;
  };

  // Replicates are the cartesian product of photoperiods and knockout variants,
  // photoperiod-major, numbered from 0.
  long k = 0;
  for (const auto& pp : photoperiods) {
    for (const auto& group : knockout_groups) {
      auto ts = simulate(gt, pp, n_cycles, samples, resolve(group));
      if (snr > 0.0) ts = add_noise(ts, snr, static_cast<std::uint64_t>(seed + 100 + k));
      Vector<double> time(ts.n_samples());
      for (Index t = 0; t < time.size(); ++t) time[t] = static_cast<double>(t) * ts.dt;
      write_series(out_dir / ("expr_" + std::to_string(k) + ".csv"), time, ts.replicates[0],
                   ts.gene_names);
      write_series(out_dir / ("inputs_" + std::to_string(k) + ".csv"), time, ts.inputs[0],
                   ts.input_names);
      gt.photoperiods.push_back(pp);
      gt.knockout_lists.push_back(resolve(group));
      ++k;
    }
  }

  write_named_matrix(out_dir / "truth.csv", gt.H_true, gene_names);
  if (with_similarity) {
    auto sim = simulate_similarity<double>(gt.H_true, similarity_range.first,
                                           similarity_range.second,
                                           static_cast<std::uint64_t>(seed + 7919));
    write_named_matrix(out_dir / "similarity.csv", sim.S, gene_names);
  }

  // Resolved configuration, written back so the run can be reproduced exactly.
  {
    std::ofstream out(out_dir / "config_used.cfg");
    if (!out) throw DataError("cannot write " + (out_dir / "config_used.cfg").string());
    out << "genes = " << n_genes << '\n'
        << "edge_density = " << format_number(density) << '\n'
        << "decay_range = " << format_number(decay_range.first) << ", "
        << format_number(decay_range.second) << '\n'
        << "weight_range = " << format_number(weight_range.first) << ", "
        << format_number(weight_range.second) << '\n';
    out << "photoperiods = ";
    for (std::size_t p = 0; p < photoperiods.size(); ++p) {
      if (p) out << ", ";
      out << format_number(photoperiods[p].first) << '/' << format_number(photoperiods[p].second);
    }
    out << '\n' << "knockouts = ";
    for (std::size_t g = 0; g < knockout_groups.size(); ++g) {
      if (g) out << "; ";
      out << join(knockout_groups[g], ", ");
    }
    out << '\n'
        << "cycles = " << n_cycles << '\n'
        << "samples = " << samples << '\n'
        << "seed = " << seed << '\n'
        << "snr = " << format_number(snr) << '\n'
        << "similarity = " << (with_similarity ? "true" : "false") << '\n';
    if (with_similarity)
      out << "similarity_range = " << format_number(similarity_range.first) << ", "
          << format_number(similarity_range.second) << '\n';
  }
  std::cout << "simulated " << k << " replicates into " << out_dir.string() << " (seed " << seed
            << ")\n";
}

namespace {

TimeSeriesSet<double> load_data_dir(const fs::path& data_dir) {
  TimeSeriesSet<double> ts;
  bool have_inputs = false;
  for (long k = 0;; ++k) {
    const fs::path expr = data_dir / ("expr_" + std::to_string(k) + ".csv");
    if (!fs::exists(expr)) {
      if (k == 0) throw DataError("no expr_0.csv in " + data_dir.string());
      break;
    }
    SeriesFile sf = read_series(expr);
    if (k == 0) {
      ts.gene_names = sf.names;
    } else if (sf.names != ts.gene_names) {
      throw DataError("gene header mismatch: expr_0.csv has '" + join(ts.gene_names, ",") +
                      "' but " + expr.filename().string() + " has '" + join(sf.names, ",") + "'");
    }
    const Index m = sf.time.size();
    if (m < 3) throw DataError("need at least 3 samples in " + expr.string());
    const double dt = sf.time[1] - sf.time[0];
    if (!(dt > 0)) throw DataError("time column must increase in " + expr.string());
    for (Index t = 1; t < m; ++t)
      if (std::abs(sf.time[t] - sf.time[t - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
        throw DataError("time column is not uniformly spaced in " + expr.string());
    if (k == 0)
      ts.dt = dt;
    else if (std::abs(dt - ts.dt) > 1e-9 * std::max(1.0, std::abs(ts.dt)))
      throw DataError("replicates disagree on sampling interval (" + expr.string() + ")");

    const fs::path inp = data_dir / ("inputs_" + std::to_string(k) + ".csv");
    if (k == 0) have_inputs = fs::exists(inp);
    if (fs::exists(inp) != have_inputs)
      throw DataError("inputs files must be present for all replicates or none");
    if (have_inputs) {
      SeriesFile in = read_series(inp);
      if (k == 0)
        ts.input_names = in.names;
      else if (in.names != ts.input_names)
        throw DataError("input header mismatch in " + inp.filename().string());
      if (in.values.rows() != m)
        throw DataError("inputs and expression disagree on sample count for replicate " +
                        std::to_string(k));
      ts.inputs.push_back(std::move(in.values));
    } else {
      ts.inputs.emplace_back(m, 0);
    }
    ts.replicates.push_back(std::move(sf.values));
  }
  ts.validate();
  return ts;
}

}  // namespace

void cmd_infer(const fs::path& data_dir, const std::optional<fs::path>& config_path,
               const fs::path& out_dir, const InferOverrides& overrides) {
  TimeSeriesSet<double> ts = load_data_dir(data_dir);
  const Index n = ts.n_genes();

  Hyperparameters<double> hyper;
  ChainConfig chain;
  if (config_path) {
    if (!fs::exists(*config_path))
      throw DataError("config file not found: " + config_path->string());
    Config cfg = Config::load(*config_path);
    hyper.a_w = cfg.take_pair("a_w", hyper.a_w);
    hyper.b_tau = cfg.take_pair("b_tau", hyper.b_tau);
    hyper.c_sigma = cfg.take_pair("c_sigma", hyper.c_sigma);
    hyper.d_seq = cfg.take_pair("d_seq", hyper.d_seq);
    hyper.v0 = cfg.take_number("v0", hyper.v0);
    chain.n_samples = cfg.take_integer("samples", chain.n_samples);
    chain.burn_in = cfg.take_integer("burn_in", chain.burn_in);
    chain.n_average = cfg.take_integer("average", chain.n_average);
    chain.seed = static_cast<std::uint64_t>(cfg.take_integer("seed", 0));
    chain.random_scan = cfg.take_flag("random_scan", chain.random_scan);
    cfg.reject_unknown();
  }
  if (overrides.seed) chain.seed = static_cast<std::uint64_t>(*overrides.seed);
  if (overrides.n_samples) chain.n_samples = *overrides.n_samples;
  if (overrides.burn_in) chain.burn_in = *overrides.burn_in;
  if (overrides.n_average) chain.n_average = *overrides.n_average;

  std::optional<SimilarityData<double>> sim;
  const fs::path sim_path = data_dir / "similarity.csv";
  if (!overrides.no_similarity && fs::exists(sim_path)) {
    NamedMatrix nm = read_named_matrix(sim_path);
    if (nm.names != ts.gene_names)
      throw DataError("similarity gene set does not match the expression files");
    sim = SimilarityData<double>::from_matrix(nm.values);
  }
  chain.use_similarity = sim.has_value();

  SpectralSet<double> spectral = build_spectral_set(ts);
  auto [summary, trace] = run_chain(spectral, hyper, chain, sim);

  ensure_dir(out_dir);
  write_named_matrix(out_dir / "edge_prob.csv", summary.edge_prob, ts.gene_names);

  // Ranked regulator -> target list, descending probability, lexicographic ties.
  {
    std::vector<std::tuple<double, Index, Index>> items;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) items.emplace_back(summary.edge_prob(i, j), j, i);  // (prob, reg, tgt)
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });
    std::ofstream out(out_dir / "edges.tsv");
    if (!out) throw DataError("cannot write " + (out_dir / "edges.tsv").string());
    out << "regulator\ttarget\tprobability\n";
    for (const auto& [p, reg, tgt] : items)
      out << ts.gene_names[static_cast<std::size_t>(reg)] << '\t'
          << ts.gene_names[static_cast<std::size_t>(tgt)] << '\t' << format_number(p) << '\n';
  }

  const Index p_in = ts.n_inputs();
  Matrix<double> a_mean = summary.B_mean.topRows(n).transpose();
  write_named_matrix(out_dir / "A_mean.csv", a_mean, ts.gene_names);
  Matrix<double> c_mean = summary.B_mean.middleRows(n, p_in + 1).transpose();
  std::vector<std::string> c_cols = ts.input_names;
  c_cols.push_back("basal");
  write_table(out_dir / "C_mean.csv", c_mean, ts.gene_names, c_cols);

  write_trace(out_dir / "trace_w.csv", trace.w);
  write_trace(out_dir / "trace_sigma_D.csv", trace.sigma_D);
  if (chain.use_similarity) write_trace(out_dir / "trace_sigma_seq.csv", trace.sigma_seq);

  write_named_matrix(out_dir / "geweke_edges.csv", summary.geweke_edges, ts.gene_names);
  {
    Index below = 0, total = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        ++total;
        if (std::abs(summary.geweke_edges(i, j)) < 3.0) ++below;
      }
    std::ofstream out(out_dir / "diagnostics.txt");
    if (!out) throw DataError("cannot write " + (out_dir / "diagnostics.txt").string());
    out << "averaged_samples " << summary.averaged_samples << '\n'
        << "geweke_w " << format_number(summary.geweke_w) << '\n'
        << "geweke_sigma_D " << format_number(summary.geweke_sigma_D) << '\n';
    if (chain.use_similarity)
      out << "geweke_sigma_seq " << format_number(summary.geweke_sigma_seq) << '\n';
    out << "fraction_edge_abs_z_below_3 "
        << format_number(static_cast<double>(below) / static_cast<double>(total)) << '\n';
  }
  std::cout << "inference finished: " << trace.iterations << " sweeps, averaged "
            << summary.averaged_samples << " samples"
            << (chain.use_similarity ? ", similarity on" : ", similarity off") << '\n';
}

void cmd_eval(const fs::path& pred_path, const fs::path& truth_path, const fs::path& out_dir,
              std::optional<double> threshold) {
  NamedMatrix pred = read_named_matrix(pred_path);
  NamedMatrix truth = read_named_matrix(truth_path);
  if (pred.names != truth.names)
    throw DataError("gene set mismatch: '" + join(pred.names, ",") + "' vs '" +
                    join(truth.names, ",") + "'");
  for (Index i = 0; i < truth.values.rows(); ++i)
    for (Index j = 0; j < truth.values.cols(); ++j)
      if (truth.values(i, j) != 0.0 && truth.values(i, j) != 1.0)
        throw DataError("truth matrix must contain only 0 and 1");

  const auto curve = pr_curve(pred.values, truth.values);
  const double area = aupr(curve);

  ensure_dir(out_dir);
  {
    std::ofstream out(out_dir / "pr_curve.csv");
    if (!out) throw DataError("cannot write " + (out_dir / "pr_curve.csv").string());
    out << "recall,precision\n";
    for (const auto& [r, p] : curve) out << format_number(r) << ',' << format_number(p) << '\n';
  }
  {
    std::ofstream out(out_dir / "aupr.txt");
    if (!out) throw DataError("cannot write " + (out_dir / "aupr.txt").string());
    out << "AUPR " << format_number(area) << '\n';
  }
  if (threshold) {
    auto edges = threshold_network(pred.values, *threshold);
    std::ofstream out(out_dir / "edges_threshold.tsv");
    if (!out) throw DataError("cannot write " + (out_dir / "edges_threshold.tsv").string());
    out << "regulator\ttarget\tprobability\tbidirectional\n";
    for (const auto& e : edges)
      out << pred.names[static_cast<std::size_t>(e.regulator)] << '\t'
          << pred.names[static_cast<std::size_t>(e.target)] << '\t'
          << format_number(e.probability) << '\t' << (e.bidirectional ? 1 : 0) << '\n';
  }
  std::cout << "AUPR " << format_number(area) << '\n';
}

int dss_main(int argc, const char* const* argv) {
  CLI::App app{"Sparse network inference for oscillatory systems"};
  app.require_subcommand(1);

  const char* env_out = std::getenv("DSS_OUT_DIR");
  const std::string default_out = env_out ? env_out : ".";

  std::string sim_config, sim_out = default_out;
  long sim_seed = -1;
  bool sim_has_seed = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim_cmd->add_option("--config", sim_config, "simulation config file")->required();
  sim_cmd->add_option("--out", sim_out, "output directory");
  sim_cmd->add_option("--seed", sim_seed, "override the config seed")
      ->check(CLI::NonNegativeNumber);

  std::string inf_data, inf_config, inf_out = default_out;
  InferOverrides ov;
  long inf_seed = 0, inf_samples = 0, inf_burn = 0, inf_avg = 0;
  auto* inf_cmd = app.add_subcommand("infer", "Run the sampler on a dataset directory");
  inf_cmd->add_option("--data", inf_data, "dataset directory")->required();
  inf_cmd->add_option("--config", inf_config, "inference config file");
  inf_cmd->add_option("--out", inf_out, "output directory");
  auto* o_seed = inf_cmd->add_option("--seed", inf_seed, "chain seed");
  auto* o_samp = inf_cmd->add_option("--samples", inf_samples, "total sweeps");
  auto* o_burn = inf_cmd->add_option("--burn-in", inf_burn, "burn-in sweeps");
  auto* o_avg = inf_cmd->add_option("--average", inf_avg, "trailing samples to average");
  inf_cmd->add_flag("--no-similarity", ov.no_similarity, "ignore similarity.csv if present");

  std::string ev_pred, ev_truth, ev_out = default_out;
  double ev_threshold = -1.0;
  auto* ev_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  ev_cmd->add_option("--pred", ev_pred, "edge-probability CSV")->required();
  ev_cmd->add_option("--truth", ev_truth, "ground-truth adjacency CSV")->required();
  ev_cmd->add_option("--out", ev_out, "output directory");
  auto* o_thr = ev_cmd->add_option("--threshold", ev_threshold, "write the thresholded edge list");

  sim_cmd->callback([&] { sim_has_seed = sim_cmd->count("--seed") > 0; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim_cmd->parsed()) {
      cmd_simulate(sim_config, sim_out,
                   sim_has_seed ? std::optional<long>(sim_seed) : std::nullopt);
    } else if (inf_cmd->parsed()) {
      if (o_seed->count()) ov.seed = inf_seed;
      if (o_samp->count()) ov.n_samples = inf_samples;
      if (o_burn->count()) ov.burn_in = inf_burn;
      if (o_avg->count()) ov.n_average = inf_avg;
      cmd_infer(inf_data,
                inf_config.empty() ? std::nullopt : std::optional<fs::path>(inf_config), inf_out,
                ov);
    } else if (ev_cmd->parsed()) {
      cmd_eval(ev_pred, ev_truth, ev_out,
               o_thr->count() ? std::optional<double>(ev_threshold) : std::nullopt);
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace specnet::cli
