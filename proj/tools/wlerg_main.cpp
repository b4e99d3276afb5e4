// Command-line front end: sample | fit | eval | scan | tilt | phase | transform.
//
// Every run writes <out>/manifest.json echoing the fully resolved
// configuration; `wlerg --from-manifest <file>` replays a manifest and
// reproduces the outputs byte-identically. Exit codes: 0 success,
// 1 validation error, 2 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wlerg/detection.hpp"
#include "wlerg/diagnostics.hpp"
#include "wlerg/estimator.hpp"
#include "wlerg/evaluation.hpp"
#include "wlerg/expfamily.hpp"
#include "wlerg/kernel.hpp"
#include "wlerg/rng.hpp"
#include "wlerg/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

void write_manifest(const std::string& command, const json& options, const fs::path& outdir) {
  json manifest{{"command", command}, {"options", options}};
  std::ofstream out(outdir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + outdir.string());
  out << manifest.dump(2) << '\n';
}

fs::path prepare_outdir(const json& options) {
  fs::path outdir = options.at("out").get<std::string>();
  fs::create_directories(outdir);
  return outdir;
}

wlerg::WaveletIndex index_from_jl(int j, int l) {
  return j < 0 ? wlerg::WaveletIndex::DC() : wlerg::WaveletIndex::detail(j, l);
}

// Kernel spec: either the direct {c, band, entries} form or a preset.
wlerg::BandCoefficients kernel_from_json(const json& doc) {
  if (!doc.contains("preset")) {
    return wlerg::BandCoefficients::from_json(doc.dump());
  }
  std::string preset = doc.at("preset").get<std::string>();
  if (preset == "er") {
    return wlerg::from_edge_probability(doc.at("p").get<double>());
  }
  if (preset == "two_block") {
    return wlerg::from_two_block(doc.at("p_in").get<double>(), doc.at("p_out").get<double>());
  }
  if (preset == "dyadic_sbm") {
    int scale = doc.at("J").get<int>();
    auto rows = doc.at("B");
    int k = 1 << scale;
    wlerg::SquareMatrix block_logits(k);
    if (static_cast<int>(rows.size()) != k) {
      throw std::invalid_argument("dyadic_sbm preset: B must have 2^J rows");
    }
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) block_logits(r, c) = rows[r][c].get<double>();
    }
    return wlerg::from_dyadic_sbm(scale, block_logits, doc.value("c", 0.0));
  }
  if (preset == "hierarchical") {
    return wlerg::hierarchical_kernel(doc.value("c", 0.0),
                                      doc.at("beta").get<std::vector<double>>());
  }
  if (preset == "anomaly") {
    wlerg::BandCoefficients base = kernel_from_json(doc.at("base"));
    int scale = doc.at("scale").get<int>();
    std::vector<wlerg::WaveletIndex> indices;
    for (int l : doc.at("locations").get<std::vector<int>>()) {
      indices.push_back(wlerg::WaveletIndex::detail(scale, l));
    }
    return wlerg::hierarchical_anomaly_kernel(base, doc.at("tau").get<double>(), indices);
  }
  throw std::invalid_argument("unknown kernel preset: " + preset);
}

wlerg::BandCoefficients load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open kernel spec " + path);
  json doc = json::parse(in);
  return kernel_from_json(doc);
}

wlerg::TiltVector load_tilt(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open tilt spec " + path);
  json doc = json::parse(in);
  std::vector<wlerg::StatisticIndexSet::IndexPair> pairs;
  std::vector<std::pair<wlerg::StatisticIndexSet::IndexPair, double>> values;
  for (const auto& e : doc.value("entries", json::array())) {
    auto a = index_from_jl(e.at("j1").get<int>(), e.at("l1").get<int>());
    auto b = index_from_jl(e.at("j2").get<int>(), e.at("l2").get<int>());
    pairs.push_back({a, b});
    values.push_back({{a, b}, e.at("value").get<double>()});
  }
  wlerg::TiltVector tilt(wlerg::StatisticIndexSet::closure(pairs), doc.value("lambda0", 0.0));
  for (const auto& [pair, value] : values) tilt.set_symmetric(pair.first, pair.second, value);
  return tilt;
}

wlerg::LatentGraph load_graph(const json& options) {
  int hint = options.value("n", 0);
  wlerg::LatentGraph g =
      wlerg::LatentGraph::load_edge_list(options.at("graph").get<std::string>(), hint);
  if (options.contains("positions")) {
    g.set_positions(
        wlerg::LatentGraph::load_positions_csv(options.at("positions").get<std::string>()));
  }
  return g;
}

wlerg::SeriationMethod parse_method(const std::string& name) {
  if (name == "degree") return wlerg::SeriationMethod::degree;
  if (name == "fiedler") return wlerg::SeriationMethod::fiedler;
  throw std::invalid_argument("unknown seriation method: " + name);
}

wlerg::SquareMatrix load_grid_csv(const std::string& path) {
  return wlerg::FitReport::load_surface_csv(path);
}

void save_grid_csv(const wlerg::SquareMatrix& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "row,col,value\n";
  char buf[64];
  for (int r = 0; r < grid.size(); ++r) {
    for (int c = 0; c < grid.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", grid(r, c));
      out << r << ',' << c << ',' << buf << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Subcommand handlers (config-driven so manifests replay exactly)

void run_sample(const json& options) {
  fs::path outdir = prepare_outdir(options);
  wlerg::Graphon g(load_kernel(options.at("kernel").get<std::string>()));
  wlerg::LatentGraph graph = wlerg::sample_graph(g, options.at("n").get<int>(),
                                                 options.value("seed", std::uint64_t{0}),
                                                 options.value("threads", 1));
  graph.save_edge_list((outdir / "edges.txt").string());
  graph.save_positions_csv((outdir / "positions.csv").string());
  write_manifest("sample", options, outdir);
}

void run_transform(const json& options) {
  fs::path outdir = prepare_outdir(options);
  std::string direction = options.at("direction").get<std::string>();
  std::string input = options.at("input").get<std::string>();
  if (direction == "forward") {
    wlerg::CoefficientGrid2D coeffs = wlerg::forward_haar_2d(load_grid_csv(input));
    coeffs.save_csv((outdir / "coefficients.csv").string());
  } else if (direction == "inverse") {
    wlerg::SquareMatrix grid = wlerg::inverse_haar_2d(wlerg::CoefficientGrid2D::load_csv(input));
    save_grid_csv(grid, (outdir / "grid.csv").string());
  } else {
    throw std::invalid_argument("transform: direction must be forward or inverse");
  }
  write_manifest("transform", options, outdir);
}

void run_fit(const json& options) {
  fs::path outdir = prepare_outdir(options);
  wlerg::LatentGraph graph = load_graph(options);
  wlerg::SeriationMethod method = parse_method(options.value("method", std::string("degree")));
  int bins = options.at("K").get<int>();
  double kappa = options.value("kappa", 1.0);

  std::optional<wlerg::HoldoutSplit> split;
  if (options.contains("holdout_fraction")) {
    split = wlerg::holdout_split(graph.n(), options["holdout_fraction"].get<double>(),
                                 options.value("seed", std::uint64_t{0}));
  }
  wlerg::FitReport fit =
      wlerg::fit_pipeline(graph, method, bins, kappa, split ? &split->mask : nullptr);
  fit.save_json((outdir / "fit.json").string());
  fit.save_surface_csv((outdir / "surface.csv").string());
  write_manifest("fit", options, outdir);
}

void run_eval(const json& options) {
  fs::path outdir = prepare_outdir(options);
  wlerg::LatentGraph graph = load_graph(options);
  wlerg::SeriationMethod method = parse_method(options.value("method", std::string("degree")));
  int bins = options.at("K").get<int>();
  double kappa = options.value("kappa", 1.0);
  double fraction = options.value("fraction", 0.1);
  int n_splits = options.value("splits", 5);
  int sbm_blocks = options.value("sbm_blocks", 8);
  std::uint64_t seed = options.value("seed", std::uint64_t{0});
  std::string dataset = options.value("dataset", std::string("graph"));

  struct Accum {
    std::vector<double> auc, loglik;
    wlerg::MetricReport last;
  };
  std::vector<std::string> methods{"wl", "histogram", "sbm"};
  std::map<std::string, Accum> results;

  for (int s = 0; s < n_splits; ++s) {
    std::uint64_t split_seed = wlerg::hash2(wlerg::seed_from_label(seed, "split"), s);
    wlerg::HoldoutSplit split = wlerg::holdout_split(graph.n(), fraction, split_seed);
    std::vector<std::uint8_t> labels = wlerg::test_labels(graph, split);

    wlerg::FitReport fit = wlerg::fit_pipeline(graph, method, bins, kappa, &split.mask);
    std::map<std::string, std::vector<double>> preds;
    preds["wl"] = wlerg::wl_predictions(fit, split);
    preds["histogram"] = wlerg::baseline_histogram(graph, method, bins, split);
    preds["sbm"] = wlerg::baseline_sbm(graph, sbm_blocks, split);

    for (const std::string& name : methods) {
      wlerg::MetricReport report = wlerg::score_predictions(preds[name], labels, split_seed);
      results[name].auc.push_back(report.auc);
      results[name].loglik.push_back(report.mean_loglik);
      results[name].last = report;
    }
  }

  auto mean_sd = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::pair{mean, xs.size() > 1 ? std::sqrt(var / (xs.size() - 1)) : 0.0};
  };

  std::vector<wlerg::MethodScores> rows;
  for (const std::string& name : methods) {
    const Accum& acc = results[name];
    wlerg::MethodScores row;
    row.method = name;
    std::tie(row.auc_mean, row.auc_sd) = mean_sd(acc.auc);
    std::tie(row.loglik_mean, row.loglik_sd) = mean_sd(acc.loglik);
    row.brier = acc.last.brier;
    row.ece = acc.last.ece;
    row.ap = acc.last.ap;
    row.pos_logloss = acc.last.pos_logloss;
    row.balanced_logloss = acc.last.balanced_logloss;
    rows.push_back(row);
    acc.last.save_reliability_csv((outdir / ("reliability_" + name + ".csv")).string());
    acc.last.save_histogram_csv((outdir / ("pred_histogram_" + name + ".csv")).string());
  }
  wlerg::save_metrics_csv(dataset, rows, (outdir / "metrics.csv").string());

  if (options.contains("sweep_K") || options.contains("sweep_kappa")) {
    std::vector<int> sweep_bins = options.value("sweep_K", std::vector<int>{bins});
    std::vector<double> sweep_kappas = options.value("sweep_kappa", std::vector<double>{kappa});
    std::vector<std::uint64_t> split_seeds;
    for (int s = 0; s < n_splits; ++s) {
      split_seeds.push_back(wlerg::hash2(wlerg::seed_from_label(seed, "split"), s));
    }
    auto cells =
        wlerg::robustness_sweep(graph, method, sweep_bins, sweep_kappas, split_seeds, fraction);
    wlerg::save_sweep_csv(cells, (outdir / "sweep.csv").string());
  }
  write_manifest("eval", options, outdir);
}

void run_scan(const json& options) {
  fs::path outdir = prepare_outdir(options);
  wlerg::LatentGraph graph = load_graph(options);
  std::string mode = options.at("mode").get<std::string>();
  double mult = options.value("threshold_mult", 2.0);
  auto [lo_default, hi_default] = wlerg::default_scan_range(graph.n());
  int j_lo = options.value("jmin", lo_default);
  int j_hi = options.value("jmax", hi_default);

  wlerg::ScanReport report;
  if (mode == "latent") {
    if (!graph.has_positions()) {
      throw std::invalid_argument("scan --mode latent requires --positions");
    }
    wlerg::Graphon w0(load_kernel(options.at("kernel").get<std::string>()));
    report = wlerg::wavelet_scan(graph, w0, j_lo, j_hi, mult);
  } else if (mode == "residual") {
    wlerg::SeriationMethod method = parse_method(options.value("method", std::string("degree")));
    int bins = options.at("K").get<int>();
    double kappa = options.value("kappa", 1.0);
    wlerg::FitReport fit = wlerg::fit_pipeline(graph, method, bins, kappa, nullptr);
    int cap = wlerg::int_log2(bins);
    report = wlerg::residual_block_scan(graph, fit, std::min(j_lo, cap), std::min(j_hi, cap), mult);
  } else {
    throw std::invalid_argument("scan: mode must be latent or residual");
  }
  report.save_csv((outdir / "scan.csv").string());
  report.save_detections_json((outdir / "detections.json").string());
  write_manifest("scan", options, outdir);
}

void run_tilt(const json& options) {
  fs::path outdir = prepare_outdir(options);
  wlerg::Graphon base(load_kernel(options.at("kernel").get<std::string>()));
  wlerg::TiltVector direction = load_tilt(options.at("direction").get<std::string>());
  std::vector<double> ts = options.at("ts").get<std::vector<double>>();
  int n = options.at("n").get<int>();
  int n_seeds = options.value("seeds", 3);
  std::uint64_t seed = options.value("seed", std::uint64_t{0});
  int grid = options.value("grid", 256);

  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < n_seeds; ++s) {
    seeds.push_back(wlerg::hash2(wlerg::seed_from_label(seed, "tilt-seed"), s));
  }
  auto rows = wlerg::tilt_path_diagnostics(base, direction, ts, n, seeds);
  wlerg::write_tilt_path_csv(rows, (outdir / "tilt_path.csv").string());

  json mgfs = json::array();
  for (double t : ts) {
    wlerg::MgfReport report = wlerg::limiting_logmgf(base, direction.scaled(t), grid);
    json entry = json::parse(report.to_json());
    entry["t"] = t;
    mgfs.push_back(entry);
  }
  std::ofstream mgf_out(outdir / "mgf.json");
  mgf_out << mgfs.dump(2) << '\n';
  write_manifest("tilt", options, outdir);
}

void run_phase(const json& options) {
  fs::path outdir = prepare_outdir(options);
  int n = options.at("n").get<int>();
  double c0 = options.value("c", 0.0);
  std::vector<double> beta = options.at("beta").get<std::vector<double>>();
  std::vector<double> multipliers = options.at("multipliers").get<std::vector<double>>();
  int n_seeds = options.value("seeds", 5);
  std::uint64_t seed = options.value("seed", std::uint64_t{0});
  int depth = static_cast<int>(beta.size());

  std::ofstream out(outdir / "phase.csv");
  if (!out) throw std::runtime_error("cannot write phase.csv");
  out << "alpha,scale,snr,error_mean,error_sd\n";
  char buf[256];

  int grid = 1 << (depth + 2);
  for (double alpha : multipliers) {
    std::vector<double> scaled(beta);
    for (double& b : scaled) b *= alpha;
    wlerg::Graphon g(wlerg::hierarchical_kernel(c0, scaled));

    std::vector<std::vector<double>> errors(depth);
    for (int s = 0; s < n_seeds; ++s) {
      std::uint64_t sample_seed = wlerg::hash2(wlerg::seed_from_label(seed, "phase-seed"), s);
      wlerg::LatentGraph graph = wlerg::sample_graph(g, n, sample_seed);
      // sgn(Delta_j) matches sgn(beta_j): a positive diagonal coefficient
      // makes same-child blocks denser.
      wlerg::HierarchicalResult result = wlerg::hierarchical_classify(graph, depth, scaled);
      for (int j = 0; j < depth; ++j) errors[j].push_back(result.error_rates[j]);
    }
    for (int j = 0; j < depth; ++j) {
      auto [p_in, p_out] = wlerg::effective_scale_probabilities(g, j, grid);
      double ratio = (p_in > 0.0 && p_in < 1.0 && p_out > 0.0 && p_out < 1.0)
                         ? wlerg::snr(n, j, p_in, p_out)
                         : 0.0;
      double mean = 0.0;
      for (double e : errors[j]) mean += e;
      mean /= static_cast<double>(errors[j].size());
      double var = 0.0;
      for (double e : errors[j]) var += (e - mean) * (e - mean);
      double sd = errors[j].size() > 1 ? std::sqrt(var / (errors[j].size() - 1)) : 0.0;
      std::snprintf(buf, sizeof(buf), "%.17g,%d,%.10g,%.10g,%.10g\n", alpha, j, ratio, mean, sd);
      out << buf;
    }
  }
  write_manifest("phase", options, outdir);
}

void dispatch(const std::string& command, const json& options) {
  if (command == "sample") {
    run_sample(options);
  } else if (command == "fit") {
    run_fit(options);
  } else if (command == "eval") {
    run_eval(options);
  } else if (command == "scan") {
    run_scan(options);
  } else if (command == "tilt") {
    run_tilt(options);
  } else if (command == "phase") {
    run_phase(options);
  } else if (command == "transform") {
    run_transform(options);
  } else {
    throw std::invalid_argument("unknown command in manifest: " + command);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet latent position exponential random graphs"};
  app.require_subcommand(0, 1);

  std::string manifest_path;
  app.add_option("--from-manifest", manifest_path,
                 "Replay a previous run from its manifest.json");

  json options;
  std::string command;

  auto add_common = [&options](CLI::App* sub) {
    sub->add_option_function<std::string>(
           "--out", [&options](const std::string& v) { options["out"] = v; }, "Output directory")
        ->required();
    sub->add_option_function<std::uint64_t>(
        "--seed", [&options](std::uint64_t v) { options["seed"] = v; }, "Master seed (default 0)");
    sub->add_option_function<int>(
        "--threads", [&options](int v) { options["threads"] = v; }, "Worker threads");
  };
  auto add_graph_inputs = [&options](CLI::App* sub) {
    sub->add_option_function<std::string>(
           "--graph", [&options](const std::string& v) { options["graph"] = v; },
           "Edge-list file")
        ->required();
    sub->add_option_function<int>(
        "--n", [&options](int v) { options["n"] = v; }, "Vertex count hint");
  };

  CLI::App* sample = app.add_subcommand("sample", "Sample a WL-ERG graph from a kernel spec");
  add_common(sample);
  sample->add_option_function<std::string>(
            "--kernel", [&options](const std::string& v) { options["kernel"] = v; },
            "Kernel spec JSON")
      ->required();
  sample->add_option_function<int>(
            "--n", [&options](int v) { options["n"] = v; }, "Vertex count")
      ->required();
  sample->callback([&] { command = "sample"; });

  CLI::App* fit = app.add_subcommand("fit", "Fit the wavelet graphon pipeline to a graph");
  add_common(fit);
  add_graph_inputs(fit);
  fit->add_option_function<std::string>(
      "--method", [&options](const std::string& v) { options["method"] = v; },
      "Seriation: degree|fiedler");
  fit->add_option_function<int>(
         "--K", [&options](int v) { options["K"] = v; }, "Grid resolution (power of two)")
      ->required();
  fit->add_option_function<double>(
      "--kappa", [&options](double v) { options["kappa"] = v; }, "Threshold multiplier");
  fit->add_option_function<double>(
      "--holdout-fraction", [&options](double v) { options["holdout_fraction"] = v; },
      "Exclude a seeded dyad sample from training");
  fit->callback([&] { command = "fit"; });

  CLI::App* eval = app.add_subcommand("eval", "Strict dyad-holdout evaluation with baselines");
  add_common(eval);
  add_graph_inputs(eval);
  eval->add_option_function<std::string>(
      "--method", [&options](const std::string& v) { options["method"] = v; },
      "Seriation: degree|fiedler");
  eval->add_option_function<int>(
          "--K", [&options](int v) { options["K"] = v; }, "Grid resolution")
      ->required();
  eval->add_option_function<double>(
      "--kappa", [&options](double v) { options["kappa"] = v; }, "Threshold multiplier");
  eval->add_option_function<double>(
      "--fraction", [&options](double v) { options["fraction"] = v; }, "Holdout fraction");
  eval->add_option_function<int>(
      "--splits", [&options](int v) { options["splits"] = v; }, "Number of repeated splits");
  eval->add_option_function<int>(
      "--sbm-blocks", [&options](int v) { options["sbm_blocks"] = v; }, "SBM baseline blocks");
  eval->add_option_function<std::string>(
      "--dataset", [&options](const std::string& v) { options["dataset"] = v; },
      "Dataset label for the metrics CSV");
  eval->add_option_function<std::vector<int>>(
      "--sweep-K", [&options](const std::vector<int>& v) { options["sweep_K"] = v; },
      "Robustness sweep over K values");
  eval->add_option_function<std::vector<double>>(
      "--sweep-kappa", [&options](const std::vector<double>& v) { options["sweep_kappa"] = v; },
      "Robustness sweep over kappa values");
  eval->callback([&] { command = "eval"; });

  CLI::App* scan = app.add_subcommand("scan", "Standardized multiscale block scan");
  add_common(scan);
  add_graph_inputs(scan);
  scan->add_option_function<std::string>(
          "--mode", [&options](const std::string& v) { options["mode"] = v; },
          "latent (known kernel + positions) or residual (fitted surface)")
      ->required();
  scan->add_option_function<std::string>(
      "--positions", [&options](const std::string& v) { options["positions"] = v; },
      "Latent positions CSV");
  scan->add_option_function<std::string>(
      "--kernel", [&options](const std::string& v) { options["kernel"] = v; },
      "Null kernel spec (latent mode)");
  scan->add_option_function<std::string>(
      "--method", [&options](const std::string& v) { options["method"] = v; },
      "Seriation for residual mode");
  scan->add_option_function<int>(
      "--K", [&options](int v) { options["K"] = v; }, "Grid resolution for residual mode");
  scan->add_option_function<double>(
      "--kappa", [&options](double v) { options["kappa"] = v; }, "Threshold multiplier");
  scan->add_option_function<int>(
      "--jmin", [&options](int v) { options["jmin"] = v; }, "Coarsest scanned scale");
  scan->add_option_function<int>(
      "--jmax", [&options](int v) { options["jmax"] = v; }, "Finest scanned scale");
  scan->add_option_function<double>(
      "--threshold-mult", [&options](double v) { options["threshold_mult"] = v; },
      "Scan threshold multiplier C1 (default 2)");
  scan->callback([&] { command = "scan"; });

  CLI::App* tilt = app.add_subcommand("tilt", "Tilt-path stability diagnostics");
  add_common(tilt);
  tilt->add_option_function<std::string>(
          "--kernel", [&options](const std::string& v) { options["kernel"] = v; },
          "Base kernel spec JSON")
      ->required();
  tilt->add_option_function<std::string>(
          "--direction", [&options](const std::string& v) { options["direction"] = v; },
          "Tilt direction JSON {lambda0, entries}")
      ->required();
  tilt->add_option_function<std::vector<double>>(
          "--ts", [&options](const std::vector<double>& v) { options["ts"] = v; },
          "Tilt magnitudes")
      ->required();
  tilt->add_option_function<int>(
          "--n", [&options](int v) { options["n"] = v; }, "Sample size per point")
      ->required();
  tilt->add_option_function<int>(
      "--seeds", [&options](int v) { options["seeds"] = v; }, "Seeds per tilt point");
  tilt->add_option_function<int>(
      "--grid", [&options](int v) { options["grid"] = v; }, "Quadrature grid size");
  tilt->callback([&] { command = "tilt"; });

  CLI::App* phase = app.add_subcommand("phase", "Per-scale error-rate grid over signal levels");
  add_common(phase);
  phase->add_option_function<int>(
           "--n", [&options](int v) { options["n"] = v; }, "Sample size")
      ->required();
  phase->add_option_function<double>(
      "--c", [&options](double v) { options["c"] = v; }, "Baseline logit offset");
  phase->add_option_function<std::vector<double>>(
           "--beta", [&options](const std::vector<double>& v) { options["beta"] = v; },
           "Base per-scale diagonal coefficients")
      ->required();
  phase->add_option_function<std::vector<double>>(
           "--multipliers",
           [&options](const std::vector<double>& v) { options["multipliers"] = v; },
           "Signal multipliers")
      ->required();
  phase->add_option_function<int>(
      "--seeds", [&options](int v) { options["seeds"] = v; }, "Seeds per multiplier");
  phase->callback([&] { command = "phase"; });

  CLI::App* transform = app.add_subcommand("transform", "2D Haar transform of a CSV grid");
  add_common(transform);
  transform->add_option_function<std::string>(
               "--direction", [&options](const std::string& v) { options["direction"] = v; },
               "forward|inverse")
      ->required();
  transform->add_option_function<std::string>(
               "--input", [&options](const std::string& v) { options["input"] = v; },
               "Input CSV (grid for forward, coefficients for inverse)")
      ->required();
  transform->callback([&] { command = "transform"; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (!manifest_path.empty()) {
      std::ifstream in(manifest_path);
      if (!in) throw std::invalid_argument("cannot open manifest " + manifest_path);
      json manifest = json::parse(in);
      dispatch(manifest.at("command").get<std::string>(), manifest.at("options"));
      return 0;
    }
    if (command.empty()) {
      std::cerr << app.help() << '\n';
      return 1;
    }
    dispatch(command, options);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
