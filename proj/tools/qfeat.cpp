// qfeat: build, evaluate, sweep, embed and benchmark quadrature feature maps.

#include "qfeat/error.hpp"
#include "qfeat/featuremaps.hpp"
#include "qfeat/harness.hpp"
#include "qfeat/kernels.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <variant>

using namespace qfeat;

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error("cannot write " + out);
  f << text;
}

struct MapOptions {
  std::string map;  // load instead of build
  std::string method = "rff";
  std::size_t d = 0;
  std::size_t D = 0;
  std::size_t L = 8;
  std::size_t level = 2;
  std::size_t degree = 2;
  double gamma = 0.5;
  Seed seed = 0;
  std::string data;
  std::size_t pairs = 500;
  std::optional<double> lambda;
  std::size_t target_D = 0;
  std::string anova;
};

void add_map_options(CLI::App* app, MapOptions& o) {
  app->add_option("--map", o.map, "Load a feature map JSON instead of building one");
  app->add_option("--method", o.method, "rff|qmc|dense|sparse|subsampled|poly-exact|reweighted")
      ->check(CLI::IsMember({"rff", "qmc", "dense", "sparse", "subsampled", "poly-exact", "reweighted"}));
  app->add_option("--d", o.d, "Input dimension");
  app->add_option("--D", o.D, "Number of quadrature points (per subset with --anova)");
  app->add_option("--L", o.L, "Hermite points per dimension for dense/subsampled grids");
  app->add_option("--level", o.level, "Sparse-grid level A");
  app->add_option("--degree", o.degree, "Exactness degree R for poly-exact");
  app->add_option("--gamma", o.gamma, "Kernel bandwidth: k(u) = exp(-gamma |u|^2)");
  app->add_option("--seed", o.seed, "Master seed");
  app->add_option("--data", o.data, "CSV dataset (training rows for reweighted)");
  app->add_option("--pairs", o.pairs, "Training pairs for reweighted");
  app->add_option("--lambda", o.lambda, "Fixed l1 penalty for reweighted (default: bisect to --target-D)");
  app->add_option("--target-D", o.target_D, "Target support for reweighted (defaults to --D)");
  app->add_option("--anova", o.anova, "ANOVA structure JSON; builds one sub-map per subset");
}

using AnyMap = std::variant<FeatureMap, AnovaFeatureMap>;

struct Built {
  AnyMap map;
  std::int64_t build_ms = 0;
  std::optional<AnovaKernel> anova;
};

Built obtain_map(const MapOptions& o, const std::optional<Dataset>& data) {
  std::optional<AnovaKernel> anova;
  if (!o.anova.empty()) anova = load_anova(o.anova);

  if (!o.map.empty()) {
    const std::string text = read_file(o.map);
    if (nlohmann::json::parse(text, nullptr, false).contains("parts")) {
      auto fm = anova_map_from_json(text);
      if (!anova) {
        std::vector<std::vector<std::size_t>> subsets;
        for (const auto& p : fm.parts()) subsets.push_back(p.subset);
        anova.emplace(fm.dim(), subsets, GaussianKernel(fm.parts().front().map.gamma()));
      }
      return {std::move(fm), 0, anova};
    }
    return {feature_map_from_json(text), 0, anova};
  }

  BuildParams p;
  p.method = parse_method(o.method);
  p.d = anova ? anova->dim() : o.d;
  p.D = o.D;
  p.L = o.L;
  p.level = o.level;
  p.degree = o.degree;
  p.gamma = anova ? anova->base().gamma() : o.gamma;
  p.seed = o.seed;
  p.data = data ? &*data : nullptr;
  p.reweight.L = o.L;
  p.reweight.pairs = o.pairs;
  if (o.lambda) p.reweight.lambda = *o.lambda;
  if (p.method == Method::reweighted && o.target_D > 0) p.D = o.target_D;

  const auto t0 = Clock::now();
  if (!anova) {
    auto fm = build_feature_map(p);
    return {std::move(fm), ms_since(t0), anova};
  }
  if (p.method == Method::reweighted) {
    if (!data) throw ArgumentError("reweighted needs --data");
    auto fm = build_reweighted_anova(*data, *anova, p.D, p.seed, p.reweight);
    return {std::move(fm), ms_since(t0), anova};
  }
  auto fm = anova_compose(
      *anova,
      [&](std::size_t sd, std::size_t D, std::size_t i) {
        BuildParams q = p;
        q.d = sd;
        q.D = D;
        q.seed = derive_seed(p.seed, 100 + i);
        return build_feature_map(q);
      },
      std::max<std::size_t>(p.D, 1));
  return {std::move(fm), ms_since(t0), anova};
}

std::optional<Dataset> maybe_data(const MapOptions& o) {
  if (o.data.empty()) return std::nullopt;
  return load_csv(o.data);
}

std::string map_json(const AnyMap& m) {
  return std::visit(
      [](const auto& fm) {
        if constexpr (std::is_same_v<std::decay_t<decltype(fm)>, FeatureMap>) return feature_map_to_json(fm);
        else return anova_map_to_json(fm);
      },
      m);
}

RowMatrix normal_rows(std::size_t n, std::size_t d, Seed seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = N(rng);
  return X;
}

RowMatrix embed_any(const AnyMap& m, const RowMatrix& X) {
  if (const auto* fm = std::get_if<FeatureMap>(&m)) return embed_grid_fast(*fm, X).features;
  const auto& am = std::get<AnovaFeatureMap>(m);
  RowMatrix F(X.rows(), static_cast<Eigen::Index>(am.feature_length()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) F.row(i) = am.embed(row_span(X, i)).transpose();
  return F;
}

int cmd_build(const MapOptions& o, const std::string& out) {
  const auto data = maybe_data(o);
  emit(out, map_json(obtain_map(o, data).map) + "\n");
  return 0;
}

int cmd_eval(const MapOptions& o, std::vector<double> diameters, std::size_t n_eval, const std::string& out) {
  const auto data = maybe_data(o);
  const Built b = obtain_map(o, data);
  const Seed eval_seed = derive_seed(o.seed, 0);
  std::vector<ErrorReport> rows;
  ErrorReport base;
  base.n_eval = n_eval;
  base.seed = o.seed;
  base.build_ms = b.build_ms;

  std::vector<ErrorPoint> curve;
  if (const auto* fm = std::get_if<FeatureMap>(&b.map)) {
    base.method = std::string(method_name(fm->method()));
    base.d = fm->dim();
    base.D = fm->count();
    base.gamma = fm->gamma();
    if (fm->grid().nonnegative()) {
      const auto X = normal_rows(1000, fm->dim(), derive_seed(o.seed, 3));
      const auto t0 = Clock::now();
      (void)embed_grid_fast(*fm, X);
      base.embed_ms = ms_since(t0);
    }
    curve = error_curve(*fm, GaussianKernel(fm->gamma()), diameters, n_eval, eval_seed);
  } else {
    const auto& am = std::get<AnovaFeatureMap>(b.map);
    const AnovaKernel& k = *b.anova;
    base.method = "anova";
    base.d = am.dim();
    base.D = 0;
    for (const auto& p : am.parts()) base.D += p.map.count();
    base.gamma = k.base().gamma();
    const std::vector<double> origin(am.dim(), 0.0);
    curve = error_curve([&](std::span<const double> u) { return eval_anova(k, origin, u); },
                        [&](std::span<const double> u) { return am.approx_kernel(origin, u); }, am.dim(), diameters,
                        n_eval, eval_seed);
  }
  for (const auto& e : curve) {
    ErrorReport r = base;
    r.M = e.M;
    r.max_err = e.max_err;
    r.rms_err = e.rms_err;
    rows.push_back(r);
  }
  emit(out, reports_to_csv(rows));
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& out) {
  emit(out, reports_to_csv(sweep(parse_sweep_config(read_file(config)))));
  return 0;
}

int cmd_embed(const MapOptions& o, const std::string& out) {
  if (o.data.empty()) throw ArgumentError("embed needs --data");
  const auto data = maybe_data(o);
  const Built b = obtain_map(o, data);
  emit(out, matrix_to_csv(embed_any(b.map, data->rows)));
  return 0;
}

int cmd_bench(const MapOptions& o, std::size_t rows, std::size_t repeats, const std::string& out) {
  const auto data = maybe_data(o);
  const Built b = obtain_map(o, data);
  const auto* fm = std::get_if<FeatureMap>(&b.map);
  if (!fm) throw ArgumentError("bench compares embed paths of a single feature map; ANOVA maps are not supported");
  const RowMatrix X = data ? data->rows : normal_rows(rows, fm->dim(), derive_seed(o.seed, 3));

  double plain_ms = 1e300, fast_ms = 1e300;
  RowMatrix plain;
  FastEmbedding fast;
  for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
    auto t0 = Clock::now();
    plain = fm->embed(X);
    plain_ms = std::min(plain_ms, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    t0 = Clock::now();
    fast = embed_grid_fast(*fm, X);
    fast_ms = std::min(fast_ms, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  std::ostringstream os;
  os << "method,d,D,n,embed_ms,fast_ms,used_fast,distinct_values,max_abs_diff\n"
     << method_name(fm->method()) << ',' << fm->dim() << ',' << fm->count() << ',' << X.rows() << ',' << plain_ms
     << ',' << fast_ms << ',' << (fast.used_fast ? 1 : 0) << ',' << fast.distinct_values << ','
     << (fast.features - plain).cwiseAbs().maxCoeff() << '\n';
  emit(out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadrature-based feature maps for Gaussian and ANOVA kernels"};
  app.require_subcommand(1);

  MapOptions opts;
  std::string out;
  std::vector<double> diameters{1.0};
  std::size_t n_eval = 100000;
  std::string config;
  std::size_t bench_rows = 10000, repeats = 3;

  auto* build = app.add_subcommand("build", "Construct a feature map and write it as JSON");
  add_map_options(build, opts);
  build->add_option("--out", out, "Output path (default stdout)");

  auto* eval = app.add_subcommand("eval", "Error report for one feature map");
  add_map_options(eval, opts);
  eval->add_option("--diameter", diameters, "Region diameter(s) M")->delimiter(',');
  eval->add_option("--n-eval", n_eval, "Sampled displacements per report");
  eval->add_option("--out", out, "Output CSV (default stdout)");

  auto* sw = app.add_subcommand("sweep", "Grid of methods and parameters to a CSV report");
  sw->add_option("--config", config, "Sweep configuration JSON")->required();
  sw->add_option("--out", out, "Output CSV (default stdout)");

  auto* emb = app.add_subcommand("embed", "Embed a dataset: one row per input row, 2D columns");
  add_map_options(emb, opts);
  emb->add_option("--out", out, "Output CSV (default stdout)");

  auto* bench = app.add_subcommand("bench", "Time embed against the grid-structured embedding");
  add_map_options(bench, opts);
  bench->add_option("--rows", bench_rows, "Random rows when no --data is given");
  bench->add_option("--repeats", repeats, "Timing repeats (minimum reported)");
  bench->add_option("--out", out, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return cmd_build(opts, out);
    if (*eval) return cmd_eval(opts, diameters, n_eval, out);
    if (*sw) return cmd_sweep(config, out);
    if (*emb) return cmd_embed(opts, out);
    if (*bench) return cmd_bench(opts, bench_rows, repeats, out);
  } catch (const std::exception& e) {
    std::cerr << "qfeat: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
