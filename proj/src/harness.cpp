#include "qfeat/harness.hpp"

#include "qfeat/error.hpp"
#include "qfeat/grids.hpp"
#include "qfeat/solvers.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace qfeat {

Seed derive_seed(Seed master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// --- reports ---------------------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

const std::string& report_csv_header() {
  static const std::string header = "method,d,D,gamma,M,max_err,rms_err,n_eval,seed,build_ms,embed_ms";
  return header;
}

std::string report_csv_row(const ErrorReport& r) {
  std::ostringstream os;
  os << r.method << ',' << r.d << ',' << r.D << ',' << fmt(r.gamma) << ',' << fmt(r.M) << ',' << fmt(r.max_err)
     << ',' << fmt(r.rms_err) << ',' << r.n_eval << ',' << r.seed << ',' << r.build_ms << ',' << r.embed_ms;
  return os.str();
}

std::string reports_to_csv(const std::vector<ErrorReport>& rows) {
  std::string out = report_csv_header() + "\n";
  for (const auto& r : rows) out += report_csv_row(r) + "\n";
  return out;
}

// --- datasets --------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_real(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Dataset parse_csv(const std::string& text, std::string source) {
  Dataset ds;
  ds.source = std::move(source);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t k = 0; k < cells.size() && numeric; ++k) numeric = parse_real(cells[k], row[k]);
    if (!numeric) {
      if (rows == 0 && !ds.had_header) {
        ds.had_header = true;
        continue;
      }
      throw ParseError("load_csv: non-numeric cell in " + ds.source, line_no);
    }
    if (rows == 0) cols = row.size();
    if (row.size() != cols)
      throw ParseError("load_csv: expected " + std::to_string(cols) + " columns, found " +
                           std::to_string(row.size()) + " in " + ds.source,
                       line_no);
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw ParseError("load_csv: no data rows in " + ds.source, 0);
  ds.rows = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv: cannot open " + path.string(), 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

std::string matrix_to_csv(const RowMatrix& m) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ',';
      os << m(r, c);
    }
    os << '\n';
  }
  return os.str();
}

void write_csv(const std::filesystem::path& path, const RowMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << matrix_to_csv(m);
}

PairSet sample_pairs(const Dataset& ds, std::size_t n, Seed seed) {
  if (ds.size() < 2) throw ArgumentError("sample_pairs: dataset needs at least two rows");
  if (n < 1) throw ArgumentError("sample_pairs: pair count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> first(0, ds.size() - 1);
  std::uniform_int_distribution<std::size_t> second(0, ds.size() - 2);
  PairSet p{RowMatrix(static_cast<Eigen::Index>(n), ds.rows.cols()), RowMatrix(static_cast<Eigen::Index>(n), ds.rows.cols())};
  for (std::size_t l = 0; l < n; ++l) {
    const std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    p.x.row(static_cast<Eigen::Index>(l)) = ds.rows.row(static_cast<Eigen::Index>(i));
    p.y.row(static_cast<Eigen::Index>(l)) = ds.rows.row(static_cast<Eigen::Index>(j));
  }
  return p;
}

Dataset gaussian_mixture(std::size_t n, std::size_t d, std::size_t components, double side, Seed seed) {
  if (components < 1 || components > d) throw ArgumentError("gaussian_mixture: need 1 <= components <= d");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> pick(0, components - 1);
  // Scaled basis vectors are pairwise `side` apart.
  const double offset = side / std::sqrt(2.0);
  Dataset ds;
  ds.source = "gaussian-mixture";
  ds.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < ds.rows.rows(); ++i) {
    const auto c = static_cast<Eigen::Index>(pick(rng));
    for (Eigen::Index j = 0; j < ds.rows.cols(); ++j) ds.rows(i, j) = normal(rng) + (j == c ? offset : 0.0);
  }
  return ds;
}

// --- error measurement -----------------------------------------------------

DisplacementSample sample_displacements(std::size_t d, std::size_t n, Seed seed) {
  if (d < 1 || n < 1) throw ArgumentError("sample_displacements: d and n must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DisplacementSample s{RowMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)),
                       Vector(static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < s.directions.rows(); ++i) {
    double norm = 0.0;
    do {
      for (Eigen::Index j = 0; j < s.directions.cols(); ++j) s.directions(i, j) = normal(rng);
      norm = s.directions.row(i).norm();
    } while (norm == 0.0);
    s.directions.row(i) /= norm;
    s.fractions[i] = unit(rng);
  }
  return s;
}

namespace {

void validate_diameters(std::span<const double> diameters) {
  if (diameters.empty()) throw ArgumentError("error_curve: at least one diameter required");
  for (double m : diameters)
    if (!(m >= 0.0) || !std::isfinite(m)) throw ArgumentError("error_curve: diameters must be finite and >= 0");
}

// Turns per-diameter (own max, sum of squares) into the accumulated curve.
std::vector<ErrorPoint> finish_curve(std::span<const double> diameters, const std::vector<double>& own_max,
                                     const std::vector<double>& sum_sq, std::size_t n) {
  std::vector<std::size_t> order(diameters.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return diameters[a] < diameters[b]; });
  std::vector<ErrorPoint> out(diameters.size());
  double running = 0.0;
  for (std::size_t k : order) {
    running = std::max(running, own_max[k]);
    out[k] = {diameters[k], running, std::sqrt(sum_sq[k] / static_cast<double>(n))};
  }
  return out;
}

}  // namespace

std::vector<ErrorPoint> error_curve(const FeatureMap& fm, const GaussianKernel& k, std::span<const double> diameters,
                                    std::size_t n, Seed seed) {
  validate_diameters(diameters);
  const DisplacementSample s = sample_displacements(fm.dim(), n, seed);
  const std::size_t nm = diameters.size();
  std::vector<double> own_max(nm, 0.0), sum_sq(nm, 0.0);
  const Vector& w = fm.grid().weights();
  const Eigen::Index D = static_cast<Eigen::Index>(fm.count());

  constexpr Eigen::Index kChunk = 512;
  Eigen::MatrixXd proj;
  for (Eigen::Index start = 0; start < s.directions.rows(); start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, s.directions.rows() - start);
    // proj(i, r) = w_i . v_r; column-major so each sample's projections are contiguous.
    proj.noalias() = fm.frequencies() * s.directions.middleRows(start, rows).transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double t = s.fractions[start + r];
      const double* pr = proj.data() + r * D;
      for (std::size_t m = 0; m < nm; ++m) {
        const double radius = t * diameters[m];
        double approx = 0.0;
        for (Eigen::Index i = 0; i < D; ++i) approx += w[i] * std::cos(radius * pr[i]);
        const double err = std::abs(std::exp(-k.gamma() * radius * radius) - approx);
        own_max[m] = std::max(own_max[m], err);
        sum_sq[m] += err * err;
      }
    }
  }
  return finish_curve(diameters, own_max, sum_sq, n);
}

std::vector<ErrorPoint> error_curve(const DisplacementFn& exact, const DisplacementFn& approx, std::size_t d,
                                    std::span<const double> diameters, std::size_t n, Seed seed) {
  validate_diameters(diameters);
  const DisplacementSample s = sample_displacements(d, n, seed);
  const std::size_t nm = diameters.size();
  std::vector<double> own_max(nm, 0.0), sum_sq(nm, 0.0);
  std::vector<double> u(d);
  for (Eigen::Index r = 0; r < s.directions.rows(); ++r) {
    for (std::size_t m = 0; m < nm; ++m) {
      const double radius = s.fractions[r] * diameters[m];
      for (std::size_t j = 0; j < d; ++j) u[j] = radius * s.directions(r, static_cast<Eigen::Index>(j));
      const double err = std::abs(exact(u) - approx(u));
      own_max[m] = std::max(own_max[m], err);
      sum_sq[m] += err * err;
    }
  }
  return finish_curve(diameters, own_max, sum_sq, n);
}

double max_error_empirical(const FeatureMap& fm, const GaussianKernel& k, double M, std::size_t n, Seed seed) {
  const double diameters[] = {M};
  return error_curve(fm, k, diameters, n, seed).front().max_err;
}

namespace {

template <class F>
void for_each_pair_error(const FeatureMap& fm, const GaussianKernel& k, const PairSet& pairs, F&& f) {
  if (pairs.size() < 1) throw ArgumentError("pair error: no pairs");
  if (static_cast<std::size_t>(pairs.dim()) != fm.dim()) throw ArgumentError("pair error: dimension mismatch");
  for (Eigen::Index l = 0; l < pairs.size(); ++l) {
    const auto x = row_span(pairs.x, l);
    const auto y = row_span(pairs.y, l);
    f(k(x, y) - fm.approx_kernel(x, y));
  }
}

}  // namespace

double rms_error(const FeatureMap& fm, const GaussianKernel& k, const PairSet& pairs) {
  double sum = 0.0;
  for_each_pair_error(fm, k, pairs, [&](double e) { sum += e * e; });
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

double max_error_pairs(const FeatureMap& fm, const GaussianKernel& k, const PairSet& pairs) {
  double worst = 0.0;
  for_each_pair_error(fm, k, pairs, [&](double e) { worst = std::max(worst, std::abs(e)); });
  return worst;
}

// --- construction ----------------------------------------------------------

FeatureMap build_reweighted(const Dataset& train, const GaussianKernel& k, std::size_t target_D, Seed seed,
                            const ReweightSetup& setup) {
  if (target_D < 1) throw ArgumentError("build_reweighted: target D must be positive");
  if (setup.pool_factor < 1) throw ArgumentError("build_reweighted: pool factor must be positive");
  const GridQuadrature pool = subsample_dense(setup.L, train.dim(), setup.pool_factor * target_D, derive_seed(seed, 1));
  const PairSet pairs = sample_pairs(train, setup.pairs, derive_seed(seed, 2));
  if (setup.lambda >= 0.0) return FeatureMap(reweight(pool, pairs, k, setup.lambda), Method::reweighted, k.gamma());
  LambdaBisection bis = bisect_lambda(pool, pairs, k, target_D, 0.0, setup.bisect_iterations);
  if (setup.refit && bis.lambda > 0.0 && bis.grid.count() > 0)
    return FeatureMap(reweight(bis.grid, pairs, k, 0.0), Method::reweighted, k.gamma());
  return FeatureMap(std::move(bis.grid), Method::reweighted, k.gamma());
}

AnovaFeatureMap build_reweighted_anova(const Dataset& train, const AnovaKernel& k, std::size_t D_per_subset,
                                       Seed seed, const ReweightSetup& setup) {
  if (train.dim() != k.dim()) throw ArgumentError("build_reweighted_anova: dataset dimension differs from kernel");
  return anova_compose(
      k,
      [&](std::size_t dim, std::size_t D, std::size_t index) {
        const auto& subset = k.subsets()[index];
        Dataset sub;
        sub.source = train.source;
        sub.rows.resize(train.rows.rows(), static_cast<Eigen::Index>(dim));
        for (std::size_t j = 0; j < dim; ++j)
          sub.rows.col(static_cast<Eigen::Index>(j)) = train.rows.col(static_cast<Eigen::Index>(subset[j]));
        return build_reweighted(sub, k.base(), D, derive_seed(seed, 100 + index), setup);
      },
      D_per_subset);
}

FeatureMap build_feature_map(const BuildParams& p) {
  if (p.d < 1) throw ArgumentError("build: d must be positive");
  const auto needs_D = [&] {
    if (p.D < 1) throw ArgumentError("build: method " + std::string(method_name(p.method)) + " needs D >= 1");
  };
  switch (p.method) {
    case Method::rff:
      needs_D();
      return rff(p.d, p.D, p.gamma, p.seed);
    case Method::qmc:
      needs_D();
      return qmc_halton(p.d, p.D, p.gamma);
    case Method::dense:
      return FeatureMap(dense_grid(p.L, p.d), Method::dense, p.gamma);
    case Method::sparse:
      return FeatureMap(sparse_grid(p.level, p.d), Method::sparse, p.gamma);
    case Method::subsampled:
      needs_D();
      return FeatureMap(subsample_dense(p.L, p.d, p.D, p.seed), Method::subsampled, p.gamma);
    case Method::poly_exact:
      needs_D();
      return FeatureMap(construct_poly_exact(p.d, p.degree, p.D, p.seed), Method::poly_exact, p.gamma);
    case Method::reweighted: {
      needs_D();
      if (p.data == nullptr) throw ArgumentError("build: reweighted needs a dataset");
      if (p.data->dim() != p.d) throw ArgumentError("build: dataset dimension differs from d");
      return build_reweighted(*p.data, GaussianKernel(p.gamma), p.D, p.seed, p.reweight);
    }
    case Method::anova:
      break;
  }
  throw ArgumentError("build: ANOVA maps are composed from an ANOVA structure, not built directly");
}

// --- sweeps ----------------------------------------------------------------

namespace {

template <class T>
T config_get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("invalid value for sweep config key", key);
  }
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("sweep config: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ConfigError("sweep config must be a JSON object", "<root>");
  static const std::set<std::string> known{"methods", "d",     "gamma", "D",      "M",           "seeds",
                                           "n_eval",  "L",     "level", "degree", "data",        "pairs",
                                           "lambda",  "pool_factor", "bisect_iterations"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError("unknown sweep config key", key);
  for (const char* required : {"methods", "d", "M"})
    if (!j.contains(required)) throw ConfigError("missing sweep config key", required);

  SweepConfig c;
  for (const auto& name : config_get<std::vector<std::string>>(j, "methods")) {
    try {
      c.methods.push_back(parse_method(name));
    } catch (const ArgumentError&) {
      throw ConfigError("unknown method in sweep config key 'methods'", name);
    }
    if (c.methods.back() == Method::anova) throw ConfigError("anova is not a sweep method", name);
  }
  c.d = config_get<std::size_t>(j, "d");
  if (c.d < 1) throw ConfigError("invalid value for sweep config key", "d");
  c.M = config_get<std::vector<double>>(j, "M");
  if (c.M.empty()) throw ConfigError("invalid value for sweep config key", "M");
  if (j.contains("gamma")) c.gamma = config_get<double>(j, "gamma");
  if (!(c.gamma > 0.0)) throw ConfigError("invalid value for sweep config key", "gamma");
  if (j.contains("D")) c.D = config_get<std::vector<std::size_t>>(j, "D");
  if (j.contains("seeds")) c.seeds = config_get<std::vector<Seed>>(j, "seeds");
  if (c.seeds.empty()) throw ConfigError("invalid value for sweep config key", "seeds");
  if (j.contains("n_eval")) c.n_eval = config_get<std::size_t>(j, "n_eval");
  if (c.n_eval < 1) throw ConfigError("invalid value for sweep config key", "n_eval");
  if (j.contains("L")) c.L = config_get<std::size_t>(j, "L");
  if (j.contains("level")) c.level = config_get<std::size_t>(j, "level");
  if (j.contains("degree")) c.degree = config_get<std::size_t>(j, "degree");
  if (j.contains("data")) c.data = config_get<std::string>(j, "data");
  if (j.contains("pairs")) c.reweight.pairs = config_get<std::size_t>(j, "pairs");
  if (j.contains("lambda")) c.reweight.lambda = config_get<double>(j, "lambda");
  if (j.contains("pool_factor")) c.reweight.pool_factor = config_get<std::size_t>(j, "pool_factor");
  if (j.contains("bisect_iterations")) c.reweight.bisect_iterations = config_get<std::size_t>(j, "bisect_iterations");
  c.reweight.L = c.L;

  for (Method m : c.methods) {
    const bool sized = m != Method::dense && m != Method::sparse;
    if (sized && c.D.empty()) throw ConfigError("method needs sweep config key", "D");
    if (m == Method::reweighted && c.data.empty()) throw ConfigError("reweighted needs sweep config key", "data");
  }
  return c;
}

std::vector<ErrorReport> sweep(const SweepConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto ms_since = [](Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  };
  const GaussianKernel kernel(config.gamma);
  Dataset data;
  if (!config.data.empty()) data = load_csv(config.data);

  std::vector<ErrorReport> rows;
  for (Method method : config.methods) {
    const bool sized = method != Method::dense && method != Method::sparse;
    const std::vector<std::size_t> sizes = sized ? config.D : std::vector<std::size_t>{0};
    for (std::size_t D : sizes) {
      for (Seed seed : config.seeds) {
        BuildParams p;
        p.method = method;
        p.d = config.d;
        p.D = D;
        p.L = config.L;
        p.level = config.level;
        p.degree = config.degree;
        p.gamma = config.gamma;
        p.seed = seed;
        p.data = config.data.empty() ? nullptr : &data;
        p.reweight = config.reweight;

        auto t0 = Clock::now();
        const FeatureMap fm = build_feature_map(p);
        const std::int64_t build_ms = ms_since(t0);

        std::int64_t embed_ms = 0;
        if (fm.grid().nonnegative()) {
          std::mt19937_64 rng(derive_seed(seed, 3));
          std::normal_distribution<double> normal;
          RowMatrix X(1000, static_cast<Eigen::Index>(config.d));
          for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = normal(rng);
          t0 = Clock::now();
          (void)embed_grid_fast(fm, X);
          embed_ms = ms_since(t0);
        }

        // Evaluation draws depend on the seed only, so methods are compared on identical samples.
        const auto curve = error_curve(fm, kernel, config.M, config.n_eval, derive_seed(seed, 0));
        for (const ErrorPoint& e : curve) {
          ErrorReport r;
          r.method = std::string(method_name(method));
          r.d = config.d;
          r.D = fm.count();
          r.gamma = config.gamma;
          r.M = e.M;
          r.max_err = e.max_err;
          r.rms_err = e.rms_err;
          r.n_eval = config.n_eval;
          r.seed = seed;
          r.build_ms = build_ms;
          r.embed_ms = embed_ms;
          rows.push_back(std::move(r));
        }
      }
    }
  }
  return rows;
}

}  // namespace qfeat
