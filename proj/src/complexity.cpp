#include "framesrl/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace framesrl {

DocumentFeatures document_features(const Document& doc) {
  DocumentFeatures f;
  long token_count = 0;
  long sentence_count = 0;
  long trigger_count = 0;
  long root_triggers = 0, verbal_triggers = 0;
  double depth_sum = 0.0, position_sum = 0.0;
  long mwe_tokens = 0;
  std::map<std::string, long> pos_counts, dep_counts;

  for (const auto& sent : doc.sentences) {
    auto it = doc.annotations.find(sent.id);
    if (it == doc.annotations.end() || it->second.empty()) continue;
    ++sentence_count;
    token_count += sent.size();
    for (const auto& tok : sent.tokens) {
      ++pos_counts[tok.upos];
      ++dep_counts[tok.deprel];
      if (tok.deprel == "fixed" || tok.deprel == "flat") ++mwe_tokens;
    }
    for (const auto& inst : it->second) {
      ++trigger_count;
      int first = inst.trigger.begin;
      int depth = token_depth(sent, first);
      if (trigger_is_root(sent, inst.trigger)) {
        ++root_triggers;
        depth = 0;
      }
      depth_sum += depth;
      position_sum += first;
      if (coarse_pos(sent.tokens[first - 1].upos) == 'V') ++verbal_triggers;
    }
  }
  if (trigger_count == 0)
    throw std::runtime_error("document_features: document '" + doc.id +
                             "' has no triggers");

  f["pct_root_trigger"] = static_cast<double>(root_triggers) / trigger_count;
  f["pct_verbal_trigger"] = static_cast<double>(verbal_triggers) / trigger_count;
  f["mean_sentence_length"] = static_cast<double>(token_count) / sentence_count;
  f["mean_trigger_depth"] = depth_sum / trigger_count;
  f["mean_trigger_position"] = position_sum / trigger_count;
  f["mwe_share"] = static_cast<double>(mwe_tokens) / token_count;
  for (const auto& [tag, c] : pos_counts)
    f["pos_" + tag] = static_cast<double>(c) / token_count;
  for (const auto& [rel, c] : dep_counts)
    f["dep_" + rel] = static_cast<double>(c) / token_count;
  return f;
}

double document_fmeasure(const std::vector<EvalUnit>& units,
                         const std::string& doc_id, Metric metric) {
  std::vector<EvalUnit> subset;
  for (const auto& u : units)
    if (u.doc_id == doc_id) subset.push_back(u);
  return score(subset, metric).f_measure * 100.0;
}

std::vector<DocumentRecord> filter_documents(const std::vector<DocumentRecord>& docs,
                                             int min_triggers) {
  std::vector<DocumentRecord> out;
  for (const auto& d : docs)
    if (d.trigger_count >= min_triggers) out.push_back(d);
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::runtime_error("pearson: need equal-length vectors with n >= 3");
  size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::runtime_error("pearson: undefined for a constant vector");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

namespace {

// Two-tailed critical values of Student's t at alpha = 0.05 for df = 1..200;
// normal approximation 1.96 beyond.
const double kTCritical[200] = {
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004,
    2.262157, 2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905,
    2.109816, 2.100922, 2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
    2.059539, 2.055529, 2.051831, 2.048407, 2.045230, 2.042272, 2.039513, 2.036933,
    2.034515, 2.032245, 2.030108, 2.028094, 2.026192, 2.024394, 2.022691, 2.021075,
    2.019541, 2.018082, 2.016692, 2.015368, 2.014103, 2.012896, 2.011741, 2.010635,
    2.009575, 2.008559, 2.007584, 2.006647, 2.005746, 2.004879, 2.004045, 2.003241,
    2.002465, 2.001717, 2.000995, 2.000298, 1.999624, 1.998972, 1.998341, 1.997730,
    1.997138, 1.996564, 1.996008, 1.995469, 1.994945, 1.994437, 1.993943, 1.993464,
    1.992997, 1.992543, 1.992102, 1.991673, 1.991254, 1.990847, 1.990450, 1.990063,
    1.989686, 1.989319, 1.988960, 1.988610, 1.988268, 1.987934, 1.987608, 1.987290,
    1.986979, 1.986675, 1.986377, 1.986086, 1.985802, 1.985523, 1.985251, 1.984984,
    1.984723, 1.984467, 1.984217, 1.983972, 1.983731, 1.983495, 1.983264, 1.983038,
    1.982815, 1.982597, 1.982383, 1.982173, 1.981967, 1.981765, 1.981567, 1.981372,
    1.981180, 1.980992, 1.980808, 1.980626, 1.980448, 1.980272, 1.980100, 1.979930,
    1.979764, 1.979600, 1.979439, 1.979280, 1.979124, 1.978971, 1.978820, 1.978671,
    1.978524, 1.978380, 1.978239, 1.978099, 1.977961, 1.977826, 1.977692, 1.977561,
    1.977431, 1.977304, 1.977178, 1.977054, 1.976931, 1.976811, 1.976692, 1.976575,
    1.976460, 1.976346, 1.976233, 1.976122, 1.976013, 1.975905, 1.975799, 1.975694,
    1.975590, 1.975488, 1.975387, 1.975288, 1.975189, 1.975092, 1.974996, 1.974902,
    1.974808, 1.974716, 1.974625, 1.974535, 1.974446, 1.974358, 1.974271, 1.974185,
    1.974100, 1.974017, 1.973934, 1.973852, 1.973771, 1.973691, 1.973612, 1.973534,
    1.973457, 1.973381, 1.973305, 1.973231, 1.973157, 1.973084, 1.973012, 1.972941,
    1.972870, 1.972800, 1.972731, 1.972663, 1.972595, 1.972528, 1.972462, 1.972396,
    1.972332, 1.972268, 1.972204, 1.972141, 1.972079, 1.972017, 1.971957, 1.971896};

double t_critical(int df) {
  if (df < 1) throw std::runtime_error("t_test: df must be >= 1");
  if (df <= 200) return kTCritical[df - 1];
  return 1.96;
}

}  // namespace

TTestResult t_test(double r, int n) {
  if (n < 3) throw std::runtime_error("t_test: need n >= 3");
  if (std::abs(r) >= 1.0) {
    // perfectly correlated: trivially significant
    return {std::numeric_limits<double>::infinity(), true};
  }
  double t = r * std::sqrt((n - 2) / (1.0 - r * r));
  return {t, std::abs(t) > t_critical(n - 2)};
}

FeatureMatrix FeatureMatrix::from_records(const std::vector<DocumentRecord>& docs) {
  FeatureMatrix X;
  X.n = static_cast<int>(docs.size());
  std::set<std::string> names;
  for (const auto& d : docs)
    for (const auto& [name, v] : d.features) names.insert(name);
  for (const auto& name : names) {
    std::vector<double> col;
    col.reserve(docs.size());
    for (const auto& d : docs) {
      auto it = d.features.find(name);
      col.push_back(it == d.features.end() ? 0.0 : it->second);
    }
    X.names.push_back(name);
    X.columns.push_back(std::move(col));
  }
  return X;
}

const std::vector<double>& FeatureMatrix::column(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return columns[i];
  throw std::runtime_error("unknown feature: " + name);
}

std::vector<RankedFeature> rank_features(const FeatureMatrix& X,
                                         const std::vector<double>& y,
                                         std::vector<std::string>* skipped) {
  std::vector<RankedFeature> out;
  for (size_t i = 0; i < X.names.size(); ++i) {
    const auto& col = X.columns[i];
    bool constant =
        std::all_of(col.begin(), col.end(), [&](double v) { return v == col[0]; });
    if (constant) {
      if (skipped) skipped->push_back(X.names[i]);
      continue;
    }
    RankedFeature rf;
    rf.feature = X.names[i];
    rf.r = pearson(col, y);
    auto tt = t_test(rf.r, static_cast<int>(y.size()));
    rf.t = tt.t;
    rf.significant = tt.significant;
    out.push_back(std::move(rf));
  }
  std::sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (std::abs(a.r) != std::abs(b.r)) return std::abs(a.r) > std::abs(b.r);
    return a.feature < b.feature;  // stable order by name on equal |r|
  });
  return out;
}

OlsFit fit_ols(const std::vector<std::vector<double>>& columns,
               const std::vector<double>& y,
               const std::vector<std::string>* names) {
  size_t n = y.size();
  size_t p = columns.size();
  if (n < p + 1)
    throw std::runtime_error("fit_ols: need rows >= columns + 1");
  for (const auto& c : columns)
    if (c.size() != n) throw std::runtime_error("fit_ols: column length mismatch");

  // design with intercept first
  size_t d = p + 1;
  std::vector<std::vector<double>> A(d, std::vector<double>(d, 0.0));
  std::vector<double> b(d, 0.0);
  auto x_at = [&](size_t row, size_t j) -> double {
    return j == 0 ? 1.0 : columns[j - 1][row];
  };
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) {
      double xj = x_at(i, j);
      b[j] += xj * y[i];
      for (size_t k = j; k < d; ++k) A[j][k] += xj * x_at(i, k);
    }
  }
  for (size_t j = 0; j < d; ++j)
    for (size_t k = 0; k < j; ++k) A[j][k] = A[k][j];
  const double ridge = 1e-8;
  for (size_t j = 1; j < d; ++j) A[j][j] += ridge;  // not the intercept

  // Gaussian elimination with partial pivoting
  for (size_t col = 0; col < d; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < d; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-12) {
      std::string which = names && col > 0 && col - 1 < names->size()
                              ? (*names)[col - 1]
                              : ("column " + std::to_string(col));
      throw std::runtime_error("fit_ols: singular system; collinear feature " +
                               which);
    }
    std::swap(A[col], A[piv]);
    std::swap(b[col], b[piv]);
    for (size_t r = col + 1; r < d; ++r) {
      double m = A[r][col] / A[col][col];
      if (m == 0.0) continue;
      for (size_t k = col; k < d; ++k) A[r][k] -= m * A[col][k];
      b[r] -= m * b[col];
    }
  }
  std::vector<double> w(d, 0.0);
  for (size_t col = d; col-- > 0;) {
    double acc = b[col];
    for (size_t k = col + 1; k < d; ++k) acc -= A[col][k] * w[k];
    w[col] = acc / A[col][col];
  }
  OlsFit fit;
  fit.intercept = w[0];
  fit.weights.assign(w.begin() + 1, w.end());
  return fit;
}

namespace {

struct Standardizer {
  std::vector<double> mean, stddev;
  std::vector<bool> usable;

  void fit(const std::vector<std::vector<double>>& cols,
           const std::vector<int>& rows) {
    mean.assign(cols.size(), 0.0);
    stddev.assign(cols.size(), 0.0);
    usable.assign(cols.size(), true);
    for (size_t j = 0; j < cols.size(); ++j) {
      double m = 0.0;
      for (int i : rows) m += cols[j][i];
      m /= rows.size();
      double s = 0.0;
      for (int i : rows) s += (cols[j][i] - m) * (cols[j][i] - m);
      s = std::sqrt(s / rows.size());
      mean[j] = m;
      stddev[j] = s;
      if (s == 0.0) usable[j] = false;
    }
  }
  double z(size_t j, double v) const { return (v - mean[j]) / stddev[j]; }
};

std::vector<std::vector<int>> make_folds(int n, int k, uint64_t seed) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> folds(k);
  for (int i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
  return folds;
}

}  // namespace

double kfold_mse(const FeatureMatrix& X, const std::vector<double>& y,
                 const std::vector<std::string>& subset, int k, uint64_t seed,
                 std::vector<std::string>* notices) {
  int n = static_cast<int>(y.size());
  if (k < 2) throw std::runtime_error("kfold_mse: k must be >= 2");
  if (n < 2 * k) throw std::runtime_error("kfold_mse: need |y| >= 2k");

  // resolve columns once; order inside the subset must not matter, so sort
  std::vector<std::string> feats = subset;
  std::sort(feats.begin(), feats.end());
  std::vector<const std::vector<double>*> cols;
  for (const auto& f : feats) cols.push_back(&X.column(f));

  auto folds = make_folds(n, k, seed);
  double total_se = 0.0;
  long total_points = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<int> train_rows;
    for (int g = 0; g < k; ++g)
      if (g != f)
        train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    std::sort(train_rows.begin(), train_rows.end());

    std::vector<std::vector<double>> raw;
    for (auto* c : cols) raw.push_back(*c);
    Standardizer st;
    st.fit(raw, train_rows);

    // drop features constant on this train fold
    std::vector<size_t> used;
    for (size_t j = 0; j < raw.size(); ++j) {
      if (st.usable[j]) {
        used.push_back(j);
      } else if (notices) {
        notices->push_back("fold " + std::to_string(f) + ": feature '" + feats[j] +
                           "' constant on train split, dropped");
      }
    }
    std::vector<std::vector<double>> ztrain(used.size());
    std::vector<double> ytrain;
    for (size_t jj = 0; jj < used.size(); ++jj)
      for (int i : train_rows) ztrain[jj].push_back(st.z(used[jj], raw[used[jj]][i]));
    for (int i : train_rows) ytrain.push_back(y[i]);

    OlsFit fit = fit_ols(ztrain, ytrain);
    for (int i : folds[f]) {
      double pred = fit.intercept;
      for (size_t jj = 0; jj < used.size(); ++jj)
        pred += fit.weights[jj] * st.z(used[jj], raw[used[jj]][i]);
      double e = y[i] - pred;
      total_se += e * e;
      ++total_points;
    }
  }
  return total_se / total_points;
}

RegressionModel incremental_selection(const FeatureMatrix& X,
                                      const std::vector<double>& y, int k,
                                      uint64_t seed, int max_features) {
  if (X.names.empty())
    throw std::runtime_error("incremental_selection: no candidate features");
  RegressionModel model;
  double current = kfold_mse(X, y, {}, k, seed);  // naive per-fold-mean baseline
  model.mse_trace.push_back(current);

  std::vector<std::string> remaining = X.names;
  const double min_improvement = 1e-9;
  while (!remaining.empty()) {
    if (max_features >= 0 &&
        static_cast<int>(model.selected.size()) >= max_features)
      break;
    std::string best_feature;
    double best_mse = std::numeric_limits<double>::infinity();
    for (const auto& cand : remaining) {
      auto subset = model.selected;
      subset.push_back(cand);
      double mse = kfold_mse(X, y, subset, k, seed);
      // strict < keeps the earliest candidate in name order on exact ties
      if (mse < best_mse) {
        best_mse = mse;
        best_feature = cand;
      }
    }
    if (best_feature.empty() || current - best_mse <= min_improvement) break;
    model.selected.push_back(best_feature);
    std::erase(remaining, best_feature);
    current = best_mse;
    model.mse_trace.push_back(current);
  }

  // final refit on all data, standardized on full-data statistics
  std::vector<int> all_rows(y.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<std::vector<double>> raw;
  for (const auto& f : model.selected) raw.push_back(X.column(f));
  Standardizer st;
  st.fit(raw, all_rows);
  std::vector<std::vector<double>> z(raw.size());
  for (size_t j = 0; j < raw.size(); ++j)
    for (size_t i = 0; i < y.size(); ++i) z[j].push_back(st.z(j, raw[j][i]));
  OlsFit fit = fit_ols(z, y, &model.selected);
  model.weights = fit.weights;
  model.intercept = fit.intercept;
  model.feature_means = st.mean;
  model.feature_stddevs = st.stddev;
  return model;
}

double predict_regression(const RegressionModel& model, const FeatureMatrix& X,
                          int row) {
  double pred = model.intercept;
  for (size_t j = 0; j < model.selected.size(); ++j) {
    double v = X.column(model.selected[j])[row];
    pred += model.weights[j] * (v - model.feature_means[j]) / model.feature_stddevs[j];
  }
  return pred;
}

double naive_baseline_mse(const std::vector<double>& y_train,
                          const std::vector<double>& y_test) {
  if (y_train.empty()) throw std::runtime_error("naive_baseline_mse: empty y_train");
  double mean =
      std::accumulate(y_train.begin(), y_train.end(), 0.0) / y_train.size();
  double se = 0.0;
  for (double v : y_test) se += (v - mean) * (v - mean);
  return y_test.empty() ? 0.0 : se / y_test.size();
}

double r_squared(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.size() != yhat.size()) throw std::runtime_error("r_squared: size mismatch");
  double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) throw std::runtime_error("r_squared: constant y");
  return 1.0 - ss_res / ss_tot;
}

PerformanceStats performance_stats(const std::vector<double>& f_values) {
  if (f_values.size() < 2)
    throw std::runtime_error("performance_stats: need >= 2 documents");
  PerformanceStats s;
  s.mean = std::accumulate(f_values.begin(), f_values.end(), 0.0) / f_values.size();
  double acc = 0.0;
  for (double v : f_values) acc += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(acc / (f_values.size() - 1));
  return s;
}

}  // namespace framesrl
