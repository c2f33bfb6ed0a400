#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "framesrl/corpus.hpp"
#include "framesrl/evaluator.hpp"

namespace framesrl {

// Named numeric per-document feature vector. POS/DEP share features appear
// as pos_<TAG> / dep_<REL>. Computed only over sentences with >= 1 trigger.
using DocumentFeatures = std::map<std::string, double>;

DocumentFeatures document_features(const Document& doc);

// Soft-span F restricted to one document's units, in percent points (0-100).
double document_fmeasure(const std::vector<EvalUnit>& units,
                         const std::string& doc_id, Metric metric = Metric::Soft);

struct DocumentRecord {
  std::string doc_id;
  DocumentFeatures features;
  double f_measure = 0.0;  // percent points
  int trigger_count = 0;
};

std::vector<DocumentRecord> filter_documents(const std::vector<DocumentRecord>& docs,
                                             int min_triggers = 30);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct TTestResult {
  double t = 0.0;
  bool significant = false;
};

// Two-tailed Student's t-test of a correlation coefficient at alpha = 0.05.
TTestResult t_test(double r, int n);

struct RankedFeature {
  std::string feature;
  double r = 0.0;
  double t = 0.0;
  bool significant = false;
};

// Feature matrix: column-named design (each name -> column of values shared
// index space with y).
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // columns[i].size() == n
  int n = 0;

  static FeatureMatrix from_records(const std::vector<DocumentRecord>& docs);
  const std::vector<double>& column(const std::string& name) const;
};

// Sorted by |r| descending; constant features excluded (reported separately).
std::vector<RankedFeature> rank_features(const FeatureMatrix& X,
                                         const std::vector<double>& y,
                                         std::vector<std::string>* skipped = nullptr);

struct OlsFit {
  std::vector<double> weights;
  double intercept = 0.0;
};

// Normal equations with ridge damping 1e-8 on the feature block.
OlsFit fit_ols(const std::vector<std::vector<double>>& columns,
               const std::vector<double>& y,
               const std::vector<std::string>* names = nullptr);

double kfold_mse(const FeatureMatrix& X, const std::vector<double>& y,
                 const std::vector<std::string>& subset, int k, uint64_t seed,
                 std::vector<std::string>* notices = nullptr);

struct RegressionModel {
  std::vector<std::string> selected;  // in selection order
  std::vector<double> weights;        // on standardized features
  double intercept = 0.0;
  std::vector<double> mse_trace;      // [naive, step1, step2, ...]
  std::vector<double> feature_means;
  std::vector<double> feature_stddevs;
};

RegressionModel incremental_selection(const FeatureMatrix& X,
                                      const std::vector<double>& y, int k,
                                      uint64_t seed, int max_features = -1);

double predict_regression(const RegressionModel& model, const FeatureMatrix& X,
                          int row);

double naive_baseline_mse(const std::vector<double>& y_train,
                          const std::vector<double>& y_test);

double r_squared(const std::vector<double>& y, const std::vector<double>& yhat);

struct PerformanceStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1)
};

PerformanceStats performance_stats(const std::vector<double>& f_values);

}  // namespace framesrl
