#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framesrl/corpus.hpp"
#include "framesrl/decoder.hpp"
#include "framesrl/lexicon.hpp"

namespace framesrl {

enum class Metric { Soft, Weighted, Hard };

const char* to_string(Metric m);

struct MatchedPair {
  int hyp = -1;  // indices into the unit's hyp/ref lists
  int ref = -1;
  double precision_credit = 0.0;
  double recall_credit = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<int> unmatched_hyps;
  std::vector<int> unmatched_refs;
};

struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double weighted_tp_precision = 0.0;  // sum of precision credits
  double weighted_tp_recall = 0.0;     // sum of recall credits
  long hyp_count = 0;
  long ref_count = 0;
  bool degenerate = false;  // empty hyp or ref set encountered
};

// One (doc, sentence, trigger) scoring unit with metadata for breakdowns.
struct EvalUnit {
  std::string doc_id;
  std::string sent_id;
  Span trigger;
  std::string gold_frame;
  std::optional<std::string> predicted_frame;
  std::vector<PredictedSpan> hyps;
  std::vector<FrameElement> refs;

  // sentence facts captured at unit construction
  int sentence_length = 0;
  std::string trigger_upos;  // of the trigger's first token
  int trigger_depth = 0;     // arcs to root of the trigger's first token
};

MatchResult match_spans(const std::vector<PredictedSpan>& hyps,
                        const std::vector<FrameElement>& refs, Metric metric);

Score score(const std::vector<EvalUnit>& units, Metric metric);
Score score_matches(const std::vector<MatchResult>& matches, long hyp_count,
                    long ref_count);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

std::vector<PrPoint> pr_curve(const std::vector<EvalUnit>& units, Metric metric,
                              const std::vector<double>& thresholds);

double frame_accuracy(const std::vector<EvalUnit>& units);

enum class Factor {
  TriggerPos,       // verbal vs nominal
  TriggerRoot,      // root vs nonroot
  SentenceLength,   // short vs long at corpus median
  FrameSize,        // Small / Medium / Large (needs lexicon)
  FeLabel,          // per FE label found in refs
  LengthRootCross,  // short/long x root/nonroot
};

Factor factor_from_name(const std::string& name);

struct BreakdownRow {
  std::string group;
  double share = 0.0;  // of evaluation units (of refs for FeLabel)
  Score result;
};

std::vector<BreakdownRow> breakdown(const std::vector<EvalUnit>& units,
                                    Factor factor, Metric metric,
                                    const FrameLexicon* lex = nullptr);

struct FeTrainCountRow {
  std::string fe_label;
  long train_count = 0;
  double f_measure = 0.0;
};

std::vector<FeTrainCountRow> fe_vs_traincount(
    const std::vector<EvalUnit>& units, Metric metric,
    const std::map<std::string, long>& train_counts);

// Build units by aligning predictions with gold annotations on
// (doc, sentence, trigger span). Throws when a prediction has no gold trigger.
std::vector<EvalUnit> build_eval_units(const std::vector<Document>& gold,
                                       const std::vector<PredictedInstance>& preds);

int corpus_median_sentence_length(const std::vector<EvalUnit>& units);

// Root test for a trigger span: minimal-depth trigger token has depth 0.
bool trigger_is_root(const Sentence& sent, const Span& trigger);

}  // namespace framesrl
