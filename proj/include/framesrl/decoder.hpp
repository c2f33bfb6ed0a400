#pragma once

#include <optional>
#include <string>
#include <vector>

#include "framesrl/corpus.hpp"
#include "framesrl/lexicon.hpp"
#include "framesrl/tagger.hpp"

namespace framesrl {

struct PredictedSpan {
  std::string label;  // bare FE label
  Span span;
  double score = 0.0;  // mean per-token probability of the span's B/I labels

  bool operator==(const PredictedSpan&) const = default;
};

struct PredictedInstance {
  std::string doc_id;
  std::string sent_id;
  Span trigger;
  std::optional<std::string> frame;
  std::vector<PredictedSpan> elements;
};

// Argmax frame over the trigger tokens' summed B+I probability mass; nullopt
// when the O mass exceeds every frame's mass. Ties by lexicographic name.
std::optional<std::string> predict_frame(const TokenPosteriors& posteriors,
                                         const Span& trigger,
                                         const LabelSet& labels);

// Zero FE labels incompatible with `frame` (all FE labels when no frame) and
// renormalize every token row.
TokenPosteriors coherence_filter(const TokenPosteriors& posteriors,
                                 const std::optional<std::string>& frame,
                                 const FrameLexicon& lex, const LabelSet& labels);

std::vector<PredictedSpan> extract_spans(const TokenPosteriors& filtered,
                                         const LabelSet& labels);

std::vector<PredictedSpan> apply_threshold(const std::vector<PredictedSpan>& spans,
                                           double t);

PredictedInstance predict(const Sentence& sent, const Span& trigger,
                          const TaggerParams& params, const Vocabulary& vocab,
                          const FrameLexicon& lex, const LabelSet& labels,
                          double threshold);

// JSONL record round-trip for the prediction output file.
std::string to_jsonl(const PredictedInstance& inst);
PredictedInstance from_jsonl(const std::string& line);

}  // namespace framesrl
