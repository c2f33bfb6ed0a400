#include "framesrl/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

namespace framesrl {

const char* to_string(Metric m) {
  switch (m) {
    case Metric::Soft: return "soft";
    case Metric::Weighted: return "weighted";
    case Metric::Hard: return "hard";
  }
  return "?";
}

namespace {

int overlap(const Span& a, const Span& b) {
  int lo = std::max(a.begin, b.begin);
  int hi = std::min(a.end, b.end);
  return std::max(0, hi - lo + 1);
}

}  // namespace

MatchResult match_spans(const std::vector<PredictedSpan>& hyps,
                        const std::vector<FrameElement>& refs, Metric metric) {
  for (size_t i = 0; i < hyps.size(); ++i)
    for (size_t j = i + 1; j < hyps.size(); ++j)
      if (hyps[i].label == hyps[j].label && hyps[i].span.overlaps(hyps[j].span))
        throw std::runtime_error(
            "match_spans: overlapping hypothesis spans with identical label");

  struct Candidate {
    int ov;
    int ref;
    int hyp;
  };
  std::vector<Candidate> cands;
  for (int h = 0; h < static_cast<int>(hyps.size()); ++h) {
    for (int r = 0; r < static_cast<int>(refs.size()); ++r) {
      if (hyps[h].label != refs[r].label) continue;
      int ov = overlap(hyps[h].span, refs[r].span);
      if (ov < 1) continue;
      if (metric == Metric::Hard && !(hyps[h].span == refs[r].span)) continue;
      cands.push_back({ov, r, h});
    }
  }
  // descending overlap, ties by earlier ref start then earlier hyp start
  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.ov != b.ov) return a.ov > b.ov;
    if (refs[a.ref].span.begin != refs[b.ref].span.begin)
      return refs[a.ref].span.begin < refs[b.ref].span.begin;
    return hyps[a.hyp].span.begin < hyps[b.hyp].span.begin;
  });

  MatchResult res;
  std::vector<bool> hyp_used(hyps.size(), false), ref_used(refs.size(), false);
  for (const auto& c : cands) {
    if (hyp_used[c.hyp] || ref_used[c.ref]) continue;
    hyp_used[c.hyp] = true;
    ref_used[c.ref] = true;
    MatchedPair pair;
    pair.hyp = c.hyp;
    pair.ref = c.ref;
    if (metric == Metric::Weighted) {
      pair.precision_credit = static_cast<double>(c.ov) / hyps[c.hyp].span.length();
      pair.recall_credit = static_cast<double>(c.ov) / refs[c.ref].span.length();
    } else {
      pair.precision_credit = 1.0;
      pair.recall_credit = 1.0;
    }
    res.pairs.push_back(pair);
  }
  for (int h = 0; h < static_cast<int>(hyps.size()); ++h)
    if (!hyp_used[h]) res.unmatched_hyps.push_back(h);
  for (int r = 0; r < static_cast<int>(refs.size()); ++r)
    if (!ref_used[r]) res.unmatched_refs.push_back(r);
  return res;
}

Score score_matches(const std::vector<MatchResult>& matches, long hyp_count,
                    long ref_count) {
  Score s;
  s.hyp_count = hyp_count;
  s.ref_count = ref_count;
  for (const auto& m : matches) {
    for (const auto& p : m.pairs) {
      s.weighted_tp_precision += p.precision_credit;
      s.weighted_tp_recall += p.recall_credit;
    }
  }
  if (hyp_count > 0) s.precision = s.weighted_tp_precision / hyp_count;
  if (ref_count > 0) s.recall = s.weighted_tp_recall / ref_count;
  s.degenerate = hyp_count == 0 || ref_count == 0;
  double pr = s.precision + s.recall;
  s.f_measure = pr > 0 ? 2.0 * s.precision * s.recall / pr : 0.0;
  return s;
}

Score score(const std::vector<EvalUnit>& units, Metric metric) {
  std::vector<MatchResult> matches;
  long hyp_count = 0, ref_count = 0;
  for (const auto& u : units) {
    matches.push_back(match_spans(u.hyps, u.refs, metric));
    hyp_count += static_cast<long>(u.hyps.size());
    ref_count += static_cast<long>(u.refs.size());
  }
  return score_matches(matches, hyp_count, ref_count);
}

std::vector<PrPoint> pr_curve(const std::vector<EvalUnit>& units, Metric metric,
                              const std::vector<double>& thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw std::runtime_error("pr_curve: thresholds must be sorted ascending");
  std::vector<PrPoint> out;
  for (double t : thresholds) {
    std::vector<EvalUnit> cut = units;
    for (auto& u : cut) u.hyps = apply_threshold(u.hyps, t);
    Score s = score(cut, metric);
    out.push_back({t, s.precision, s.recall, s.f_measure});
  }
  return out;
}

double frame_accuracy(const std::vector<EvalUnit>& units) {
  if (units.empty()) return 0.0;
  long correct = 0;
  for (const auto& u : units)
    if (u.predicted_frame && *u.predicted_frame == u.gold_frame) ++correct;
  return static_cast<double>(correct) / units.size();
}

Factor factor_from_name(const std::string& name) {
  if (name == "trigger_pos") return Factor::TriggerPos;
  if (name == "trigger_root") return Factor::TriggerRoot;
  if (name == "sentence_length") return Factor::SentenceLength;
  if (name == "frame_size") return Factor::FrameSize;
  if (name == "fe_label") return Factor::FeLabel;
  if (name == "length_root_cross") return Factor::LengthRootCross;
  throw std::runtime_error("unknown breakdown factor: " + name);
}

namespace {

std::vector<BreakdownRow> group_units(
    const std::vector<EvalUnit>& units, Metric metric,
    const std::function<std::string(const EvalUnit&)>& key) {
  std::map<std::string, std::vector<EvalUnit>> groups;
  for (const auto& u : units) groups[key(u)].push_back(u);
  std::vector<BreakdownRow> rows;
  for (const auto& [name, members] : groups) {
    BreakdownRow row;
    row.group = name;
    row.share = units.empty() ? 0.0
                              : static_cast<double>(members.size()) / units.size();
    row.result = score(members, metric);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<BreakdownRow> breakdown(const std::vector<EvalUnit>& units,
                                    Factor factor, Metric metric,
                                    const FrameLexicon* lex) {
  switch (factor) {
    case Factor::TriggerPos:
      return group_units(units, metric, [](const EvalUnit& u) {
        return coarse_pos(u.trigger_upos) == 'V' ? std::string("verbal")
                                                 : std::string("nominal");
      });
    case Factor::TriggerRoot:
      return group_units(units, metric, [](const EvalUnit& u) {
        return u.trigger_depth == 0 ? std::string("root") : std::string("nonroot");
      });
    case Factor::SentenceLength: {
      int median = corpus_median_sentence_length(units);
      return group_units(units, metric, [median](const EvalUnit& u) {
        return u.sentence_length < median ? std::string("short")
                                          : std::string("long");
      });
    }
    case Factor::FrameSize: {
      if (!lex) throw std::runtime_error("frame_size breakdown needs a lexicon");
      return group_units(units, metric, [lex](const EvalUnit& u) {
        return std::string(to_string(lex->frame_size_class(u.gold_frame)));
      });
    }
    case Factor::LengthRootCross: {
      int median = corpus_median_sentence_length(units);
      return group_units(units, metric, [median](const EvalUnit& u) {
        std::string len = u.sentence_length < median ? "short" : "long";
        std::string root = u.trigger_depth == 0 ? "root" : "nonroot";
        return len + "_" + root;
      });
    }
    case Factor::FeLabel: {
      // per-label scoring: restrict hyps and refs of every unit to one label
      std::set<std::string> fe_labels;
      long total_refs = 0;
      for (const auto& u : units) {
        for (const auto& r : u.refs) {
          fe_labels.insert(r.label);
          ++total_refs;
        }
      }
      std::vector<BreakdownRow> rows;
      for (const auto& label : fe_labels) {
        std::vector<EvalUnit> cut;
        long label_refs = 0;
        for (const auto& u : units) {
          EvalUnit v = u;
          std::erase_if(v.hyps,
                        [&](const PredictedSpan& s) { return s.label != label; });
          std::erase_if(v.refs,
                        [&](const FrameElement& r) { return r.label != label; });
          label_refs += static_cast<long>(v.refs.size());
          if (!v.hyps.empty() || !v.refs.empty()) cut.push_back(std::move(v));
        }
        BreakdownRow row;
        row.group = label;
        row.share = total_refs == 0
                        ? 0.0
                        : static_cast<double>(label_refs) / total_refs;
        row.result = score(cut, metric);
        rows.push_back(std::move(row));
      }
      return rows;
    }
  }
  throw std::runtime_error("unknown breakdown factor");
}

std::vector<FeTrainCountRow> fe_vs_traincount(
    const std::vector<EvalUnit>& units, Metric metric,
    const std::map<std::string, long>& train_counts) {
  std::vector<FeTrainCountRow> rows;
  for (const auto& b : breakdown(units, Factor::FeLabel, metric)) {
    bool in_refs = false;
    for (const auto& u : units)
      for (const auto& r : u.refs)
        if (r.label == b.group) in_refs = true;
    if (!in_refs) continue;
    FeTrainCountRow row;
    row.fe_label = b.group;
    auto it = train_counts.find(b.group);
    row.train_count = it == train_counts.end() ? 0 : it->second;
    row.f_measure = b.result.f_measure;
    rows.push_back(std::move(row));
  }
  return rows;
}

bool trigger_is_root(const Sentence& sent, const Span& trigger) {
  int min_depth = sent.size() + 1;
  for (int i = trigger.begin; i <= trigger.end; ++i)
    min_depth = std::min(min_depth, token_depth(sent, i));
  return min_depth == 0;
}

std::vector<EvalUnit> build_eval_units(const std::vector<Document>& gold,
                                       const std::vector<PredictedInstance>& preds) {
  struct Key {
    std::string doc, sent;
    Span trigger;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, const PredictedInstance*> pred_map;
  for (const auto& p : preds) {
    Key k{p.doc_id, p.sent_id, p.trigger};
    if (pred_map.count(k))
      throw std::runtime_error("duplicate prediction for doc " + p.doc_id +
                               " sentence " + p.sent_id);
    pred_map[k] = &p;
  }

  std::vector<EvalUnit> units;
  size_t aligned = 0;
  for (const auto& doc : gold) {
    for (const auto& [sid, insts] : doc.annotations) {
      const Sentence* sent = doc.find_sentence(sid);
      if (!sent) throw std::runtime_error("annotation for unknown sentence " + sid);
      for (const auto& inst : insts) {
        EvalUnit u;
        u.doc_id = doc.id;
        u.sent_id = sid;
        u.trigger = inst.trigger;
        u.gold_frame = inst.frame;
        u.refs = inst.elements;
        u.sentence_length = sent->size();
        u.trigger_upos = sent->tokens[inst.trigger.begin - 1].upos;
        u.trigger_depth = trigger_is_root(*sent, inst.trigger)
                              ? 0
                              : token_depth(*sent, inst.trigger.begin);
        auto it = pred_map.find({doc.id, sid, inst.trigger});
        if (it != pred_map.end()) {
          u.predicted_frame = it->second->frame;
          u.hyps = it->second->elements;
          ++aligned;
        }
        units.push_back(std::move(u));
      }
    }
  }
  if (aligned != pred_map.size())
    throw std::runtime_error(
        "prediction/gold alignment failure: " +
        std::to_string(pred_map.size() - aligned) +
        " predictions have no matching gold (doc, sentence, trigger)");
  return units;
}

int corpus_median_sentence_length(const std::vector<EvalUnit>& units) {
  if (units.empty()) return 0;
  std::vector<int> lens;
  lens.reserve(units.size());
  for (const auto& u : units) lens.push_back(u.sentence_length);
  std::sort(lens.begin(), lens.end());
  return lens[lens.size() / 2];
}

}  // namespace framesrl
