#include "framesrl/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

namespace framesrl {

std::optional<std::string> predict_frame(const TokenPosteriors& posteriors,
                                         const Span& trigger,
                                         const LabelSet& labels) {
  if (trigger.begin < 1 || trigger.end > static_cast<int>(posteriors.size()))
    throw std::runtime_error("predict_frame: trigger span out of bounds");
  std::map<std::string, double> frame_mass;
  double o_mass = 0.0;
  for (int t = trigger.begin; t <= trigger.end; ++t) {
    const Vector& row = posteriors[t - 1];
    for (int k = 0; k < static_cast<int>(row.size()); ++k) {
      const auto& parts = labels.parts(k);
      if (parts.kind == LabelSet::Kind::Frame)
        frame_mass[parts.name] += row[k];
      else if (parts.kind == LabelSet::Kind::O)
        o_mass += row[k];
    }
  }
  std::optional<std::string> best;
  double best_mass = -1.0;
  for (const auto& [name, mass] : frame_mass) {
    // map order is lexicographic, so strict > keeps the earlier name on ties
    if (mass > best_mass) {
      best_mass = mass;
      best = name;
    }
  }
  if (!best || o_mass > best_mass) return std::nullopt;
  return best;
}

TokenPosteriors coherence_filter(const TokenPosteriors& posteriors,
                                 const std::optional<std::string>& frame,
                                 const FrameLexicon& lex, const LabelSet& labels) {
  std::vector<bool> keep(labels.size(), true);
  const std::vector<std::string>* fes = nullptr;
  if (frame) fes = &lex.compatible_fes(*frame);
  for (int k = 0; k < labels.size(); ++k) {
    const auto& parts = labels.parts(k);
    if (parts.kind != LabelSet::Kind::Fe) continue;
    if (!frame) {
      keep[k] = false;
    } else {
      keep[k] = std::find(fes->begin(), fes->end(), parts.name) != fes->end();
    }
  }
  TokenPosteriors out = posteriors;
  for (auto& row : out) {
    double z = 0.0;
    for (int k = 0; k < static_cast<int>(row.size()); ++k) {
      if (!keep[k]) row[k] = 0.0;
      z += row[k];
    }
    if (z > 0.0)
      for (auto& v : row) v /= z;
  }
  return out;
}

std::vector<PredictedSpan> extract_spans(const TokenPosteriors& filtered,
                                         const LabelSet& labels) {
  int T = static_cast<int>(filtered.size());
  std::vector<PredictedSpan> spans;
  std::string open_label;
  double open_sum = 0.0;
  int open_begin = 0, open_len = 0;

  auto close = [&](int end) {
    if (open_len == 0) return;
    spans.push_back({open_label, {open_begin, end}, open_sum / open_len});
    open_len = 0;
    open_label.clear();
  };

  for (int t = 0; t < T; ++t) {
    const Vector& row = filtered[t];
    int argmax = 0;
    for (int k = 1; k < static_cast<int>(row.size()); ++k)
      if (row[k] > row[argmax]) argmax = k;
    const auto& parts = labels.parts(argmax);
    if (parts.kind != LabelSet::Kind::Fe) {
      close(t);
      continue;
    }
    bool continues = !parts.begin && open_len > 0 && open_label == parts.name;
    if (!continues) close(t);  // orphan I-X repaired by opening a new span
    if (continues) {
      open_sum += row[argmax];
      ++open_len;
    } else {
      open_label = parts.name;
      open_begin = t + 1;
      open_sum = row[argmax];
      open_len = 1;
    }
  }
  close(T);
  return spans;
}

std::vector<PredictedSpan> apply_threshold(const std::vector<PredictedSpan>& spans,
                                           double t) {
  if (t < 0.0 || t > 1.0) throw std::runtime_error("threshold must be in [0,1]");
  std::vector<PredictedSpan> out;
  for (const auto& s : spans)
    if (s.score >= t) out.push_back(s);
  return out;
}

PredictedInstance predict(const Sentence& sent, const Span& trigger,
                          const TaggerParams& params, const Vocabulary& vocab,
                          const FrameLexicon& lex, const LabelSet& labels,
                          double threshold) {
  auto enc = encode(sent, trigger, vocab);
  auto posteriors = predict_posteriors(params, enc);
  auto frame = predict_frame(posteriors, trigger, labels);
  auto filtered = coherence_filter(posteriors, frame, lex, labels);
  auto spans = apply_threshold(extract_spans(filtered, labels), threshold);
  PredictedInstance inst;
  inst.sent_id = sent.id;
  inst.trigger = trigger;
  inst.frame = frame;
  inst.elements = std::move(spans);
  return inst;
}

std::string to_jsonl(const PredictedInstance& inst) {
  nlohmann::json j;
  j["doc"] = inst.doc_id;
  j["sent"] = inst.sent_id;
  j["trigger"] = {inst.trigger.begin, inst.trigger.end};
  if (inst.frame)
    j["frame"] = *inst.frame;
  else
    j["frame"] = nullptr;
  nlohmann::json els = nlohmann::json::array();
  for (const auto& e : inst.elements) {
    els.push_back({{"label", e.label},
                   {"span", {e.span.begin, e.span.end}},
                   {"score", e.score}});
  }
  j["elements"] = els;
  return j.dump();
}

PredictedInstance from_jsonl(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  PredictedInstance inst;
  inst.doc_id = j.at("doc").get<std::string>();
  inst.sent_id = j.at("sent").get<std::string>();
  inst.trigger = {j.at("trigger")[0].get<int>(), j.at("trigger")[1].get<int>()};
  if (!j.at("frame").is_null()) inst.frame = j.at("frame").get<std::string>();
  for (const auto& e : j.at("elements")) {
    PredictedSpan s;
    s.label = e.at("label").get<std::string>();
    s.span = {e.at("span")[0].get<int>(), e.at("span")[1].get<int>()};
    s.score = e.at("score").get<double>();
    inst.elements.push_back(std::move(s));
  }
  return inst;
}

}  // namespace framesrl
