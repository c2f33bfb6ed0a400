#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "framesrl/decoder.hpp"

using namespace framesrl;

namespace {

FrameLexicon two_frame_lexicon() {
  std::istringstream in(
      "Statement\tSpeaker,Message,Time\tdire/V\n"
      "Education_teaching\tStudent,Teacher\tenseigner/V\n");
  return load_lexicon(in);
}

LabelSet labels_for(const FrameLexicon& lex) { return LabelSet::from_lexicon(lex); }

// Posterior row with everything zero except the given (label, prob) pairs;
// remaining mass goes to O.
Vector row(const LabelSet& labels,
           const std::vector<std::pair<std::string, double>>& probs) {
  Vector r(labels.size(), 0.0);
  double used = 0.0;
  for (const auto& [lab, p] : probs) {
    r[labels.id(lab)] = p;
    used += p;
  }
  r[labels.id("O")] += 1.0 - used;
  return r;
}

}  // namespace

TEST_CASE("predict_frame: argmax of summed B+I mass at the trigger") {
  auto lex = two_frame_lexicon();
  auto labels = labels_for(lex);
  TokenPosteriors post = {
      row(labels, {{"B-frame:Statement", 0.5}, {"B-frame:Education_teaching", 0.2}}),
  };
  CHECK(predict_frame(post, {1, 1}, labels) == std::optional<std::string>("Statement"));

  // B and I mass add up
  TokenPosteriors post2 = {
      row(labels, {{"B-frame:Statement", 0.3},
                   {"I-frame:Education_teaching", 0.25},
                   {"B-frame:Education_teaching", 0.25}}),
  };
  CHECK(predict_frame(post2, {1, 1}, labels) ==
        std::optional<std::string>("Education_teaching"));

  // O dominates every frame -> none
  TokenPosteriors post3 = {
      row(labels, {{"B-frame:Statement", 0.2}, {"B-frame:Education_teaching", 0.1}}),
  };
  CHECK(!predict_frame(post3, {1, 1}, labels).has_value());

  // exact tie -> lexicographically first frame
  TokenPosteriors post4 = {
      row(labels, {{"B-frame:Statement", 0.4}, {"B-frame:Education_teaching", 0.4}}),
  };
  CHECK(predict_frame(post4, {1, 1}, labels) ==
        std::optional<std::string>("Education_teaching"));
}

TEST_CASE("coherence_filter zeroes incompatible FEs and renormalizes") {
  auto lex = two_frame_lexicon();
  auto labels = labels_for(lex);
  // Student is not an FE of Statement: 0.4/0.3/0.3 -> 0/0.5/0.5
  TokenPosteriors post = {
      row(labels, {{"B-fe:Student", 0.4}, {"B-fe:Speaker", 0.3}}),
  };
  auto filtered = coherence_filter(post, std::string("Statement"), lex, labels);
  CHECK(filtered[0][labels.id("B-fe:Student")] == doctest::Approx(0.0));
  CHECK(filtered[0][labels.id("B-fe:Speaker")] == doctest::Approx(0.5));
  CHECK(filtered[0][labels.id("O")] == doctest::Approx(0.5));

  // no frame -> every FE label zeroed
  auto none = coherence_filter(post, std::nullopt, lex, labels);
  CHECK(none[0][labels.id("B-fe:Speaker")] == doctest::Approx(0.0));
  CHECK(none[0][labels.id("O")] > 0.9);

  // rows remain distributions
  for (const auto& r : filtered) {
    double s = 0;
    for (double v : r) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("extract_spans: argmax BIO grouping with mean score") {
  auto lex = two_frame_lexicon();
  auto labels = labels_for(lex);
  // [O, B-fe:Time, I-fe:Time, O] with probs 0.7, 0.6 -> Time[2,3] score 0.65
  TokenPosteriors post = {
      row(labels, {}),
      row(labels, {{"B-fe:Time", 0.7}}),
      row(labels, {{"I-fe:Time", 0.6}}),
      row(labels, {}),
  };
  auto spans = extract_spans(post, labels);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].label == "Time");
  CHECK(spans[0].span == Span{2, 3});
  CHECK(spans[0].score == doctest::Approx(0.65));
}

TEST_CASE("extract_spans repairs an orphan I as a span start") {
  auto lex = two_frame_lexicon();
  auto labels = labels_for(lex);
  TokenPosteriors post = {
      row(labels, {}),
      row(labels, {{"I-fe:Time", 0.8}}),  // orphan inside
      row(labels, {{"I-fe:Time", 0.6}}),
  };
  auto spans = extract_spans(post, labels);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].span == Span{2, 3});

  // label switch inside an I-chain starts a new span
  TokenPosteriors post2 = {
      row(labels, {{"B-fe:Time", 0.9}}),
      row(labels, {{"I-fe:Speaker", 0.9}}),
  };
  auto spans2 = extract_spans(post2, labels);
  REQUIRE(spans2.size() == 2);
  CHECK(spans2[0].label == "Time");
  CHECK(spans2[1].label == "Speaker");
  CHECK(spans2[1].span == Span{2, 2});

  // spans are pairwise disjoint
  for (size_t i = 0; i < spans2.size(); ++i)
    for (size_t j = i + 1; j < spans2.size(); ++j)
      CHECK(!spans2[i].span.overlaps(spans2[j].span));
}

TEST_CASE("apply_threshold keeps spans scoring >= t and is monotone") {
  std::vector<PredictedSpan> spans = {
      {"A", {1, 2}, 0.65},
      {"B", {4, 4}, 0.4},
  };
  CHECK(apply_threshold(spans, 0.5).size() == 1);
  CHECK(apply_threshold(spans, 0.0).size() == 2);
  CHECK(apply_threshold(spans, 0.65).size() == 1);  // inclusive
  CHECK(apply_threshold(spans, 0.7).empty());
  CHECK_THROWS(apply_threshold(spans, -0.1));
  CHECK_THROWS(apply_threshold(spans, 1.5));

  // monotone: t1 <= t2 -> result(t2) subset of result(t1)
  for (double t1 = 0.0; t1 <= 1.0; t1 += 0.25)
    for (double t2 = t1; t2 <= 1.0; t2 += 0.25) {
      auto a = apply_threshold(spans, t1);
      auto b = apply_threshold(spans, t2);
      for (const auto& s : b)
        CHECK(std::find(a.begin(), a.end(), s) != a.end());
    }
}

TEST_CASE("JSONL round-trip for predicted instances") {
  PredictedInstance inst;
  inst.doc_id = "doc1";
  inst.sent_id = "s2";
  inst.trigger = {3, 3};
  inst.frame = "Statement";
  inst.elements = {{"Speaker", {1, 2}, 0.875}, {"Time", {5, 6}, 0.5}};
  auto line = to_jsonl(inst);
  CHECK(line.find('\n') == std::string::npos);
  auto back = from_jsonl(line);
  CHECK(back.doc_id == inst.doc_id);
  CHECK(back.sent_id == inst.sent_id);
  CHECK(back.trigger == inst.trigger);
  CHECK(back.frame == inst.frame);
  CHECK(back.elements == inst.elements);

  // nullable frame
  inst.frame = std::nullopt;
  inst.elements.clear();
  auto back2 = from_jsonl(to_jsonl(inst));
  CHECK(!back2.frame.has_value());
  CHECK(back2.elements.empty());
}

TEST_CASE("predict composes the full pipeline") {
  auto lex = two_frame_lexicon();
  auto labels = labels_for(lex);

  Sentence sent;
  sent.id = "s";
  std::vector<std::string> forms = {"Pierre", "dira", "non"};
  for (int i = 1; i <= 3; ++i) {
    Token t;
    t.index = i;
    t.form = forms[i - 1];
    t.lemma = forms[i - 1];
    t.upos = i == 2 ? "VERB" : "PROPN";
    t.head = i == 2 ? 0 : 2;
    t.deprel = i == 2 ? "root" : "dep";
    sent.tokens.push_back(t);
  }

  std::vector<TaggingSample> train_samples(1);
  train_samples[0].sentence = sent;
  train_samples[0].trigger = {2, 2};
  train_samples[0].gold_labels = {"O", "O", "O"};
  auto vocab = build_vocabularies(train_samples, 1);

  TaggerConfig cfg;
  cfg.hidden = 4;
  cfg.channel_dims = {4, 2, 2, 2, 2, 2, 2};
  auto params = init_params(cfg, vocab, labels.size(), 3);
  auto inst = predict(sent, {2, 2}, params, vocab, lex, labels, 0.0);
  CHECK(inst.trigger == Span{2, 2});
  // coherence: every emitted FE is admissible for the predicted frame
  if (inst.frame) {
    const auto& ok = lex.compatible_fes(*inst.frame);
    for (const auto& e : inst.elements)
      CHECK(std::find(ok.begin(), ok.end(), e.label) != ok.end());
  } else {
    CHECK(inst.elements.empty());
  }
}
