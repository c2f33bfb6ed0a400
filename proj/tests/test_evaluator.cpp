#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "framesrl/evaluator.hpp"

using namespace framesrl;

namespace {

EvalUnit unit(std::vector<PredictedSpan> hyps, std::vector<FrameElement> refs) {
  EvalUnit u;
  u.doc_id = "d";
  u.sent_id = "s";
  u.trigger = {1, 1};
  u.gold_frame = "F";
  u.predicted_frame = "F";
  u.hyps = std::move(hyps);
  u.refs = std::move(refs);
  u.sentence_length = 10;
  u.trigger_upos = "VERB";
  return u;
}

// Random per-label-disjoint span sets for property tests.
EvalUnit random_unit(std::mt19937_64& rng) {
  const std::vector<std::string> labels = {"A", "B", "C"};
  auto gen = [&](auto push) {
    for (const auto& lab : labels) {
      int pos = 1;
      int n = static_cast<int>(rng() % 3);
      for (int i = 0; i < n; ++i) {
        pos += static_cast<int>(rng() % 3);
        int len = 1 + static_cast<int>(rng() % 3);
        push(lab, Span{pos, pos + len - 1});
        pos += len + 1;
      }
    }
  };
  std::vector<PredictedSpan> hyps;
  std::vector<FrameElement> refs;
  gen([&](const std::string& l, Span s) { hyps.push_back({l, s, 0.5}); });
  gen([&](const std::string& l, Span s) { refs.push_back({l, s}); });
  return unit(std::move(hyps), std::move(refs));
}

}  // namespace

TEST_CASE("match_spans: soft / weighted / hard on the Time[3,5] vs Time[5,8] pair") {
  std::vector<PredictedSpan> hyps = {{"Time", {3, 5}, 0.9}};
  std::vector<FrameElement> refs = {{"Time", {5, 8}}};

  auto soft = match_spans(hyps, refs, Metric::Soft);
  REQUIRE(soft.pairs.size() == 1);
  CHECK(soft.pairs[0].precision_credit == 1.0);
  CHECK(soft.pairs[0].recall_credit == 1.0);

  auto weighted = match_spans(hyps, refs, Metric::Weighted);
  REQUIRE(weighted.pairs.size() == 1);
  CHECK(weighted.pairs[0].precision_credit == doctest::Approx(1.0 / 3));
  CHECK(weighted.pairs[0].recall_credit == doctest::Approx(1.0 / 4));

  auto hard = match_spans(hyps, refs, Metric::Hard);
  CHECK(hard.pairs.empty());
  CHECK(hard.unmatched_hyps == std::vector<int>{0});
  CHECK(hard.unmatched_refs == std::vector<int>{0});
}

TEST_CASE("match_spans: label must agree; greedy prefers larger overlap") {
  std::vector<PredictedSpan> hyps = {{"A", {1, 3}, 0.9}};
  std::vector<FrameElement> refs = {{"B", {1, 3}}};
  CHECK(match_spans(hyps, refs, Metric::Soft).pairs.empty());

  // hyp [1,4] overlaps ref1 [1,1] by 1 and ref2 [2,4] by 3: takes ref2
  std::vector<PredictedSpan> h2 = {{"A", {1, 4}, 0.9}};
  std::vector<FrameElement> r2 = {{"A", {1, 1}}, {"A", {2, 4}}};
  auto m = match_spans(h2, r2, Metric::Soft);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].ref == 1);
  CHECK(m.unmatched_refs == std::vector<int>{0});

  // overlapping same-label hyps violate the decoder invariant
  std::vector<PredictedSpan> bad = {{"A", {1, 3}, 0.9}, {"A", {2, 4}, 0.8}};
  CHECK_THROWS(match_spans(bad, r2, Metric::Soft));
}

TEST_CASE("score: exact agreement gives 1.0 under every metric") {
  std::vector<EvalUnit> units = {
      unit({{"A", {1, 2}, 0.9}, {"B", {4, 4}, 0.8}},
           {{"A", {1, 2}}, {"B", {4, 4}}}),
  };
  for (auto m : {Metric::Soft, Metric::Weighted, Metric::Hard}) {
    auto s = score(units, m);
    CHECK(s.precision == doctest::Approx(1.0));
    CHECK(s.recall == doctest::Approx(1.0));
    CHECK(s.f_measure == doctest::Approx(1.0));
  }
}

TEST_CASE("score: weighted credits 1/3 and 1/4 give F = 2/7") {
  std::vector<EvalUnit> units = {unit({{"Time", {3, 5}, 0.9}}, {{"Time", {5, 8}}})};
  auto s = score(units, Metric::Weighted);
  CHECK(s.precision == doctest::Approx(1.0 / 3));
  CHECK(s.recall == doctest::Approx(0.25));
  CHECK(s.f_measure == doctest::Approx(2.0 / 7));  // 0.2857...
  CHECK(s.f_measure == doctest::Approx(0.2857142857142857));
}

TEST_CASE("score: empty hyps flagged degenerate") {
  std::vector<EvalUnit> units = {unit({}, {{"A", {1, 1}}})};
  auto s = score(units, Metric::Soft);
  CHECK(s.precision == 0.0);
  CHECK(s.recall == 0.0);
  CHECK(s.f_measure == 0.0);
  CHECK(s.degenerate);
}

TEST_CASE("metric ordering: F_hard <= F_weighted <= F_soft on random sets") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvalUnit> units;
    for (int u = 0; u < 3; ++u) units.push_back(random_unit(rng));
    double fh = score(units, Metric::Hard).f_measure;
    double fw = score(units, Metric::Weighted).f_measure;
    double fs = score(units, Metric::Soft).f_measure;
    CHECK(fh <= fw + 1e-12);
    CHECK(fw <= fs + 1e-12);
  }
}

TEST_CASE("pr_curve: recall non-increasing, t=0 equals unthresholded") {
  std::vector<EvalUnit> units = {
      unit({{"A", {1, 2}, 0.65}, {"B", {4, 4}, 0.3}},
           {{"A", {1, 2}}, {"B", {4, 4}}, {"C", {6, 6}}}),
  };
  std::vector<double> ts = {0.0, 0.2, 0.5, 0.7, 1.0};
  auto curve = pr_curve(units, Metric::Soft, ts);
  REQUIRE(curve.size() == ts.size());
  CHECK(curve[0].recall == doctest::Approx(score(units, Metric::Soft).recall));
  for (size_t i = 1; i < curve.size(); ++i)
    CHECK(curve[i].recall <= curve[i - 1].recall + 1e-12);
  // hyp with score 0.65 present at t=0.5, absent at t=0.7
  CHECK(curve[1].recall == doctest::Approx(2.0 / 3));  // both hyps at t=0.2
  CHECK(curve[2].recall == doctest::Approx(1.0 / 3));
  CHECK(curve[3].recall == doctest::Approx(0.0));
  CHECK_THROWS(pr_curve(units, Metric::Soft, {0.5, 0.2}));  // not ascending
}

TEST_CASE("frame_accuracy counts exact frame matches") {
  std::vector<EvalUnit> units(4, unit({}, {}));
  units[0].predicted_frame = "F";                 // correct
  units[1].predicted_frame = "G";                 // wrong
  units[2].predicted_frame = std::nullopt;        // none -> wrong
  units[3].predicted_frame = "F";                 // correct
  CHECK(frame_accuracy(units) == doctest::Approx(0.5));
  CHECK(frame_accuracy({}) == 0.0);
}

TEST_CASE("breakdown: shares sum to 1, single group at 100%") {
  std::vector<EvalUnit> units;
  for (int i = 0; i < 5; ++i) {
    auto u = unit({{"A", {2, 2}, 0.9}}, {{"A", {2, 2}}});
    u.trigger_upos = "VERB";
    u.trigger_depth = 0;
    u.sentence_length = 8 + i;
    units.push_back(u);
  }
  auto rows = breakdown(units, Factor::TriggerRoot, Metric::Soft);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].group == "root");
  CHECK(rows[0].share == doctest::Approx(1.0));

  units[0].trigger_upos = "NOUN";
  units[1].trigger_upos = "NOUN";
  auto pos_rows = breakdown(units, Factor::TriggerPos, Metric::Soft);
  double share_sum = 0;
  for (const auto& r : pos_rows) share_sum += r.share;
  CHECK(share_sum == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(pos_rows.size() == 2);

  auto len_rows = breakdown(units, Factor::SentenceLength, Metric::Soft);
  share_sum = 0;
  for (const auto& r : len_rows) share_sum += r.share;
  CHECK(share_sum == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS(factor_from_name("bogus"));
  CHECK(factor_from_name("trigger_pos") == Factor::TriggerPos);
}

TEST_CASE("breakdown by FE label uses ref shares and per-label restriction") {
  std::vector<EvalUnit> units = {
      unit({{"A", {1, 2}, 0.9}}, {{"A", {1, 2}}, {"B", {4, 5}}}),
      unit({{"B", {4, 5}, 0.9}}, {{"B", {4, 5}}}),
  };
  auto rows = breakdown(units, Factor::FeLabel, Metric::Hard);
  REQUIRE(rows.size() == 2);
  double share_sum = 0;
  for (const auto& r : rows) {
    share_sum += r.share;
    CHECK(r.result.precision == doctest::Approx(1.0));
  }
  CHECK(share_sum == doctest::Approx(1.0));
  // B: 2 refs, 1 hyp -> recall 0.5
  for (const auto& r : rows)
    if (r.group == "B") CHECK(r.result.recall == doctest::Approx(0.5));
}

TEST_CASE("fe_vs_traincount joins per-FE F with training counts") {
  std::vector<EvalUnit> units = {
      unit({{"A", {1, 2}, 0.9}}, {{"A", {1, 2}}, {"B", {4, 5}}}),
  };
  auto rows = fe_vs_traincount(units, Metric::Hard, {{"A", 120}, {"B", 3}});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].fe_label == "A");
  CHECK(rows[0].train_count == 120);
  CHECK(rows[0].f_measure == doctest::Approx(1.0));
  CHECK(rows[1].f_measure == doctest::Approx(0.0));
}

TEST_CASE("build_eval_units aligns predictions with gold by trigger") {
  std::istringstream in(
      "# doc_id = d1\n"
      "# source = t\n"
      "# sent_id = s1\n"
      "1\tPierre\tPierre\tPROPN\t_\t2\tnsubj\t_\tB-Speaker\t0\n"
      "2\tdira\tdire\tVERB\t_\t0\troot\tB-Statement\t_\t0\n"
      "3\tnon\tnon\tADV\t_\t2\tadvmod\t_\t_\t0\n");
  auto gold = parse_corpus(in);

  PredictedInstance pred;
  pred.doc_id = "d1";
  pred.sent_id = "s1";
  pred.trigger = {2, 2};
  pred.frame = "Statement";
  pred.elements = {{"Speaker", {1, 1}, 0.9}};
  auto units = build_eval_units(gold, {pred});
  REQUIRE(units.size() == 1);
  CHECK(units[0].gold_frame == "Statement");
  CHECK(units[0].refs.size() == 1);
  CHECK(units[0].hyps.size() == 1);
  CHECK(units[0].sentence_length == 3);
  CHECK(units[0].trigger_upos == "VERB");
  CHECK(units[0].trigger_depth == 0);
  CHECK(frame_accuracy(units) == doctest::Approx(1.0));

  // gold trigger with no prediction still yields a unit with empty hyps
  auto units_none = build_eval_units(gold, {});
  REQUIRE(units_none.size() == 1);
  CHECK(units_none[0].hyps.empty());

  // unaligned prediction is an error
  auto stray = pred;
  stray.trigger = {3, 3};
  CHECK_THROWS(build_eval_units(gold, {stray}));
  // duplicate predictions for one trigger are an error
  CHECK_THROWS(build_eval_units(gold, {pred, pred}));
}

TEST_CASE("median sentence length and root test") {
  std::vector<EvalUnit> units(3, unit({}, {}));
  units[0].sentence_length = 5;
  units[1].sentence_length = 9;
  units[2].sentence_length = 30;
  CHECK(corpus_median_sentence_length(units) == 9);

  Sentence sent;
  for (int i = 1; i <= 3; ++i) {
    Token t;
    t.index = i;
    t.head = i == 2 ? 0 : 2;
    sent.tokens.push_back(t);
  }
  CHECK(trigger_is_root(sent, {2, 2}));
  CHECK(!trigger_is_root(sent, {1, 1}));
  CHECK(trigger_is_root(sent, {1, 2}));  // multi-token trigger containing root
}
