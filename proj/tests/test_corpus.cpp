#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "framesrl/corpus.hpp"
#include "framesrl/lexicon.hpp"
#include "framesrl/synth.hpp"

using namespace framesrl;

namespace {

const char* kMinimal =
    "# doc_id = d1\n"
    "# source = test\n"
    "# sent_id = s1\n"
    "1\tPierre\tPierre\tPROPN\t_\t2\tnsubj\t_\tB-Speaker\t0\n"
    "2\tdira\tdire\tVERB\tTense=Fut\t0\troot\tB-Statement\t_\t0\n"
    "3\tnon\tnon\tADV\t_\t2\tadvmod\t_\t_\t0\n";

std::vector<Document> parse_str(const std::string& s) {
  std::istringstream in(s);
  return parse_corpus(in);
}

FrameLexicon toy_lexicon() {
  std::istringstream in(
      "Statement\tSpeaker,Message,Time\tdire/V\n"
      "Attack\tAssailant,Victim\tattaquer/V\n");
  return load_lexicon(in);
}

}  // namespace

TEST_CASE("parse minimal well-formed corpus") {
  auto docs = parse_str(kMinimal);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].id == "d1");
  CHECK(docs[0].source == "test");
  REQUIRE(docs[0].sentences.size() == 1);
  CHECK(docs[0].sentences[0].size() == 3);
  REQUIRE(docs[0].annotations.count("s1") == 1);
  const auto& inst = docs[0].annotations.at("s1")[0];
  CHECK(inst.frame == "Statement");
  CHECK(inst.trigger == Span{2, 2});
  REQUIRE(inst.elements.size() == 1);
  CHECK(inst.elements[0].label == "Speaker");
  CHECK(inst.elements[0].span == Span{1, 1});
}

TEST_CASE("empty stream yields empty corpus") {
  CHECK(parse_str("").empty());
}

TEST_CASE("dangling head is reported with line number") {
  std::string bad =
      "# doc_id = d\n# sent_id = s\n"
      "1\ta\ta\tNOUN\t_\t2\tdet\t_\t_\t0\n"
      "2\tb\tb\tVERB\t_\t0\troot\t_\t_\t0\n"
      "3\tc\tc\tNOUN\t_\t9\tobj\t_\t_\t0\n"
      "4\td\td\tNOUN\t_\t2\tobj\t_\t_\t0\n"
      "5\te\te\tPUNCT\t_\t2\tpunct\t_\t_\t0\n";
  try {
    parse_str(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 5);  // the token-3 line
    CHECK(std::string(e.what()).find("head") != std::string::npos);
  }
}

TEST_CASE("wrong column count, non-contiguous index, self-head") {
  CHECK_THROWS_AS(parse_str("# doc_id = d\n# sent_id = s\n1\ta\ta\tX\t_\t0\n"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_str("# doc_id = d\n# sent_id = s\n"
                "2\ta\ta\tNOUN\t_\t0\troot\t_\t_\t0\n"),
      ParseError);
  CHECK_THROWS_AS(
      parse_str("# doc_id = d\n# sent_id = s\n"
                "1\ta\ta\tNOUN\t_\t1\troot\t_\t_\t0\n"),
      ParseError);
}

TEST_CASE("round-trip: serialize then reparse is value-identical") {
  auto docs = parse_str(kMinimal);
  auto again = parse_str(serialize_corpus(docs));
  CHECK(docs == again);

  auto toy = parse_corpus_file(std::string(TOY_DATA_DIR) + "/toy.corpus");
  CHECK(toy.size() == 2);
  CHECK(parse_str(serialize_corpus(toy)) == toy);
}

TEST_CASE("validate_document flags inadmissible FEs and unknown frames") {
  auto lex = toy_lexicon();
  auto docs = parse_str(kMinimal);
  CHECK(validate_document(docs[0], lex).empty());

  auto bad_fe = docs;
  bad_fe[0].annotations["s1"][0].elements[0].label = "Student";
  auto issues = validate_document(bad_fe[0], lex);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].label == "Student");

  auto bad_frame = docs;
  bad_frame[0].annotations["s1"][0].frame = "Nonexistent";
  CHECK(validate_document(bad_frame[0], lex).size() == 1);
}

TEST_CASE("generate_samples: one sample per instance, others O") {
  // 6-token sentence, trigger [4,4], FE Speaker [1,2]
  Sentence sent;
  sent.id = "s";
  for (int i = 1; i <= 6; ++i)
    sent.tokens.push_back({i, "w", "w", "NOUN", {}, i == 3 ? 0 : 3, "dep"});
  FrameInstance inst{{4, 4}, "X", {{"Speaker", {1, 2}}}};
  auto labels = bio_labels(sent, inst);
  CHECK(labels == std::vector<std::string>{"B-fe:Speaker", "I-fe:Speaker", "O",
                                           "B-frame:X", "O", "O"});

  Document doc;
  doc.id = "d";
  doc.sentences = {sent};
  doc.annotations["s"] = {inst, FrameInstance{{3, 3}, "Y", {}}};
  auto samples = generate_samples(doc);
  REQUIRE(samples.size() == 2);
  // each sample labels only its own instance
  CHECK(samples[0].gold_labels[2] == "O");
  CHECK(samples[1].gold_labels[3] == "O");
  CHECK(samples[1].gold_labels[2] == "B-frame:Y");
  for (const auto& s : samples) CHECK(bio_valid(s.gold_labels));
}

TEST_CASE("generate_samples rejects overlapping spans") {
  Sentence sent;
  sent.id = "s";
  for (int i = 1; i <= 4; ++i)
    sent.tokens.push_back({i, "w", "w", "NOUN", {}, i == 1 ? 0 : 1, "dep"});
  FrameInstance inst{{2, 2}, "X", {{"A", {3, 4}}, {"B", {4, 4}}}};
  CHECK_THROWS(bio_labels(sent, inst));
}

TEST_CASE("sample count equals instance count over a synthetic corpus") {
  SynthConfig cfg;
  cfg.num_docs = 5;
  cfg.sentences_per_doc = 6;
  auto docs = synth_corpus(cfg, 11);
  int instances = 0;
  for (const auto& d : docs) instances += d.trigger_count();
  CHECK(static_cast<int>(generate_samples(docs).size()) == instances);
}

TEST_CASE("split_corpus: stratified, deterministic, errors on tiny corpora") {
  SynthConfig cfg;
  cfg.num_docs = 100;
  cfg.sentences_per_doc = 4;
  cfg.num_frames = 3;
  auto docs = synth_corpus(cfg, 3);

  auto split = split_corpus(docs, 0.2, 99);
  CHECK(split.test.size() == 20);
  CHECK(split.train.size() == 80);

  std::map<std::string, int> total, test_counts;
  for (const auto& d : docs)
    for (const auto& [sid, insts] : d.annotations)
      for (const auto& i : insts) ++total[i.frame];
  for (const auto& d : split.test)
    for (const auto& [sid, insts] : d.annotations)
      for (const auto& i : insts) ++test_counts[i.frame];
  for (const auto& [f, tot] : total) {
    if (tot < 5) continue;
    double share = static_cast<double>(test_counts[f]) / tot;
    CHECK(share >= 0.10);
    CHECK(share <= 0.30);
  }

  auto split2 = split_corpus(docs, 0.2, 99);
  CHECK(split.test == split2.test);

  CHECK_THROWS(split_corpus({docs[0]}, 0.2, 1));
}

TEST_CASE("kfold_split partitions the corpus") {
  SynthConfig cfg;
  cfg.num_docs = 10;
  cfg.sentences_per_doc = 2;
  auto docs = synth_corpus(cfg, 5);
  auto folds = kfold_split(docs, 5, 17);
  REQUIRE(folds.size() == 5);
  std::set<std::string> seen;
  for (const auto& f : folds) {
    CHECK(f.test.size() == 2);
    CHECK(f.train.size() == 8);
    for (const auto& d : f.test) CHECK(seen.insert(d.id).second);
  }
  CHECK(seen.size() == docs.size());
  auto folds2 = kfold_split(docs, 5, 17);
  CHECK(folds[0].test == folds2[0].test);
  CHECK_THROWS(kfold_split(docs, 11, 1));
}

TEST_CASE("synth_corpus honors its knobs") {
  SynthConfig cfg;
  cfg.num_docs = 10;
  cfg.sentences_per_doc = 10;
  cfg.root_trigger_fraction = 1.0;
  cfg.mean_sentence_length = 10.0;
  auto docs = synth_corpus(cfg, 21);

  double len_sum = 0;
  long sent_count = 0;
  for (const auto& d : docs) {
    for (const auto& [sid, insts] : d.annotations) {
      const Sentence* s = d.find_sentence(sid);
      for (const auto& inst : insts)
        CHECK(s->tokens[inst.trigger.begin - 1].head == 0);
    }
    for (const auto& s : d.sentences) {
      len_sum += s.size();
      ++sent_count;
    }
  }
  double mean_len = len_sum / sent_count;
  CHECK(mean_len >= 9.0);
  CHECK(mean_len <= 11.0);

  // byte-identical serialization for a fixed seed
  CHECK(serialize_corpus(synth_corpus(cfg, 8)) ==
        serialize_corpus(synth_corpus(cfg, 8)));
  // infeasible config
  SynthConfig bad = cfg;
  bad.mean_sentence_length = 2;
  bad.max_fes_per_instance = 4;
  CHECK_THROWS(synth_corpus(bad, 1));
}

TEST_CASE("synthetic corpora parse and round-trip") {
  SynthConfig cfg;
  cfg.num_docs = 4;
  cfg.sentences_per_doc = 4;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto docs = synth_corpus(cfg, seed);
    auto lex = synth_lexicon(cfg);
    for (const auto& d : docs) CHECK(validate_document(d, lex).empty());
    auto reparsed = parse_str(serialize_corpus(docs));
    CHECK(reparsed == docs);
  }
}
