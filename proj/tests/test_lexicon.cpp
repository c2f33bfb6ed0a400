#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "framesrl/corpus.hpp"
#include "framesrl/lexicon.hpp"

using namespace framesrl;

namespace {

FrameLexicon parse_lex(const std::string& s) {
  std::istringstream in(s);
  return load_lexicon(in);
}

std::string fes(int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? "," : "") + std::string("Fe") + std::to_string(i);
  return out;
}

}  // namespace

TEST_CASE("load basic lexicon with triggers") {
  auto lex = parse_lex(
      "Statement\tSpeaker,Message,Time\tdire/V,declaration/N\n"
      "Attack\tAssailant,Victim\tattaquer/V\n");
  CHECK(lex.has_frame("Statement"));
  CHECK(!lex.has_frame("Nope"));
  CHECK(lex.compatible_fes("Statement") ==
        std::vector<std::string>{"Speaker", "Message", "Time"});
  CHECK(lex.frames_for_trigger("dire", 'V') == std::set<std::string>{"Statement"});
  CHECK(lex.frames_for_trigger("dire", 'N').empty());
  CHECK(lex.frame_names() == std::vector<std::string>{"Attack", "Statement"});
  CHECK(lex.all_fe_labels() ==
        std::set<std::string>{"Speaker", "Message", "Time", "Assailant", "Victim"});
}

TEST_CASE("ambiguous trigger maps to several frames") {
  auto lex = parse_lex(
      "A\tX\thit/V\n"
      "B\tY\thit/V\n");
  CHECK(lex.frames_for_trigger("hit", 'V') == std::set<std::string>{"A", "B"});
}

TEST_CASE("load errors: duplicate frame, empty FE list, malformed trigger") {
  CHECK_THROWS(parse_lex("A\tX\ta/V\nA\tY\tb/V\n"));
  CHECK_THROWS(parse_lex("A\t\ta/V\n"));
  CHECK_THROWS(parse_lex("A\tX\tnoslash\n"));
  CHECK_THROWS(parse_lex("A\n"));
  FrameLexicon manual;
  manual.add_frame("A", {"X"});
  CHECK_THROWS(manual.add_trigger("a", 'V', "Unknown"));
}

TEST_CASE("frame_size_class boundaries") {
  auto lex = parse_lex("S3\t" + fes(3) + "\ta/V\n" +
                       "S7\t" + fes(7) + "\tb/V\n" +
                       "M8\t" + fes(8) + "\tc/V\n" +
                       "M10\t" + fes(10) + "\td/V\n" +
                       "L11\t" + fes(11) + "\te/V\n");
  CHECK(lex.frame_size_class("S3") == FrameSizeClass::Small);
  CHECK(lex.frame_size_class("S7") == FrameSizeClass::Small);
  CHECK(lex.frame_size_class("M8") == FrameSizeClass::Medium);
  CHECK(lex.frame_size_class("M10") == FrameSizeClass::Medium);
  CHECK(lex.frame_size_class("L11") == FrameSizeClass::Large);
  CHECK(std::string(to_string(FrameSizeClass::Small)) == "Small");
}

TEST_CASE("coarse_pos classes") {
  CHECK(coarse_pos("VERB") == 'V');
  CHECK(coarse_pos("NOUN") == 'N');
  CHECK(coarse_pos("PROPN") == 'N');
  CHECK(coarse_pos("ADJ") == 'X');
  CHECK(coarse_pos("") == 'X');
}

TEST_CASE("serialize round-trips") {
  std::string text =
      "Attack\tAssailant,Victim\tattaquer/V\n"
      "Statement\tSpeaker,Message,Time\tdeclaration/N,dire/V\n";
  auto lex = parse_lex(text);
  std::ostringstream out;
  lex.serialize(out);
  auto again = parse_lex(out.str());
  CHECK(again.frame_names() == lex.frame_names());
  CHECK(again.compatible_fes("Statement") == lex.compatible_fes("Statement"));
  CHECK(again.frames_for_trigger("dire", 'V') == lex.frames_for_trigger("dire", 'V'));
  std::ostringstream out2;
  again.serialize(out2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("LabelSet built from lexicon has O at 0 and B/I closure") {
  auto lex = parse_lex("Attack\tAssailant,Victim\tattaquer/V\n");
  auto labels = LabelSet::from_lexicon(lex);
  CHECK(labels.id("O") == 0);
  CHECK(labels.label(0) == "O");
  // O + (B,I) x (1 frame + 2 FEs)
  CHECK(labels.size() == 7);
  CHECK(labels.find("B-frame:Attack").has_value());
  CHECK(labels.find("I-frame:Attack").has_value());
  CHECK(labels.find("B-fe:Victim").has_value());
  CHECK(labels.find("I-fe:Victim").has_value());
  CHECK(!labels.find("B-fe:Nope").has_value());
  CHECK_THROWS(labels.id("B-fe:Nope"));

  auto parts = LabelSet::parse_label("I-fe:Assailant");
  CHECK(parts.kind == LabelSet::Kind::Fe);
  CHECK(!parts.begin);
  CHECK(parts.name == "Assailant");
  CHECK(LabelSet::parse_label("O").kind == LabelSet::Kind::O);
}

TEST_CASE("toy lexicon file loads") {
  auto lex = load_lexicon_file(std::string(TOY_DATA_DIR) + "/toy.lexicon");
  CHECK(lex.has_frame("Statement"));
  CHECK(lex.has_frame("Attack"));
  CHECK(lex.has_frame("Education_teaching"));
}
