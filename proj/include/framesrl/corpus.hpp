#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace framesrl {

class FrameLexicon;

// 1-based inclusive token index range.
struct Span {
  int begin = 0;
  int end = 0;

  int length() const { return end - begin + 1; }
  bool contains(int i) const { return i >= begin && i <= end; }
  bool overlaps(const Span& o) const { return begin <= o.end && o.begin <= end; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

struct Token {
  int index = 0;  // 1-based position in sentence
  std::string form;
  std::string lemma;
  std::string upos;
  std::vector<std::string> morph;  // key=value strings
  int head = 0;                    // 0 = syntactic root
  std::string deprel;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  bool operator==(const Sentence&) const = default;
};

struct FrameElement {
  std::string label;
  Span span;

  bool operator==(const FrameElement&) const = default;
};

struct FrameInstance {
  Span trigger;
  std::string frame;
  std::vector<FrameElement> elements;

  bool operator==(const FrameInstance&) const = default;
};

struct Document {
  std::string id;
  std::string source;
  std::vector<Sentence> sentences;
  std::map<std::string, std::vector<FrameInstance>> annotations;

  const Sentence* find_sentence(const std::string& sent_id) const;
  int trigger_count() const;
  bool operator==(const Document&) const = default;
};

// One (sentence, predicate) training unit with its gold BIO labels.
struct TaggingSample {
  std::string doc_id;
  std::string sent_id;
  Sentence sentence;
  Span trigger;
  std::string frame;
  std::vector<std::string> gold_labels;
};

// Label inventory with O pinned at id 0 and B/I closure.
class LabelSet {
 public:
  LabelSet();
  explicit LabelSet(std::vector<std::string> labels);
  static LabelSet from_lexicon(const FrameLexicon& lex);

  int id(const std::string& label) const;          // throws on unknown
  std::optional<int> find(const std::string& label) const;
  const std::string& label(int id) const;
  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Decomposition of a label: kind O / frame / fe, begin-vs-inside, bare name.
  enum class Kind { O, Frame, Fe };
  struct Parts {
    Kind kind = Kind::O;
    bool begin = false;
    std::string name;
  };
  const Parts& parts(int id) const { return parts_[id]; }
  static Parts parse_label(const std::string& label);

 private:
  std::vector<std::string> labels_;
  std::map<std::string, int> ids_;
  std::vector<Parts> parts_;
  void index();
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& msg);
};

struct ValidationIssue {
  std::string sentence_id;
  std::string frame;
  std::string label;  // offending FE label, empty for unknown-frame issues
  std::string message;
};

std::vector<Document> parse_corpus(std::istream& in);
std::vector<Document> parse_corpus_file(const std::string& path);

void serialize_corpus(const std::vector<Document>& docs, std::ostream& out);
std::string serialize_corpus(const std::vector<Document>& docs);

std::vector<ValidationIssue> validate_document(const Document& doc,
                                               const FrameLexicon& lex);

std::vector<TaggingSample> generate_samples(const Document& doc);
std::vector<TaggingSample> generate_samples(const std::vector<Document>& docs);

// Gold label sequence for one instance; throws on overlapping spans.
std::vector<std::string> bio_labels(const Sentence& sent, const FrameInstance& inst);
bool bio_valid(const std::vector<std::string>& labels);

struct SplitResult {
  std::vector<Document> train;
  std::vector<Document> test;
};

SplitResult split_corpus(const std::vector<Document>& docs, double test_fraction,
                         uint64_t seed);

struct Fold {
  std::vector<Document> train;
  std::vector<Document> test;
};

std::vector<Fold> kfold_split(const std::vector<Document>& docs, int k, uint64_t seed);

// Dependency depth of a token (arcs to root). Head graph is a tree, so this
// terminates for valid sentences.
int token_depth(const Sentence& sent, int token_index);

}  // namespace framesrl
