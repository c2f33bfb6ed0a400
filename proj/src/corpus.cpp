#include "framesrl/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "framesrl/lexicon.hpp"

namespace framesrl {

ParseError::ParseError(int line_no, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
      line(line_no) {}

const Sentence* Document::find_sentence(const std::string& sent_id) const {
  for (const auto& s : sentences)
    if (s.id == sent_id) return &s;
  return nullptr;
}

int Document::trigger_count() const {
  int n = 0;
  for (const auto& [sid, insts] : annotations) n += static_cast<int>(insts.size());
  return n;
}

// ---------------------------------------------------------------------------
// LabelSet

LabelSet::LabelSet() : labels_{"O"} { index(); }

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty() || labels_[0] != "O")
    throw std::runtime_error("label set must contain O at id 0");
  index();
  // B/I closure
  for (const auto& l : labels_) {
    if (l.rfind("I-", 0) == 0 && !ids_.count("B-" + l.substr(2)))
      throw std::runtime_error("label set not closed under B/I pairing: " + l);
  }
}

LabelSet LabelSet::from_lexicon(const FrameLexicon& lex) {
  std::vector<std::string> labels{"O"};
  for (const auto& f : lex.frame_names()) {
    labels.push_back("B-frame:" + f);
    labels.push_back("I-frame:" + f);
  }
  for (const auto& fe : lex.all_fe_labels()) {
    labels.push_back("B-fe:" + fe);
    labels.push_back("I-fe:" + fe);
  }
  return LabelSet(std::move(labels));
}

void LabelSet::index() {
  ids_.clear();
  parts_.clear();
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (!ids_.emplace(labels_[i], static_cast<int>(i)).second)
      throw std::runtime_error("duplicate label: " + labels_[i]);
    parts_.push_back(parse_label(labels_[i]));
  }
}

LabelSet::Parts LabelSet::parse_label(const std::string& label) {
  Parts p;
  if (label == "O") return p;
  if (label.size() < 3 || (label[0] != 'B' && label[0] != 'I') || label[1] != '-')
    throw std::runtime_error("malformed label: " + label);
  p.begin = label[0] == 'B';
  std::string rest = label.substr(2);
  if (rest.rfind("frame:", 0) == 0) {
    p.kind = Kind::Frame;
    p.name = rest.substr(6);
  } else if (rest.rfind("fe:", 0) == 0) {
    p.kind = Kind::Fe;
    p.name = rest.substr(3);
  } else {
    throw std::runtime_error("label missing frame:/fe: namespace: " + label);
  }
  return p;
}

int LabelSet::id(const std::string& label) const {
  auto it = ids_.find(label);
  if (it == ids_.end()) throw std::runtime_error("unknown label: " + label);
  return it->second;
}

std::optional<int> LabelSet::find(const std::string& label) const {
  auto it = ids_.find(label);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& LabelSet::label(int id) const { return labels_.at(id); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// A raw sentence block: tokens plus the B/I columns of one instance.
struct Block {
  std::string sent_id;
  int first_line = 0;
  std::vector<Token> tokens;
  std::vector<std::string> frame_col;
  std::vector<std::string> fe_col;
};

int parse_int(const std::string& s, int line_no, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw ParseError(line_no, std::string("bad ") + what + " value '" + s + "'");
  }
}

void check_tree(const Block& b) {
  int n = static_cast<int>(b.tokens.size());
  int roots = 0;
  for (const auto& t : b.tokens) {
    if (t.head < 0 || t.head > n)
      throw ParseError(b.first_line + t.index - 1,
                       "token " + std::to_string(t.index) + " has dangling head " +
                           std::to_string(t.head) + " in a " + std::to_string(n) +
                           "-token sentence");
    if (t.head == t.index)
      throw ParseError(b.first_line + t.index - 1, "token is its own head");
    if (t.head == 0) ++roots;
  }
  if (roots != 1)
    throw ParseError(b.first_line, "sentence '" + b.sent_id + "' has " +
                                       std::to_string(roots) + " root tokens");
  // cycle check: every token must reach root
  for (const auto& t : b.tokens) {
    int cur = t.index, hops = 0;
    while (cur != 0) {
      cur = b.tokens[cur - 1].head;
      if (++hops > n)
        throw ParseError(b.first_line, "head graph of sentence '" + b.sent_id +
                                           "' contains a cycle");
    }
  }
}

// Decode one B/I column into labeled spans; `namespaced` = false (bare names).
std::vector<FrameElement> column_spans(const std::vector<std::string>& col,
                                       int first_line) {
  std::vector<FrameElement> out;
  for (size_t i = 0; i < col.size(); ++i) {
    const std::string& c = col[i];
    if (c == "_") continue;
    int line = first_line + static_cast<int>(i);
    if (c.size() < 3 || (c[0] != 'B' && c[0] != 'I') || c[1] != '-')
      throw ParseError(line, "bad span column value '" + c + "'");
    std::string name = c.substr(2);
    if (c[0] == 'B') {
      out.push_back({name, {static_cast<int>(i) + 1, static_cast<int>(i) + 1}});
    } else {
      if (out.empty() || out.back().label != name ||
          out.back().span.end != static_cast<int>(i))
        throw ParseError(line, "I-" + name + " without preceding B-" + name +
                                   " (discontiguous spans are rejected)");
      out.back().span.end = static_cast<int>(i) + 1;
    }
  }
  return out;
}

FrameInstance block_instance(const Block& b, bool* has_any) {
  auto frames = column_spans(b.frame_col, b.first_line);
  auto fes = column_spans(b.fe_col, b.first_line);
  *has_any = !frames.empty() || !fes.empty();
  if (!*has_any) return {};
  if (frames.size() != 1)
    throw ParseError(b.first_line, "sentence block of '" + b.sent_id + "' has " +
                                       std::to_string(frames.size()) +
                                       " trigger spans (want exactly 1)");
  FrameInstance inst;
  inst.frame = frames[0].label;
  inst.trigger = frames[0].span;
  inst.elements = std::move(fes);
  for (size_t i = 0; i < inst.elements.size(); ++i)
    for (size_t j = i + 1; j < inst.elements.size(); ++j)
      if (inst.elements[i].span.overlaps(inst.elements[j].span))
        throw ParseError(b.first_line, "overlapping FE spans in one instance");
  return inst;
}

}  // namespace

std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> docs;
  Document* doc = nullptr;

  std::string line;
  int line_no = 0;
  std::optional<Block> block;
  std::string pending_sent_id;
  int pending_sent_line = 0;

  auto flush_block = [&]() {
    if (!block) return;
    if (!doc) throw ParseError(block->first_line, "token lines before any # doc_id");
    check_tree(*block);
    bool has_inst = false;
    FrameInstance inst = block_instance(*block, &has_inst);
    Sentence* sent = nullptr;
    for (auto& s : doc->sentences)
      if (s.id == block->sent_id) sent = &s;
    if (sent) {
      if (sent->tokens != block->tokens)
        throw ParseError(block->first_line,
                         "repeated block for sentence '" + block->sent_id +
                             "' has differing tokens");
    } else {
      doc->sentences.push_back({block->sent_id, block->tokens});
      sent = &doc->sentences.back();
    }
    if (has_inst) {
      int n = sent->size();
      auto in_bounds = [n](const Span& s) {
        return s.begin >= 1 && s.end <= n && s.begin <= s.end;
      };
      if (!in_bounds(inst.trigger))
        throw ParseError(block->first_line, "trigger span out of bounds");
      for (const auto& fe : inst.elements)
        if (!in_bounds(fe.span))
          throw ParseError(block->first_line, "FE span out of bounds");
      doc->annotations[sent->id].push_back(std::move(inst));
    }
    block.reset();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush_block();
      continue;
    }
    if (line[0] == '#') {
      auto eq = line.find('=');
      std::string key = line.substr(1, eq == std::string::npos ? std::string::npos
                                                               : eq - 1);
      auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t");
        size_t b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      key = trim(key);
      std::string value = eq == std::string::npos ? "" : trim(line.substr(eq + 1));
      if (key == "doc_id") {
        flush_block();
        docs.push_back({});
        doc = &docs.back();
        doc->id = value;
      } else if (key == "source") {
        if (!doc) throw ParseError(line_no, "# source before # doc_id");
        doc->source = value;
      } else if (key == "sent_id") {
        flush_block();
        pending_sent_id = value;
        pending_sent_line = line_no;
        if (pending_sent_id.empty())
          throw ParseError(line_no, "empty sent_id");
      }
      // unknown comment keys are ignored
      continue;
    }
    // token line
    auto cols = split_tabs(line);
    if (cols.size() != 10)
      throw ParseError(line_no, "expected 10 tab-separated columns, got " +
                                    std::to_string(cols.size()));
    if (!block) {
      if (pending_sent_id.empty())
        throw ParseError(line_no, "token line outside a # sent_id block");
      block = Block{};
      block->sent_id = pending_sent_id;
      block->first_line = line_no;
    }
    Token t;
    t.index = parse_int(cols[0], line_no, "token index");
    if (t.index != static_cast<int>(block->tokens.size()) + 1)
      throw ParseError(line_no, "non-contiguous token index " +
                                    std::to_string(t.index) + " (expected " +
                                    std::to_string(block->tokens.size() + 1) + ")");
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    if (cols[4] != "_") {
      std::string cur;
      for (char c : cols[4]) {
        if (c == '|') {
          t.morph.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      t.morph.push_back(cur);
    }
    t.head = parse_int(cols[5], line_no, "head");
    t.deprel = cols[6];
    block->tokens.push_back(std::move(t));
    block->frame_col.push_back(cols[7]);
    block->fe_col.push_back(cols[8]);
    if (cols[9] != "_") parse_int(cols[9], line_no, "sample id");
  }
  flush_block();
  return docs;
}

std::vector<Document> parse_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return parse_corpus(in);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_block(std::ostream& out, const Sentence& sent, const FrameInstance* inst,
                 int sample_id) {
  out << "# sent_id = " << sent.id << '\n';
  for (const auto& t : sent.tokens) {
    out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t';
    if (t.morph.empty()) {
      out << '_';
    } else {
      for (size_t i = 0; i < t.morph.size(); ++i)
        out << (i ? "|" : "") << t.morph[i];
    }
    out << '\t' << t.head << '\t' << t.deprel << '\t';
    std::string fcol = "_", fecol = "_";
    if (inst) {
      if (t.index == inst->trigger.begin)
        fcol = "B-" + inst->frame;
      else if (inst->trigger.contains(t.index))
        fcol = "I-" + inst->frame;
      for (const auto& fe : inst->elements) {
        if (t.index == fe.span.begin)
          fecol = "B-" + fe.label;
        else if (fe.span.contains(t.index))
          fecol = "I-" + fe.label;
      }
    }
    out << fcol << '\t' << fecol << '\t' << sample_id << '\n';
  }
  out << '\n';
}

}  // namespace

void serialize_corpus(const std::vector<Document>& docs, std::ostream& out) {
  for (const auto& doc : docs) {
    out << "# doc_id = " << doc.id << '\n';
    out << "# source = " << doc.source << '\n';
    for (const auto& sent : doc.sentences) {
      auto it = doc.annotations.find(sent.id);
      if (it == doc.annotations.end() || it->second.empty()) {
        write_block(out, sent, nullptr, 0);
      } else {
        int sid = 0;
        for (const auto& inst : it->second) write_block(out, sent, &inst, sid++);
      }
    }
  }
}

std::string serialize_corpus(const std::vector<Document>& docs) {
  std::ostringstream out;
  serialize_corpus(docs, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Validation & samples

std::vector<ValidationIssue> validate_document(const Document& doc,
                                               const FrameLexicon& lex) {
  std::vector<ValidationIssue> issues;
  for (const auto& [sid, insts] : doc.annotations) {
    for (const auto& inst : insts) {
      if (!lex.has_frame(inst.frame)) {
        issues.push_back({sid, inst.frame, "",
                          "unknown frame '" + inst.frame + "' in sentence " + sid});
        continue;
      }
      const auto& fes = lex.compatible_fes(inst.frame);
      for (const auto& el : inst.elements) {
        if (std::find(fes.begin(), fes.end(), el.label) == fes.end())
          issues.push_back({sid, inst.frame, el.label,
                            "FE '" + el.label + "' not admissible for frame '" +
                                inst.frame + "' in sentence " + sid});
      }
    }
  }
  return issues;
}

std::vector<std::string> bio_labels(const Sentence& sent, const FrameInstance& inst) {
  std::vector<std::string> labels(sent.tokens.size(), "O");
  auto place = [&](const Span& span, const std::string& base) {
    for (int i = span.begin; i <= span.end; ++i) {
      if (labels[i - 1] != "O")
        throw std::runtime_error("overlapping spans in instance of frame '" +
                                 inst.frame + "' in sentence " + sent.id);
      labels[i - 1] = (i == span.begin ? "B-" : "I-") + base;
    }
  };
  place(inst.trigger, "frame:" + inst.frame);
  for (const auto& fe : inst.elements) place(fe.span, "fe:" + fe.label);
  return labels;
}

bool bio_valid(const std::vector<std::string>& labels) {
  std::string prev = "O";
  for (const auto& l : labels) {
    if (l.rfind("I-", 0) == 0) {
      std::string base = l.substr(2);
      if (prev != "B-" + base && prev != l) return false;
    }
    prev = l;
  }
  return true;
}

std::vector<TaggingSample> generate_samples(const Document& doc) {
  std::vector<TaggingSample> samples;
  for (const auto& sent : doc.sentences) {
    auto it = doc.annotations.find(sent.id);
    if (it == doc.annotations.end()) continue;
    for (const auto& inst : it->second) {
      TaggingSample s;
      s.doc_id = doc.id;
      s.sent_id = sent.id;
      s.sentence = sent;
      s.trigger = inst.trigger;
      s.frame = inst.frame;
      s.gold_labels = bio_labels(sent, inst);
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::vector<TaggingSample> generate_samples(const std::vector<Document>& docs) {
  std::vector<TaggingSample> all;
  for (const auto& d : docs) {
    auto s = generate_samples(d);
    all.insert(all.end(), std::make_move_iterator(s.begin()),
               std::make_move_iterator(s.end()));
  }
  return all;
}

// ---------------------------------------------------------------------------
// Splits

namespace {

std::map<std::string, int> frame_counts(const Document& doc) {
  std::map<std::string, int> counts;
  for (const auto& [sid, insts] : doc.annotations)
    for (const auto& inst : insts) ++counts[inst.frame];
  return counts;
}

}  // namespace

SplitResult split_corpus(const std::vector<Document>& docs, double test_fraction,
                         uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0)
    throw std::runtime_error("test_fraction must be in (0,1)");
  int n = static_cast<int>(docs.size());
  int n_test = static_cast<int>(std::llround(test_fraction * n));
  n_test = std::max(1, std::min(n - 1, n_test));
  if (n < 2) throw std::runtime_error("corpus too small to split (need >= 2 docs)");

  std::map<std::string, int> total;
  std::vector<std::map<std::string, int>> per_doc(docs.size());
  for (size_t i = 0; i < docs.size(); ++i) {
    per_doc[i] = frame_counts(docs[i]);
    for (const auto& [f, c] : per_doc[i]) total[f] += c;
  }

  std::mt19937_64 rng(seed);
  std::vector<int> order(docs.size());
  std::iota(order.begin(), order.end(), 0);

  const double tol = 0.10;
  double best_dev = 1e9;
  std::string worst_frame;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::shuffle(order.begin(), order.end(), rng);
    std::map<std::string, int> test_counts;
    for (int i = 0; i < n_test; ++i)
      for (const auto& [f, c] : per_doc[order[i]]) test_counts[f] += c;
    double dev = 0.0;
    std::string dev_frame;
    for (const auto& [f, tot] : total) {
      if (tot < 5) continue;
      double share = static_cast<double>(test_counts[f]) / tot;
      double d = std::abs(share - test_fraction);
      if (d > dev) {
        dev = d;
        dev_frame = f;
      }
    }
    if (dev <= tol) {
      SplitResult r;
      std::vector<int> test_idx(order.begin(), order.begin() + n_test);
      std::sort(test_idx.begin(), test_idx.end());
      size_t ti = 0;
      for (int i = 0; i < n; ++i) {
        if (ti < test_idx.size() && test_idx[ti] == i) {
          r.test.push_back(docs[i]);
          ++ti;
        } else {
          r.train.push_back(docs[i]);
        }
      }
      return r;
    }
    if (dev < best_dev) {
      best_dev = dev;
      worst_frame = dev_frame;
    }
  }
  throw std::runtime_error(
      "split_corpus: could not satisfy per-frame tolerance after 1000 retries; "
      "worst frame '" +
      worst_frame + "' deviates by " + std::to_string(best_dev * 100) + " points");
}

std::vector<Fold> kfold_split(const std::vector<Document>& docs, int k,
                              uint64_t seed) {
  if (k < 2) throw std::runtime_error("kfold_split: k must be >= 2");
  if (static_cast<size_t>(k) > docs.size())
    throw std::runtime_error("kfold_split: k exceeds document count");
  std::mt19937_64 rng(seed);
  std::vector<int> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> folds(k);
  for (size_t i = 0; i < order.size(); ++i)
    folds[i % k].push_back(order[i]);
  std::vector<Fold> out(k);
  for (int f = 0; f < k; ++f) {
    std::vector<bool> in_test(docs.size(), false);
    for (int i : folds[f]) in_test[i] = true;
    for (size_t i = 0; i < docs.size(); ++i)
      (in_test[i] ? out[f].test : out[f].train).push_back(docs[i]);
  }
  return out;
}

int token_depth(const Sentence& sent, int token_index) {
  int depth = 0;
  int cur = token_index;
  while (sent.tokens.at(cur - 1).head != 0) {
    cur = sent.tokens[cur - 1].head;
    ++depth;
    if (depth > sent.size()) throw std::runtime_error("cyclic head graph");
  }
  return depth;
}

}  // namespace framesrl
