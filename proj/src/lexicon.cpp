#include "framesrl/lexicon.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace framesrl {

const char* to_string(FrameSizeClass c) {
  switch (c) {
    case FrameSizeClass::Small: return "Small";
    case FrameSizeClass::Medium: return "Medium";
    case FrameSizeClass::Large: return "Large";
  }
  return "?";
}

void FrameLexicon::add_frame(const std::string& frame, std::vector<std::string> fes) {
  if (fes.empty())
    throw std::runtime_error("lexicon: frame '" + frame + "' declares no FEs");
  if (frames_.count(frame))
    throw std::runtime_error("lexicon: duplicate frame line '" + frame + "'");
  frames_.emplace(frame, std::move(fes));
}

void FrameLexicon::add_trigger(const std::string& lemma, char pos,
                               const std::string& frame) {
  if (!frames_.count(frame))
    throw std::runtime_error("lexicon: trigger '" + lemma +
                             "' references unknown frame '" + frame + "'");
  triggers_[{lemma, pos}].insert(frame);
}

bool FrameLexicon::has_frame(const std::string& frame) const {
  return frames_.count(frame) > 0;
}

const std::vector<std::string>& FrameLexicon::compatible_fes(
    const std::string& frame) const {
  auto it = frames_.find(frame);
  if (it == frames_.end())
    throw std::runtime_error("lexicon: unknown frame '" + frame + "'");
  return it->second;
}

std::set<std::string> FrameLexicon::frames_for_trigger(const std::string& lemma,
                                                       char pos) const {
  auto it = triggers_.find({lemma, pos});
  if (it == triggers_.end()) return {};
  return it->second;
}

FrameSizeClass FrameLexicon::frame_size_class(const std::string& frame) const {
  size_t n = compatible_fes(frame).size();
  if (n <= 7) return FrameSizeClass::Small;
  if (n <= 10) return FrameSizeClass::Medium;
  return FrameSizeClass::Large;
}

std::vector<std::string> FrameLexicon::frame_names() const {
  std::vector<std::string> out;
  out.reserve(frames_.size());
  for (const auto& [name, fes] : frames_) out.push_back(name);
  return out;
}

std::set<std::string> FrameLexicon::all_fe_labels() const {
  std::set<std::string> out;
  for (const auto& [name, fes] : frames_) out.insert(fes.begin(), fes.end());
  return out;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void FrameLexicon::serialize(std::ostream& out) const {
  // Invert the trigger map so each frame line lists its triggers.
  std::map<std::string, std::vector<std::string>> trig_by_frame;
  for (const auto& [key, frames] : triggers_)
    for (const auto& f : frames)
      trig_by_frame[f].push_back(key.first + "/" + std::string(1, key.second));
  for (const auto& [frame, fes] : frames_) {
    out << frame << '\t';
    for (size_t i = 0; i < fes.size(); ++i) out << (i ? "," : "") << fes[i];
    out << '\t';
    const auto& trigs = trig_by_frame[frame];
    for (size_t i = 0; i < trigs.size(); ++i) out << (i ? "," : "") << trigs[i];
    out << '\n';
  }
}

FrameLexicon load_lexicon(std::istream& in) {
  FrameLexicon lex;
  struct TrigDecl {
    std::string lemma;
    char pos;
    std::string frame;
  };
  std::vector<TrigDecl> pending;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 2 || cols.size() > 3)
      throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                               ": expected 2-3 tab-separated fields");
    const std::string& frame = cols[0];
    std::vector<std::string> fes;
    for (const auto& fe : split(cols[1], ','))
      if (!fe.empty()) fes.push_back(fe);
    lex.add_frame(frame, std::move(fes));
    if (cols.size() == 3 && !cols[2].empty()) {
      for (const auto& t : split(cols[2], ',')) {
        auto slash = t.rfind('/');
        if (slash == std::string::npos || slash + 2 != t.size())
          throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                                   ": bad trigger '" + t + "' (want lemma/P)");
        pending.push_back({t.substr(0, slash), t[slash + 1], frame});
      }
    }
  }
  // Triggers resolved after all frames are declared so forward references work.
  for (const auto& t : pending) lex.add_trigger(t.lemma, t.pos, t.frame);
  return lex;
}

FrameLexicon load_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  return load_lexicon(in);
}

char coarse_pos(const std::string& upos) {
  if (upos == "VERB") return 'V';
  if (upos == "NOUN" || upos == "PROPN") return 'N';
  return 'X';
}

}  // namespace framesrl
