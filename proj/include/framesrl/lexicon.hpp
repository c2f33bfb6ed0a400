#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace framesrl {

enum class FrameSizeClass { Small, Medium, Large };

const char* to_string(FrameSizeClass c);

// Frame inventory: admissible FE sets per frame and (lemma, coarse POS)
// trigger mapping. Immutable after load.
class FrameLexicon {
 public:
  FrameLexicon() = default;

  void add_frame(const std::string& frame, std::vector<std::string> fes);
  void add_trigger(const std::string& lemma, char pos, const std::string& frame);

  bool has_frame(const std::string& frame) const;
  const std::vector<std::string>& compatible_fes(const std::string& frame) const;
  std::set<std::string> frames_for_trigger(const std::string& lemma, char pos) const;
  FrameSizeClass frame_size_class(const std::string& frame) const;

  std::vector<std::string> frame_names() const;  // sorted
  std::set<std::string> all_fe_labels() const;

  void serialize(std::ostream& out) const;

 private:
  std::map<std::string, std::vector<std::string>> frames_;
  std::map<std::pair<std::string, char>, std::set<std::string>> triggers_;
};

FrameLexicon load_lexicon(std::istream& in);
FrameLexicon load_lexicon_file(const std::string& path);

// UPOS -> coarse trigger POS class: VERB -> 'V', NOUN/PROPN -> 'N', else 'X'.
char coarse_pos(const std::string& upos);

}  // namespace framesrl
