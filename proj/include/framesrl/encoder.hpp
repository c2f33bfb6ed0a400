#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "framesrl/corpus.hpp"
#include "framesrl/linalg.hpp"

namespace framesrl {

// Input feature channels, in fixed order. Each channel embeds one string key
// per token; the trigger flag is appended separately.
enum Channel : int {
  kWord = 0,
  kPos,
  kDeprel,
  kMorph,
  kCapshape,
  kPrefix,
  kSuffix,
  kNumChannels
};

const char* channel_name(int channel);

// Per-channel string key of a token (capshape class, 3-char affixes, sorted
// morph bundle, ...).
std::string channel_key(const Token& tok, int channel);
std::string capshape_class(const std::string& form);

class Vocabulary {
 public:
  static constexpr int kUnkId = 0;

  Vocabulary();

  int add(int channel, const std::string& key);  // idempotent
  int lookup(int channel, const std::string& key) const;  // UNK when absent
  int size(int channel) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary&) const = default;

 private:
  std::array<std::map<std::string, int>, kNumChannels> maps_;
  std::array<std::vector<std::string>, kNumChannels> keys_;
};

Vocabulary build_vocabularies(const std::vector<TaggingSample>& train_samples,
                              int min_count);

struct EncodedSample {
  std::vector<std::array<int, kNumChannels>> ids;  // one tuple per token
  std::vector<double> trigger_flag;                // 0/1 per token
  int size() const { return static_cast<int>(ids.size()); }
};

EncodedSample encode(const Sentence& sent, const Span& trigger,
                     const Vocabulary& vocab);

// One table per channel, rows = vocab size, cols = channel dim.
using EmbeddingTables = std::vector<Matrix>;

// Per-token concatenation of channel embeddings plus the trigger flag.
// Output width = sum of channel dims + 1.
std::vector<Vector> embed(const EncodedSample& enc, const EmbeddingTables& tables);

int embedded_width(const EmbeddingTables& tables);

}  // namespace framesrl
