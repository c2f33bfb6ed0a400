#include "framesrl/encoder.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace framesrl {

namespace {

const char* kChannelNames[kNumChannels] = {"word",     "pos",    "deprel", "morph",
                                           "capshape", "prefix", "suffix"};

constexpr int kAffixLen = 3;

// First/last `n` UTF-8 code points of a string (whole string when shorter).
std::string utf8_prefix(const std::string& s, int n) {
  int count = 0;
  size_t i = 0;
  while (i < s.size() && count < n) {
    ++i;
    while (i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) ++i;
    ++count;
  }
  return s.substr(0, i);
}

std::string utf8_suffix(const std::string& s, int n) {
  std::vector<size_t> starts;
  for (size_t i = 0; i < s.size(); ++i)
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) starts.push_back(i);
  if (static_cast<int>(starts.size()) <= n) return s;
  return s.substr(starts[starts.size() - n]);
}

}  // namespace

const char* channel_name(int channel) { return kChannelNames[channel]; }

std::string capshape_class(const std::string& form) {
  bool any_upper = false, any_lower = false, any_digit = false, any_other = false;
  for (unsigned char c : form) {
    if (c >= 'A' && c <= 'Z')
      any_upper = true;
    else if (c >= 'a' && c <= 'z')
      any_lower = true;
    else if (c >= '0' && c <= '9')
      any_digit = true;
    else if (c >= 0x80)
      any_lower = true;  // accented letters: treat as lowercase alpha
    else
      any_other = true;
  }
  bool first_upper = !form.empty() && form[0] >= 'A' && form[0] <= 'Z';
  if (any_digit && !any_upper && !any_lower) return "digit";
  if (any_lower && !any_upper && !any_digit) return "lower";
  if (any_upper && !any_lower && !any_digit) return "ALLCAP";
  if (first_upper && any_lower && !any_digit) return "Init-cap";
  if (any_upper || any_lower || any_digit) return "mixed";
  (void)any_other;
  return "other";
}

std::string channel_key(const Token& tok, int channel) {
  switch (channel) {
    case kWord: return tok.form;
    case kPos: return tok.upos;
    case kDeprel: return tok.deprel;
    case kMorph: {
      if (tok.morph.empty()) return "_";
      std::vector<std::string> feats = tok.morph;
      std::sort(feats.begin(), feats.end());
      std::string out;
      for (size_t i = 0; i < feats.size(); ++i) out += (i ? "|" : "") + feats[i];
      return out;
    }
    case kCapshape: return capshape_class(tok.form);
    case kPrefix: return utf8_prefix(tok.form, kAffixLen);
    case kSuffix: return utf8_suffix(tok.form, kAffixLen);
    default: throw std::runtime_error("bad channel");
  }
}

Vocabulary::Vocabulary() {
  for (int ch = 0; ch < kNumChannels; ++ch) {
    maps_[ch]["<UNK>"] = kUnkId;
    keys_[ch].push_back("<UNK>");
  }
}

int Vocabulary::add(int channel, const std::string& key) {
  auto [it, inserted] = maps_[channel].emplace(key, size(channel));
  if (inserted) keys_[channel].push_back(key);
  return it->second;
}

int Vocabulary::lookup(int channel, const std::string& key) const {
  auto it = maps_[channel].find(key);
  return it == maps_[channel].end() ? kUnkId : it->second;
}

int Vocabulary::size(int channel) const {
  return static_cast<int>(keys_[channel].size());
}

void Vocabulary::save(const std::string& path) const {
  nlohmann::json j;
  j["version"] = 1;
  nlohmann::json channels = nlohmann::json::array();
  for (int ch = 0; ch < kNumChannels; ++ch) {
    nlohmann::json c;
    c["name"] = kChannelNames[ch];
    c["keys"] = keys_[ch];  // id order; UNK first
    channels.push_back(c);
  }
  j["channels"] = channels;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  out << j.dump(1) << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary file: " + path);
  nlohmann::json j;
  in >> j;
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("unsupported vocabulary file version");
  Vocabulary v;
  const auto& channels = j.at("channels");
  if (channels.size() != kNumChannels)
    throw std::runtime_error("vocabulary channel count mismatch");
  for (int ch = 0; ch < kNumChannels; ++ch) {
    const auto& c = channels[ch];
    if (c.at("name").get<std::string>() != kChannelNames[ch])
      throw std::runtime_error("vocabulary channel order mismatch");
    auto keys = c.at("keys").get<std::vector<std::string>>();
    for (size_t i = 1; i < keys.size(); ++i) v.add(ch, keys[i]);
  }
  return v;
}

Vocabulary build_vocabularies(const std::vector<TaggingSample>& train_samples,
                              int min_count) {
  if (train_samples.empty())
    throw std::runtime_error("build_vocabularies: empty training set");
  if (min_count < 1) throw std::runtime_error("min_count must be >= 1");

  std::map<std::string, int> word_freq;
  for (const auto& s : train_samples)
    for (const auto& t : s.sentence.tokens) ++word_freq[t.form];

  Vocabulary v;
  for (const auto& s : train_samples) {
    for (const auto& t : s.sentence.tokens) {
      for (int ch = 0; ch < kNumChannels; ++ch) {
        if (ch == kWord && word_freq[t.form] < min_count) continue;
        v.add(ch, channel_key(t, ch));
      }
    }
  }
  return v;
}

EncodedSample encode(const Sentence& sent, const Span& trigger,
                     const Vocabulary& vocab) {
  if (trigger.begin < 1 || trigger.end > sent.size() || trigger.begin > trigger.end)
    throw std::runtime_error("encode: trigger span out of bounds");
  EncodedSample enc;
  enc.ids.reserve(sent.tokens.size());
  enc.trigger_flag.reserve(sent.tokens.size());
  for (const auto& t : sent.tokens) {
    std::array<int, kNumChannels> ids{};
    for (int ch = 0; ch < kNumChannels; ++ch)
      ids[ch] = vocab.lookup(ch, channel_key(t, ch));
    enc.ids.push_back(ids);
    enc.trigger_flag.push_back(trigger.contains(t.index) ? 1.0 : 0.0);
  }
  return enc;
}

int embedded_width(const EmbeddingTables& tables) {
  int w = 1;  // trigger flag
  for (const auto& t : tables) w += t.cols;
  return w;
}

std::vector<Vector> embed(const EncodedSample& enc, const EmbeddingTables& tables) {
  if (tables.size() != kNumChannels)
    throw std::runtime_error("embed: expected one table per channel");
  int width = embedded_width(tables);
  std::vector<Vector> out;
  out.reserve(enc.ids.size());
  for (int t = 0; t < enc.size(); ++t) {
    Vector v(width, 0.0);
    int off = 0;
    for (int ch = 0; ch < kNumChannels; ++ch) {
      int id = enc.ids[t][ch];
      if (id < 0 || id >= tables[ch].rows)
        throw std::runtime_error("embed: id out of table range");
      for (int c = 0; c < tables[ch].cols; ++c) v[off + c] = tables[ch](id, c);
      off += tables[ch].cols;
    }
    v[off] = enc.trigger_flag[t];
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace framesrl
