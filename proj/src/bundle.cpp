#include "framesrl/bundle.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace framesrl {

namespace {

nlohmann::json config_to_json(const TaggerConfig& c) {
  nlohmann::json j;
  j["hidden"] = c.hidden;
  j["num_layers"] = c.num_layers;
  nlohmann::json dims = nlohmann::json::array();
  for (int d : c.channel_dims) dims.push_back(d);
  j["channel_dims"] = dims;
  j["learning_rate"] = c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  j["clip_norm"] = c.clip_norm;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["patience"] = c.patience;
  return j;
}

TaggerConfig config_from_json(const nlohmann::json& j) {
  TaggerConfig c;
  c.hidden = j.at("hidden").get<int>();
  c.num_layers = j.at("num_layers").get<int>();
  auto dims = j.at("channel_dims");
  for (int ch = 0; ch < kNumChannels; ++ch) c.channel_dims[ch] = dims[ch].get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.patience = j.at("patience").get<int>();
  return c;
}

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["seed"] = bundle.seed;
  manifest["config"] = config_to_json(bundle.config);
  manifest["labels"] = bundle.labels.labels();
  nlohmann::json channels = nlohmann::json::array();
  for (int ch = 0; ch < kNumChannels; ++ch) channels.push_back(channel_name(ch));
  manifest["channel_order"] = channels;
  {
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir);
    out << manifest.dump(1) << '\n';
  }

  bundle.vocab.save((fs::path(dir) / "vocab.json").string());

  std::ofstream bin(fs::path(dir) / "tensors.bin", std::ios::binary);
  std::ofstream idx(fs::path(dir) / "tensors.idx");
  if (!bin || !idx) throw std::runtime_error("cannot write tensors in " + dir);
  uint64_t offset = 0;
  for (const auto& [name, m] : bundle.params.tensors()) {
    idx << name << ' ' << m->rows << ' ' << m->cols << ' ' << offset << '\n';
    bin.write(reinterpret_cast<const char*>(m->data.data()),
              static_cast<std::streamsize>(m->data.size() * sizeof(double)));
    offset += m->data.size() * sizeof(double);
  }
}

ModelBundle load_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  ModelBundle b;

  nlohmann::json manifest;
  {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw std::runtime_error("cannot read manifest in " + dir);
    in >> manifest;
  }
  b.seed = manifest.at("seed").get<uint64_t>();
  b.config = config_from_json(manifest.at("config"));
  b.labels = LabelSet(manifest.at("labels").get<std::vector<std::string>>());
  b.vocab = Vocabulary::load((fs::path(dir) / "vocab.json").string());

  // allocate parameter tensors, then overwrite from the flat file
  b.params = init_params(b.config, b.vocab, b.labels.size(), b.seed);
  auto tensors = b.params.tensors();
  std::map<std::string, Matrix*> by_name;
  for (auto& [name, m] : tensors) by_name[name] = m;

  std::ifstream idx(fs::path(dir) / "tensors.idx");
  std::ifstream bin(fs::path(dir) / "tensors.bin", std::ios::binary);
  if (!idx || !bin) throw std::runtime_error("cannot read tensors in " + dir);
  std::string name;
  int rows, cols;
  uint64_t offset;
  size_t loaded = 0;
  while (idx >> name >> rows >> cols >> offset) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw std::runtime_error("bundle tensor '" + name + "' has no slot");
    Matrix* m = it->second;
    if (m->rows != rows || m->cols != cols)
      throw std::runtime_error("bundle tensor '" + name + "' shape mismatch");
    bin.seekg(static_cast<std::streamoff>(offset));
    bin.read(reinterpret_cast<char*>(m->data.data()),
             static_cast<std::streamsize>(m->data.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("truncated tensor file for '" + name + "'");
    ++loaded;
  }
  if (loaded != tensors.size())
    throw std::runtime_error("bundle tensor count mismatch");
  return b;
}

}  // namespace framesrl
