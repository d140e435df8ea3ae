#include "cadsev/model/checkpoint.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace cadsev::model {

std::string checkpoint_json(const RcnModel& model) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = nlohmann::json::parse(to_json(model.config()));
  j["vocabulary"] = model.vocab().tokens();
  auto& params = j["parameters"] = nlohmann::json::object();
  for (const num::Parameter* p : model.parameters().all()) {
    auto values = p->value.data();
    params[p->name] = {{"shape", p->value.shape().dims()},
                       {"values", std::vector<double>(values.begin(), values.end())}};
  }
  return j.dump();
}

RcnModel model_from_checkpoint_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string{}) != kCheckpointFormat) {
    throw std::invalid_argument("checkpoint: not a " + std::string(kCheckpointFormat) + " file");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw std::invalid_argument("checkpoint: unsupported version " + j.value("version", nlohmann::json()).dump());
  }
  try {
    ModelConfig config = config_from_json(j.at("config").dump());
    config.embedding_file.clear();
    Vocabulary vocab(j.at("vocabulary").get<std::vector<std::string>>());
    num::ParameterStore store;
    for (const auto& [name, entry] : j.at("parameters").items()) {
      const auto dims = entry.at("shape").get<std::vector<std::size_t>>();
      store.add(name, num::Tensor(num::Shape(std::span<const std::size_t>(dims)),
                                  entry.at("values").get<std::vector<double>>()));
    }
    return RcnModel(std::move(config), std::move(vocab), std::move(store));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const RcnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_json(model) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

RcnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return model_from_checkpoint_json(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace cadsev::model
