#include "cadsev/model/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace cadsev::model {

std::string_view to_string(HeadMode m) { return m == HeadMode::Capsule ? "capsule" : "softmax"; }
std::string_view to_string(EncoderMode m) { return m == EncoderMode::UniBi ? "uni_bi" : "all_bi"; }
std::string_view to_string(LossReduction r) { return r == LossReduction::Sum ? "sum" : "mean"; }

HeadMode head_mode_from_string(std::string_view s) {
  if (s == "capsule") return HeadMode::Capsule;
  if (s == "softmax") return HeadMode::Softmax;
  throw std::invalid_argument("head mode must be 'capsule' or 'softmax', got '" + std::string(s) + "'");
}

EncoderMode encoder_mode_from_string(std::string_view s) {
  if (s == "uni_bi") return EncoderMode::UniBi;
  if (s == "all_bi") return EncoderMode::AllBi;
  throw std::invalid_argument("encoder mode must be 'uni_bi' or 'all_bi', got '" + std::string(s) + "'");
}

LossReduction loss_reduction_from_string(std::string_view s) {
  if (s == "sum") return LossReduction::Sum;
  if (s == "mean") return LossReduction::Mean;
  throw std::invalid_argument("loss reduction must be 'sum' or 'mean', got '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("model config: " + what); };
  if (word_dim == 0 || type_dim == 0 || bi_hidden == 0 || uni_hidden == 0 || capsule_dim == 0) {
    fail("all dimensions must be positive");
  }
  if (uni_hidden != 2 * bi_hidden) {
    fail("uni_hidden (" + std::to_string(uni_hidden) + ") must equal 2 * bi_hidden (" +
         std::to_string(2 * bi_hidden) + ") so every input capsule has the same width");
  }
  if (num_classes < 1) fail("num_classes must be at least 1");
  if (routing_iters < 1) fail("routing_iters must be at least 1");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (!(m_minus < m_plus && m_plus <= 1.0)) fail("margins need m_minus < m_plus <= 1");
  if (!(lambda >= 0.0)) fail("lambda must be non-negative");
  if (!(adam.learning_rate > 0.0)) fail("learning rate must be positive");
  if (!(init_range > 0.0)) fail("init_range must be positive");
}

namespace {

nlohmann::json to_json_object(const ModelConfig& c) {
  return {
      {"word_dim", c.word_dim},
      {"type_dim", c.type_dim},
      {"bi_hidden", c.bi_hidden},
      {"uni_hidden", c.uni_hidden},
      {"capsule_dim", c.capsule_dim},
      {"num_classes", c.num_classes},
      {"routing_iters", c.routing_iters},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"learning_rate", c.adam.learning_rate},
      {"beta1", c.adam.beta1},
      {"beta2", c.adam.beta2},
      {"epsilon", c.adam.epsilon},
      {"m_plus", c.m_plus},
      {"m_minus", c.m_minus},
      {"lambda", c.lambda},
      {"head_mode", to_string(c.head)},
      {"encoder_mode", to_string(c.encoder)},
      {"loss_reduction", to_string(c.loss_reduction)},
      {"init_range", c.init_range},
      {"seed", c.seed},
      {"embedding_file", c.embedding_file},
  };
}

}  // namespace

std::string to_json(const ModelConfig& config) { return to_json_object(config).dump(2); }

ModelConfig config_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("model config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("model config: expected a JSON object");

  ModelConfig c;
  const auto known = to_json_object(c);
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("model config: unknown key '" + key + "'");
  }
  try {
    c.word_dim = j.value("word_dim", c.word_dim);
    c.type_dim = j.value("type_dim", c.type_dim);
    c.bi_hidden = j.value("bi_hidden", c.bi_hidden);
    c.uni_hidden = j.value("uni_hidden", c.uni_hidden);
    c.capsule_dim = j.value("capsule_dim", c.capsule_dim);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.routing_iters = j.value("routing_iters", c.routing_iters);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.adam.learning_rate = j.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = j.value("beta1", c.adam.beta1);
    c.adam.beta2 = j.value("beta2", c.adam.beta2);
    c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
    c.m_plus = j.value("m_plus", c.m_plus);
    c.m_minus = j.value("m_minus", c.m_minus);
    c.lambda = j.value("lambda", c.lambda);
    if (j.contains("head_mode")) c.head = head_mode_from_string(j.at("head_mode").get<std::string>());
    if (j.contains("encoder_mode")) c.encoder = encoder_mode_from_string(j.at("encoder_mode").get<std::string>());
    if (j.contains("loss_reduction")) {
      c.loss_reduction = loss_reduction_from_string(j.at("loss_reduction").get<std::string>());
    }
    c.init_range = j.value("init_range", c.init_range);
    c.seed = j.value("seed", c.seed);
    c.embedding_file = j.value("embedding_file", c.embedding_file);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

}  // namespace cadsev::model
