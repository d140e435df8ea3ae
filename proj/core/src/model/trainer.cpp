#include "cadsev/model/trainer.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "cadsev/model/checkpoint.hpp"
#include "cadsev/numeric/adam.hpp"
#include "cadsev/pipeline/metrics.hpp"

namespace cadsev::model {

std::string to_json_line(const EpochRecord& r) {
  nlohmann::json j;
  j["epoch"] = r.epoch;
  j["loss"] = r.loss;
  j["train_f1"] = r.train_f1;
  j["dev_f1"] = r.dev_f1 ? nlohmann::json(*r.dev_f1) : nlohmann::json(nullptr);
  return j.dump();
}

std::vector<data::RelationLabel> gold_labels(std::span<const data::RelationInstance> instances) {
  std::vector<data::RelationLabel> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    if (!inst.label) throw std::invalid_argument("instance " + inst.sentence_id + " has no label");
    out.push_back(*inst.label);
  }
  return out;
}

std::vector<Prediction> predict_all(const RcnModel& model, std::span<const data::RelationInstance> instances,
                                    std::size_t threads) {
  std::vector<Prediction> out(instances.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, instances.size()));
  auto work = [&](std::size_t worker) {
    for (std::size_t i = worker; i < instances.size(); i += threads) out[i] = model.predict(instances[i]);
  };
  if (threads <= 1) {
    work(0);
    return out;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
  return out;
}

std::vector<EpochRecord> train(RcnModel& model, std::span<const data::RelationInstance> instances,
                               const TrainOptions& options) {
  if (instances.empty()) throw std::invalid_argument("train: empty training set");
  const auto gold = gold_labels(instances);
  const ModelConfig& cfg = model.config();

  std::vector<EncodedInstance> encoded;
  encoded.reserve(instances.size());
  for (const auto& inst : instances) encoded.push_back(model.encode(inst));

  std::vector<data::RelationLabel> dev_gold;
  if (!options.dev.empty()) dev_gold = gold_labels(options.dev);

  auto params = model.parameters().all();
  model.parameters().zero_grad();
  std::mt19937_64 shuffle_rng(cfg.seed + 1);
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);

  const std::size_t epochs = options.epochs.value_or(cfg.epochs);
  std::vector<EpochRecord> log;
  num::Tape tape;
  std::vector<data::RelationLabel> predicted(instances.size());

  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double weight =
          cfg.loss_reduction == LossReduction::Mean ? 1.0 / static_cast<double>(end - start) : 1.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        tape.clear();
        const auto bound = model.bind_trainable(tape);
        const auto fwd = model.forward(tape, bound, encoded[i]);
        num::Var loss = model.loss(fwd, gold[i]);
        rec.loss += loss.value().item();
        if (weight != 1.0) loss = num::scale(loss, weight);
        tape.backward(loss);
        predicted[i] = data::label_at(argmax_lowest(fwd.scores));
      }
      num::adam_step(params, cfg.adam);
      model.parameters().zero_grad();
    }
    rec.train_f1 = pipeline::evaluate_relations(predicted, gold).micro.f1;
    if (!options.dev.empty()) {
      const auto preds = predict_all(model, options.dev);
      std::vector<data::RelationLabel> labels;
      labels.reserve(preds.size());
      for (const auto& p : preds) labels.push_back(p.label);
      rec.dev_f1 = pipeline::evaluate_relations(labels, dev_gold).micro.f1;
    }
    if (options.epoch_checkpoint) save_checkpoint(model, *options.epoch_checkpoint);
    if (options.on_epoch) options.on_epoch(rec);
    log.push_back(rec);
  }
  return log;
}

}  // namespace cadsev::model
