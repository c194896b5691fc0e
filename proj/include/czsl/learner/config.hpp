#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "czsl/model/cvae.hpp"
#include "czsl/nn/mlp.hpp"

namespace czsl {

// Where the classifier's synthetic features for already-seen classes come from.
enum class SeenSource {
  newest,  // the module trained on the latest task (it has absorbed replay)
  owner,   // the frozen module of the class's own task
};

enum class AccuracyAveraging { per_class, per_sample };

struct TrainConfig {
  std::size_t epochs = 101;
  std::size_t classifier_epochs = 25;
  double lr = 1e-4;
  double classifier_lr = 1e-4;
  std::size_t n_replay_per_class = 50;
  std::size_t n_classifier_per_class = 150;
  std::size_t z_dim = 50;
  LossWeights lambdas{};
  bool use_aux_losses = true;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  HiddenDims hidden{};
  std::size_t classifier_hidden = 512;
  nn::Activation classifier_activation = nn::Activation::relu;
  SeenSource seen_source = SeenSource::newest;
  AccuracyAveraging averaging = AccuracyAveraging::per_class;

  // Loss weights actually used for training; aux losses off zeroes L_y and L_e.
  LossWeights effective_weights() const {
    LossWeights w = lambdas;
    if (!use_aux_losses) {
      w.label = 0.0;
      w.embed = 0.0;
    }
    return w;
  }

  void validate() const {
    if (epochs == 0 || classifier_epochs == 0 || batch_size == 0 || z_dim == 0 ||
        n_classifier_per_class == 0 || classifier_hidden == 0)
      throw Error("train config: counts must be positive");
    if (!(lr > 0) || !(classifier_lr > 0)) throw Error("train config: learning rates must be positive");
    if (lambdas.task < 0 || lambdas.vae < 0 || lambdas.label < 0 || lambdas.embed < 0)
      throw Error("train config: lambdas must be nonnegative");
  }
};

inline nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["epochs"] = c.epochs;
  j["classifier_epochs"] = c.classifier_epochs;
  j["lr"] = c.lr;
  j["classifier_lr"] = c.classifier_lr;
  j["n_replay_per_class"] = c.n_replay_per_class;
  j["n_classifier_per_class"] = c.n_classifier_per_class;
  j["z_dim"] = c.z_dim;
  j["lambda1"] = c.lambdas.task;
  j["lambda2"] = c.lambdas.vae;
  j["lambda3"] = c.lambdas.label;
  j["lambda4"] = c.lambdas.embed;
  j["use_aux_losses"] = c.use_aux_losses;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["hidden"] = {{"encoder", c.hidden.encoder}, {"decoder", c.hidden.decoder}, {"aux", c.hidden.aux}};
  j["classifier_hidden"] = c.classifier_hidden;
  j["classifier_activation"] = nn::to_string(c.classifier_activation);
  j["seen_source"] = c.seen_source == SeenSource::newest ? "newest" : "owner";
  j["accuracy"] = c.averaging == AccuracyAveraging::per_class ? "per_class" : "per_sample";
  return j;
}

// Missing keys keep their defaults; unknown keys are rejected.
inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (!j.is_object()) throw Error("train config: expected an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "epochs") c.epochs = v.get<std::size_t>();
    else if (key == "classifier_epochs") c.classifier_epochs = v.get<std::size_t>();
    else if (key == "lr") c.lr = v.get<double>();
    else if (key == "classifier_lr") c.classifier_lr = v.get<double>();
    else if (key == "n_replay_per_class") c.n_replay_per_class = v.get<std::size_t>();
    else if (key == "n_classifier_per_class") c.n_classifier_per_class = v.get<std::size_t>();
    else if (key == "z_dim") c.z_dim = v.get<std::size_t>();
    else if (key == "lambda1") c.lambdas.task = v.get<double>();
    else if (key == "lambda2") c.lambdas.vae = v.get<double>();
    else if (key == "lambda3") c.lambdas.label = v.get<double>();
    else if (key == "lambda4") c.lambdas.embed = v.get<double>();
    else if (key == "use_aux_losses") c.use_aux_losses = v.get<bool>();
    else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "hidden") {
      c.hidden.encoder = v.value("encoder", c.hidden.encoder);
      c.hidden.decoder = v.value("decoder", c.hidden.decoder);
      c.hidden.aux = v.value("aux", c.hidden.aux);
    } else if (key == "classifier_hidden") c.classifier_hidden = v.get<std::size_t>();
    else if (key == "classifier_activation")
      c.classifier_activation = nn::activation_from_string(v.get<std::string>());
    else if (key == "seen_source") {
      const auto s = v.get<std::string>();
      if (s == "newest") c.seen_source = SeenSource::newest;
      else if (s == "owner") c.seen_source = SeenSource::owner;
      else throw Error("train config: seen_source must be 'newest' or 'owner'");
    } else if (key == "accuracy") {
      const auto s = v.get<std::string>();
      if (s == "per_class") c.averaging = AccuracyAveraging::per_class;
      else if (s == "per_sample") c.averaging = AccuracyAveraging::per_sample;
      else throw Error("train config: accuracy must be 'per_class' or 'per_sample'");
    } else {
      throw Error("train config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace czsl
