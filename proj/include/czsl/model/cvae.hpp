#pragma once

// One task's private conditional VAE plus its auxiliary prediction network.
//
//   encoder  [x | e]   -> [mu | logvar]          (d + a -> 2z)
//   decoder  [z | e]   -> x_hat                  (z + a -> d)
//   aux      x_hat     -> [logits | e_hat]       (d -> C_total + a)
//
// Both halves of the VAE are conditioned on the class attribute vector only,
// so generation works for any class that has an attribute row.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "czsl/core/binary_io.hpp"
#include "czsl/core/matrix.hpp"
#include "czsl/core/random.hpp"
#include "czsl/nn/checkpoint.hpp"
#include "czsl/nn/losses.hpp"
#include "czsl/nn/mlp.hpp"

namespace czsl {

// Hidden layer widths (all relu) for the three networks of a module.
struct HiddenDims {
  std::vector<std::size_t> encoder{512};
  std::vector<std::size_t> decoder{512};
  std::vector<std::size_t> aux{256};

  bool operator==(const HiddenDims&) const = default;
};

struct LossWeights {
  double task = 1.0;   // cross-entropy on aux logits
  double vae = 1.0;    // reconstruction + KL
  double label = 1.0;  // MSE of aux softmax vs one-hot
  double embed = 1.0;  // MSE of aux embedding vs attributes
};

struct LossBreakdown {
  double l_task = 0.0;
  double l_recon = 0.0;
  double l_kl = 0.0;
  double l_vae = 0.0;
  double l_y = 0.0;
  double l_e = 0.0;
  double total = 0.0;
};

// Weighted objective lambda1*L_task + lambda2*L_VAE + lambda3*L_y + lambda4*L_e.
inline double total_loss(const LossBreakdown& b, const LossWeights& w) {
  if (w.task < 0 || w.vae < 0 || w.label < 0 || w.embed < 0)
    throw Error("total_loss: loss weights must be nonnegative");
  return w.task * b.l_task + w.vae * b.l_vae + w.label * b.l_y + w.embed * b.l_e;
}

template <typename T>
struct GaussianCode {
  Matrix<T> mu;
  Matrix<T> logvar;
};

template <typename T>
struct CvaeModule {
  std::size_t task_id = 0;
  std::vector<std::uint32_t> owned_classes;
  std::size_t feature_dim = 0;
  std::size_t attr_dim = 0;
  std::size_t num_classes = 0;  // C_total
  std::size_t z_dim = 0;
  nn::MlpParams<T> encoder;
  nn::MlpParams<T> decoder;
  nn::MlpParams<T> aux;
  std::uint64_t train_steps = 0;
  bool frozen = false;

  std::size_t num_parameters() const {
    return encoder.num_parameters() + decoder.num_parameters() + aux.num_parameters();
  }

  void validate() const {
    encoder.validate();
    decoder.validate();
    aux.validate();
    auto expect = [](Eigen::Index got, std::size_t want, const char* what) {
      if (static_cast<std::size_t>(got) != want)
        throw ShapeError(std::string("cvae: ") + what + " width " + std::to_string(got) + " != " +
                         std::to_string(want));
    };
    expect(encoder.in_dim(), feature_dim + attr_dim, "encoder input");
    expect(encoder.out_dim(), 2 * z_dim, "encoder output");
    expect(decoder.in_dim(), z_dim + attr_dim, "decoder input");
    expect(decoder.out_dim(), feature_dim, "decoder output");
    expect(aux.in_dim(), feature_dim, "aux input");
    expect(aux.out_dim(), num_classes + attr_dim, "aux output");
  }
};

namespace detail {

inline std::vector<std::size_t> widths(std::size_t in, const std::vector<std::size_t>& hidden,
                                       std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

inline std::vector<nn::Activation> relu_then_identity(std::size_t hidden_layers) {
  std::vector<nn::Activation> acts(hidden_layers, nn::Activation::relu);
  acts.push_back(nn::Activation::identity);
  return acts;
}

template <typename T>
void check_batch(const CvaeModule<T>& m, const Matrix<T>& x, const Matrix<T>& e) {
  if (static_cast<std::size_t>(x.cols()) != m.feature_dim)
    throw ShapeError("cvae: feature width " + std::to_string(x.cols()) + " != " + std::to_string(m.feature_dim));
  if (static_cast<std::size_t>(e.cols()) != m.attr_dim)
    throw ShapeError("cvae: attribute width " + std::to_string(e.cols()) + " != " + std::to_string(m.attr_dim));
  if (x.rows() != e.rows()) throw ShapeError("cvae: feature/attribute row mismatch");
}

}  // namespace detail

template <typename T>
CvaeModule<T> cvae_init(std::size_t task_id, std::vector<std::uint32_t> owned_classes,
                        std::size_t feature_dim, std::size_t attr_dim, std::size_t num_classes,
                        std::size_t z_dim, const HiddenDims& hidden, std::uint64_t seed) {
  if (feature_dim == 0 || attr_dim == 0 || num_classes == 0 || z_dim == 0)
    throw Error("cvae_init: dims must be positive");
  CvaeModule<T> m;
  m.task_id = task_id;
  m.owned_classes = std::move(owned_classes);
  m.feature_dim = feature_dim;
  m.attr_dim = attr_dim;
  m.num_classes = num_classes;
  m.z_dim = z_dim;
  m.encoder = nn::mlp_init<T>(detail::widths(feature_dim + attr_dim, hidden.encoder, 2 * z_dim),
                              detail::relu_then_identity(hidden.encoder.size()), Rng::derive(seed, 10));
  m.decoder = nn::mlp_init<T>(detail::widths(z_dim + attr_dim, hidden.decoder, feature_dim),
                              detail::relu_then_identity(hidden.decoder.size()), Rng::derive(seed, 11));
  m.aux = nn::mlp_init<T>(detail::widths(feature_dim, hidden.aux, num_classes + attr_dim),
                          detail::relu_then_identity(hidden.aux.size()), Rng::derive(seed, 12));
  return m;
}

template <typename T>
GaussianCode<T> encode(const CvaeModule<T>& m, const Matrix<T>& x, const Matrix<T>& e) {
  detail::check_batch(m, x, e);
  const Matrix<T> out = nn::mlp_forward(m.encoder, hconcat(x, e));
  const auto z = static_cast<Eigen::Index>(m.z_dim);
  return {out.leftCols(z), out.rightCols(z)};
}

template <typename T>
Matrix<T> decode(const CvaeModule<T>& m, const Matrix<T>& z, const Matrix<T>& e) {
  if (static_cast<std::size_t>(z.cols()) != m.z_dim)
    throw ShapeError("decode: latent width " + std::to_string(z.cols()) + " != " + std::to_string(m.z_dim));
  if (static_cast<std::size_t>(e.cols()) != m.attr_dim || e.rows() != z.rows())
    throw ShapeError("decode: attribute batch shape mismatch");
  return nn::mlp_forward(m.decoder, hconcat(z, e));
}

template <typename T>
struct AuxOutput {
  Matrix<T> logits;  // B x C_total
  Matrix<T> e_hat;   // B x a
};

template <typename T>
AuxOutput<T> aux_forward(const CvaeModule<T>& m, const Matrix<T>& x_hat) {
  if (static_cast<std::size_t>(x_hat.cols()) != m.feature_dim)
    throw ShapeError("aux_forward: input width " + std::to_string(x_hat.cols()) + " != " +
                     std::to_string(m.feature_dim));
  const Matrix<T> out = nn::mlp_forward(m.aux, x_hat);
  const auto c = static_cast<Eigen::Index>(m.num_classes);
  return {out.leftCols(c), out.rightCols(static_cast<Eigen::Index>(m.attr_dim))};
}

template <typename T>
struct ModuleGradients {
  nn::Gradients<T> encoder;
  nn::Gradients<T> decoder;
  nn::Gradients<T> aux;
};

template <typename T>
struct ModuleLossResult {
  LossBreakdown losses;
  ModuleGradients<T> grads;
};

/// Loss components for one batch and, when `with_grads`, exact gradients of
/// the weighted total with respect to all three networks.
template <typename T>
ModuleLossResult<T> cvae_loss_and_gradients(const CvaeModule<T>& m, const Matrix<T>& x,
                                            const Labels& y, const Matrix<T>& e,
                                            const Matrix<T>& noise, const LossWeights& w,
                                            bool with_grads = true) {
  detail::check_batch(m, x, e);
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ShapeError("cvae_losses: label count mismatch");
  if (noise.rows() != x.rows() || static_cast<std::size_t>(noise.cols()) != m.z_dim)
    throw ShapeError("cvae_losses: noise must be " +
                     shape_str(x.rows(), static_cast<Eigen::Index>(m.z_dim)));
  const auto zd = static_cast<Eigen::Index>(m.z_dim);
  const auto c = static_cast<Eigen::Index>(m.num_classes);
  const auto a = static_cast<Eigen::Index>(m.attr_dim);

  const auto enc = nn::mlp_forward_cached(m.encoder, hconcat(x, e));
  const Matrix<T> mu = enc.output().leftCols(zd);
  const Matrix<T> logvar = enc.output().rightCols(zd);
  const Matrix<T> z = nn::reparameterize(mu, logvar, noise);
  const auto dec = nn::mlp_forward_cached(m.decoder, hconcat(z, e));
  const Matrix<T>& x_hat = dec.output();
  const auto aux = nn::mlp_forward_cached(m.aux, x_hat);
  const Matrix<T> logits = aux.output().leftCols(c);
  const Matrix<T> e_hat = aux.output().rightCols(a);

  const auto recon = nn::mse(x_hat, x);
  const auto kl = nn::gaussian_kl(mu, logvar);
  const auto ce = nn::softmax_cross_entropy(logits, y);
  const Matrix<T> probs = nn::softmax(logits);
  const auto ly = nn::mse(probs, nn::one_hot<T>(y, c));
  const auto le = nn::mse(e_hat, e);

  ModuleLossResult<T> r;
  r.losses.l_recon = recon.loss;
  r.losses.l_kl = kl.loss;
  r.losses.l_vae = recon.loss + kl.loss;
  r.losses.l_task = ce.loss;
  r.losses.l_y = ly.loss;
  r.losses.l_e = le.loss;
  r.losses.total = total_loss(r.losses, w);
  if (!with_grads) return r;

  const T w_task = static_cast<T>(w.task), w_vae = static_cast<T>(w.vae);
  const T w_label = static_cast<T>(w.label), w_embed = static_cast<T>(w.embed);

  Matrix<T> d_aux_out(x.rows(), c + a);
  d_aux_out.leftCols(c) = w_task * ce.grad + w_label * nn::softmax_backward(probs, ly.grad);
  d_aux_out.rightCols(a) = w_embed * le.grad;
  Matrix<T> d_x_hat;
  r.grads.aux = nn::mlp_backward(m.aux, aux, d_aux_out, &d_x_hat);

  d_x_hat += w_vae * recon.grad;
  Matrix<T> d_dec_in;
  r.grads.decoder = nn::mlp_backward(m.decoder, dec, d_x_hat, &d_dec_in);

  const Matrix<T> d_z = d_dec_in.leftCols(zd);
  Matrix<T> d_enc_out(x.rows(), 2 * zd);
  d_enc_out.leftCols(zd) = d_z + w_vae * kl.d_mu;
  d_enc_out.rightCols(zd) =
      (d_z.array() * noise.array() * (logvar.array() * T(0.5)).exp() * T(0.5)).matrix() +
      w_vae * kl.d_logvar;
  r.grads.encoder = nn::mlp_backward(m.encoder, enc, d_enc_out);
  return r;
}

template <typename T>
LossBreakdown cvae_losses(const CvaeModule<T>& m, const Matrix<T>& x, const Labels& y,
                          const Matrix<T>& e, const Matrix<T>& noise, const LossWeights& w = {}) {
  return cvae_loss_and_gradients(m, x, y, e, noise, w, false).losses;
}

/// n feature rows for one class: z ~ N(0, I) from `seed`, decoded with the
/// class embedding on every row.
template <typename T>
Matrix<T> generate(const CvaeModule<T>& m, const RowVector<T>& class_embedding, std::size_t n,
                   std::uint64_t seed) {
  if (n == 0) throw Error("generate: n must be >= 1");
  if (static_cast<std::size_t>(class_embedding.size()) != m.attr_dim)
    throw ShapeError("generate: embedding width " + std::to_string(class_embedding.size()) + " != " +
                     std::to_string(m.attr_dim));
  Rng rng(seed);
  const auto rows = static_cast<Eigen::Index>(n);
  const Matrix<T> z = rng.normal_matrix<T>(rows, static_cast<Eigen::Index>(m.z_dim));
  const Matrix<T> e = class_embedding.replicate(rows, 1);
  return decode(m, z, e);
}

// --- module checkpoints -----------------------------------------------------
//
// A module checkpoint directory holds module.json (task_id, owned_classes,
// dims, frozen flag, train_steps) and encoder.ckpt, decoder.ckpt, aux.ckpt in
// the parameter checkpoint container.

template <typename T>
nlohmann::ordered_json module_descriptor(const CvaeModule<T>& m) {
  nlohmann::ordered_json j;
  j["task_id"] = m.task_id;
  j["owned_classes"] = m.owned_classes;
  j["feature_dim"] = m.feature_dim;
  j["attr_dim"] = m.attr_dim;
  j["num_classes"] = m.num_classes;
  j["z_dim"] = m.z_dim;
  j["frozen"] = m.frozen;
  j["train_steps"] = m.train_steps;
  return j;
}

/// Fingerprint of the module's checkpoint bytes; stable while the module is frozen.
template <typename T>
std::uint64_t module_hash(const CvaeModule<T>& m) {
  Fnv1a h;
  const std::string desc = module_descriptor(m).dump();
  h.update(desc.data(), desc.size());
  for (const auto* net : {&m.encoder, &m.decoder, &m.aux}) {
    const auto bytes = nn::encode_checkpoint(*net, m.train_steps);
    h.update(bytes.data(), bytes.size());
  }
  return h.digest();
}

template <typename T>
void save_module(const CvaeModule<T>& m, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
  write_file_text(dir / "module.json", module_descriptor(m).dump(2) + "\n");
  nn::save_checkpoint(dir / "encoder.ckpt", m.encoder, m.train_steps);
  nn::save_checkpoint(dir / "decoder.ckpt", m.decoder, m.train_steps);
  nn::save_checkpoint(dir / "aux.ckpt", m.aux, m.train_steps);
}

template <typename T>
CvaeModule<T> load_module(const fs::path& dir) {
  const auto j = nlohmann::json::parse(read_file_text(dir / "module.json"));
  CvaeModule<T> m;
  m.task_id = j.at("task_id").get<std::size_t>();
  m.owned_classes = j.at("owned_classes").get<std::vector<std::uint32_t>>();
  m.feature_dim = j.at("feature_dim").get<std::size_t>();
  m.attr_dim = j.at("attr_dim").get<std::size_t>();
  m.num_classes = j.at("num_classes").get<std::size_t>();
  m.z_dim = j.at("z_dim").get<std::size_t>();
  m.frozen = j.at("frozen").get<bool>();
  m.train_steps = j.value("train_steps", std::uint64_t{0});
  m.encoder = nn::load_checkpoint<T>(dir / "encoder.ckpt").params;
  m.decoder = nn::load_checkpoint<T>(dir / "decoder.ckpt").params;
  m.aux = nn::load_checkpoint<T>(dir / "aux.ckpt").params;
  m.validate();
  return m;
}

}  // namespace czsl
