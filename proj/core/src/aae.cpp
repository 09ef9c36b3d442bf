#include "driveby/aae.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "driveby/error.hpp"
#include "driveby/random.hpp"

namespace driveby {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void activate(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::linear:
      break;
    case Activation::relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::sigmoid:
      z = z.unaryExpr([](double v) { return sigmoid(v); });
      break;
  }
}

// Chain rule through an activation given its output.
void apply_derivative(Eigen::MatrixXd& delta, const Eigen::MatrixXd& out, Activation act) {
  switch (act) {
    case Activation::linear:
      break;
    case Activation::relu:
      delta = delta.cwiseProduct((out.array() > 0.0).cast<double>().matrix());
      break;
    case Activation::sigmoid:
      delta = delta.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix()));
      break;
  }
}

class Adam {
 public:
  Adam(std::size_t n, const TrainingConfig& cfg)
      : cfg_(cfg), m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))), v_(m_) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    const double lr = cfg_.learning_rate;
    const double eps = cfg_.epsilon;
    params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
  }

 private:
  TrainingConfig cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  int t_ = 0;
};

Eigen::MatrixXd standard_normal(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd out(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) out(r, c) = rng.normal();
  return out;
}

std::string describe(const std::vector<int>& w) {
  std::ostringstream s;
  for (std::size_t i = 0; i < w.size(); ++i) s << (i ? "->" : "") << w[i];
  return s.str();
}

constexpr char kModelMagic[8] = {'D', 'R', 'V', 'B', 'Y', 'A', 'A', 'E'};
constexpr std::uint32_t kModelVersion = 1;

}  // namespace

Mlp::Mlp(const std::vector<int>& widths, Activation hidden, Activation output) {
  if (widths.size() < 2) throw InvalidInput("mlp: need at least input and output widths");
  for (int w : widths)
    if (w < 1) throw InvalidInput("mlp: widths must be >= 1");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.weight = Eigen::MatrixXd::Zero(widths[l + 1], widths[l]);
    layer.bias = Eigen::VectorXd::Zero(widths[l + 1]);
    layer.activation = l + 2 == widths.size() ? output : hidden;
    layers_.push_back(std::move(layer));
  }
}

void Mlp::initialize(std::uint64_t seed) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Rng rng(derive_seed(seed, "glorot", {l}));
    DenseLayer& layer = layers_[l];
    const double limit = std::sqrt(6.0 / (layer.inputs() + layer.outputs()));
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
        layer.weight(r, c) = rng.uniform(-limit, limit);
    layer.bias.setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_width()) throw InvalidInput("mlp: input width mismatch");
  Eigen::MatrixXd a = x;
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z = (layer.weight * a).colwise() + layer.bias;
    activate(z, layer.activation);
    a = std::move(z);
  }
  return a;
}

void Mlp::forward_cached(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& outputs,
                         Eigen::MatrixXd& logits) const {
  if (x.rows() != input_width()) throw InvalidInput("mlp: input width mismatch");
  outputs.resize(layers_.size());
  const Eigen::MatrixXd* a = &x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = (layers_[l].weight * *a).colwise() + layers_[l].bias;
    if (l + 1 == layers_.size()) logits = z;
    activate(z, layers_[l].activation);
    outputs[l] = std::move(z);
    a = &outputs[l];
  }
}

Eigen::MatrixXd Mlp::backward(const std::vector<Eigen::MatrixXd>& outputs,
                              const Eigen::MatrixXd& input, const Eigen::MatrixXd& d_logits,
                              Eigen::VectorXd* grad) const {
  if (grad && static_cast<std::size_t>(grad->size()) != parameter_count())
    throw InvalidInput("mlp: gradient buffer has the wrong size");
  std::vector<std::size_t> offset(layers_.size());
  std::size_t pos = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offset[l] = pos;
    pos += static_cast<std::size_t>(layers_[l].weight.size() + layers_[l].bias.size());
  }
  Eigen::MatrixXd delta = d_logits;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const DenseLayer& layer = layers_[l];
    const Eigen::MatrixXd& in = l == 0 ? input : outputs[l - 1];
    if (grad) {
      const auto wsize = layer.weight.size();
      Eigen::Map<Eigen::MatrixXd> gw(grad->data() + offset[l], layer.weight.rows(),
                                     layer.weight.cols());
      gw.noalias() += delta * in.transpose();
      grad->segment(static_cast<Eigen::Index>(offset[l]) + wsize, layer.bias.size()) +=
          delta.rowwise().sum();
    }
    Eigen::MatrixXd prev = layer.weight.transpose() * delta;
    if (l > 0) apply_derivative(prev, outputs[l - 1], layers_[l - 1].activation);
    delta = std::move(prev);
  }
  return delta;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index pos = 0;
  for (const auto& l : layers_) {
    flat.segment(pos, l.weight.size()) = Eigen::Map<const Eigen::VectorXd>(l.weight.data(), l.weight.size());
    pos += l.weight.size();
    flat.segment(pos, l.bias.size()) = l.bias;
    pos += l.bias.size();
  }
  return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count())
    throw InvalidInput("mlp: parameter vector has the wrong size");
  Eigen::Index pos = 0;
  for (auto& l : layers_) {
    Eigen::Map<Eigen::VectorXd>(l.weight.data(), l.weight.size()) = flat.segment(pos, l.weight.size());
    pos += l.weight.size();
    l.bias = flat.segment(pos, l.bias.size());
    pos += l.bias.size();
  }
}

std::vector<int> Mlp::widths() const {
  std::vector<int> w;
  if (layers_.empty()) return w;
  w.push_back(layers_.front().inputs());
  for (const auto& l : layers_) w.push_back(l.outputs());
  return w;
}

void AAEArchitecture::validate() const {
  if (encoder.size() < 2 || decoder.size() < 2 || discriminator.size() < 2)
    throw InvalidInput("aae: every network needs at least two widths");
  if (encoder.back() != decoder.front())
    throw InvalidInput("aae: decoder input must equal the latent width");
  if (decoder.back() != encoder.front())
    throw InvalidInput("aae: decoder output must equal the input width");
  if (discriminator.front() != encoder.back())
    throw InvalidInput("aae: discriminator input must equal the latent width");
  if (discriminator.back() != 1) throw InvalidInput("aae: discriminator must output one value");
}

void TrainingConfig::validate() const {
  if (batch_size < 1) throw InvalidInput("training: batch_size must be >= 1");
  if (epochs < 0) throw InvalidInput("training: epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidInput("training: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidInput("training: moment decay constants must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidInput("training: epsilon must be > 0");
}

AAEModel::AAEModel(const AAEArchitecture& arch, std::uint64_t seed)
    : arch_(arch),
      seed_(seed),
      encoder_(arch.encoder, Activation::relu, Activation::linear),
      decoder_(arch.decoder, Activation::relu, Activation::sigmoid),
      discriminator_(arch.discriminator, Activation::relu, Activation::sigmoid) {
  arch.validate();
  encoder_.initialize(derive_seed(seed, "aae-encoder"));
  decoder_.initialize(derive_seed(seed, "aae-decoder"));
  discriminator_.initialize(derive_seed(seed, "aae-discriminator"));
}

Eigen::MatrixXd AAEModel::reconstruct(const Eigen::MatrixXd& x) const {
  return decoder_.forward(encoder_.forward(x));
}

Eigen::VectorXd AAEModel::discriminate(const Eigen::MatrixXd& y) const {
  return discriminator_.forward(y).row(0).transpose();
}

std::vector<double> AAEModel::reconstruct(const std::vector<double>& sample) const {
  if (static_cast<int>(sample.size()) != encoder_.input_width())
    throw InvalidInput("aae: sample width does not match the model input");
  const Eigen::Map<const Eigen::VectorXd> x(sample.data(), static_cast<Eigen::Index>(sample.size()));
  const Eigen::VectorXd out = reconstruct(Eigen::MatrixXd(x));
  return {out.data(), out.data() + out.size()};
}

AAELosses AAEModel::losses(const Eigen::MatrixXd& x, const Eigen::MatrixXd& prior) const {
  AAELosses out;
  const Eigen::MatrixXd y = encode(x);
  const Eigen::MatrixXd xr = decode(y);
  out.reconstruction = (xr - x).squaredNorm() / static_cast<double>(x.size());
  std::vector<Eigen::MatrixXd> cache;
  Eigen::MatrixXd z_enc, z_pri;
  discriminator_.forward_cached(y, cache, z_enc);
  discriminator_.forward_cached(prior, cache, z_pri);
  double adv = 0.0, fake = 0.0, real = 0.0;
  for (Eigen::Index i = 0; i < z_enc.cols(); ++i) {
    adv += softplus(-z_enc(0, i));
    fake += softplus(z_enc(0, i));
  }
  for (Eigen::Index i = 0; i < z_pri.cols(); ++i) real += softplus(-z_pri(0, i));
  out.adversarial = adv / static_cast<double>(z_enc.cols());
  out.discriminator =
      real / static_cast<double>(z_pri.cols()) + fake / static_cast<double>(z_enc.cols());
  return out;
}

Eigen::VectorXd AAEModel::generator_gradient(const Eigen::MatrixXd& x, AAELosses* losses) const {
  const auto n_enc = static_cast<Eigen::Index>(encoder_.parameter_count());
  const auto n_dec = static_cast<Eigen::Index>(decoder_.parameter_count());
  Eigen::VectorXd grad_enc = Eigen::VectorXd::Zero(n_enc);
  Eigen::VectorXd grad_dec = Eigen::VectorXd::Zero(n_dec);
  const double batch = static_cast<double>(x.cols());

  std::vector<Eigen::MatrixXd> enc_out, dec_out, dis_out;
  Eigen::MatrixXd enc_logits, dec_logits, dis_logits;
  encoder_.forward_cached(x, enc_out, enc_logits);
  const Eigen::MatrixXd& y = enc_out.back();
  decoder_.forward_cached(y, dec_out, dec_logits);
  const Eigen::MatrixXd& xr = dec_out.back();

  Eigen::MatrixXd d_xr = (2.0 / static_cast<double>(x.size())) * (xr - x);
  apply_derivative(d_xr, xr, decoder_.layers().back().activation);
  Eigen::MatrixXd d_y = decoder_.backward(dec_out, y, d_xr, &grad_dec);

  discriminator_.forward_cached(y, dis_out, dis_logits);
  Eigen::MatrixXd d_z(1, x.cols());
  double adv = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    d_z(0, i) = (sigmoid(dis_logits(0, i)) - 1.0) / batch;
    adv += softplus(-dis_logits(0, i));
  }
  d_y += discriminator_.backward(dis_out, y, d_z, nullptr);
  apply_derivative(d_y, y, encoder_.layers().back().activation);
  encoder_.backward(enc_out, x, d_y, &grad_enc);

  if (losses) {
    losses->reconstruction = (xr - x).squaredNorm() / static_cast<double>(x.size());
    losses->adversarial = adv / batch;
  }
  Eigen::VectorXd grad(n_enc + n_dec);
  grad << grad_enc, grad_dec;
  return grad;
}

Eigen::VectorXd AAEModel::discriminator_gradient(const Eigen::MatrixXd& x,
                                                 const Eigen::MatrixXd& prior,
                                                 double* loss) const {
  Eigen::VectorXd grad =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(discriminator_.parameter_count()));
  const Eigen::MatrixXd y = encode(x);
  std::vector<Eigen::MatrixXd> cache;
  Eigen::MatrixXd logits;
  double total = 0.0;

  discriminator_.forward_cached(prior, cache, logits);
  Eigen::MatrixXd d_z(1, logits.cols());
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    d_z(0, i) = (sigmoid(logits(0, i)) - 1.0) / static_cast<double>(logits.cols());
    total += softplus(-logits(0, i)) / static_cast<double>(logits.cols());
  }
  discriminator_.backward(cache, prior, d_z, &grad);

  discriminator_.forward_cached(y, cache, logits);
  d_z.resize(1, logits.cols());
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    d_z(0, i) = sigmoid(logits(0, i)) / static_cast<double>(logits.cols());
    total += softplus(logits(0, i)) / static_cast<double>(logits.cols());
  }
  discriminator_.backward(cache, y, d_z, &grad);
  if (loss) *loss = total;
  return grad;
}

Eigen::VectorXd AAEModel::generator_parameters() const {
  const Eigen::VectorXd e = encoder_.parameters();
  const Eigen::VectorXd d = decoder_.parameters();
  Eigen::VectorXd out(e.size() + d.size());
  out << e, d;
  return out;
}

void AAEModel::set_generator_parameters(const Eigen::VectorXd& flat) {
  const auto n_enc = static_cast<Eigen::Index>(encoder_.parameter_count());
  if (flat.size() != n_enc + static_cast<Eigen::Index>(decoder_.parameter_count()))
    throw InvalidInput("aae: generator parameter vector has the wrong size");
  encoder_.set_parameters(flat.head(n_enc));
  decoder_.set_parameters(flat.tail(flat.size() - n_enc));
}

void AAEModel::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nlohmann::json header = {
      {"format", "driveby-aae"},
      {"version", kModelVersion},
      {"seed", seed_},
      {"encoder", arch_.encoder},
      {"decoder", arch_.decoder},
      {"discriminator", arch_.discriminator},
      {"metadata", metadata_},
  };
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  out.write(kModelMagic, sizeof kModelMagic);
  const std::uint32_t version = kModelVersion;
  const std::uint64_t length = text.size();
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&length), sizeof length);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Mlp* net : {&encoder_, &decoder_, &discriminator_}) {
    const Eigen::VectorXd p = net->parameters();
    out.write(reinterpret_cast<const char*>(p.data()),
              static_cast<std::streamsize>(p.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing model file " + path.string());
}

AAEModel AAEModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  char magic[sizeof kModelMagic];
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&length), sizeof length);
  if (!in || std::memcmp(magic, kModelMagic, sizeof magic) != 0)
    throw IoError("not a driveby model file: " + path.string());
  if (version != kModelVersion) throw IoError("unsupported model file version");
  if (length > (1u << 26)) throw IoError("model header is implausibly large");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("corrupt model header: ") + e.what());
  }
  AAEArchitecture arch;
  arch.encoder = header.at("encoder").get<std::vector<int>>();
  arch.decoder = header.at("decoder").get<std::vector<int>>();
  arch.discriminator = header.at("discriminator").get<std::vector<int>>();
  AAEModel model(arch, header.at("seed").get<std::uint64_t>());
  model.metadata_ = header.value("metadata", nlohmann::json::object());
  for (Mlp* net : {&model.encoder_, &model.decoder_, &model.discriminator_}) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(net->parameter_count()));
    in.read(reinterpret_cast<char*>(p.data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!in) throw IoError("truncated model file " + path.string());
    net->set_parameters(p);
  }
  return model;
}

AAEModel train_aae(const Eigen::MatrixXd& data, const TrainingConfig& config,
                   const AAEArchitecture& arch, TrainingHistory* history) {
  config.validate();
  arch.validate();
  if (data.rows() < 1) throw InvalidInput("training: empty dataset");
  if (data.cols() != arch.encoder.front())
    throw InvalidInput("training: sample width " + std::to_string(data.cols()) +
                       " does not match encoder input " + describe(arch.encoder));
  if (!data.allFinite()) throw InvalidInput("training: dataset contains non-finite values");

  AAEModel model(arch, config.seed);
  const Eigen::MatrixXd samples = data.transpose();
  const auto n = static_cast<std::size_t>(samples.cols());
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const int latent = arch.encoder.back();

  Eigen::VectorXd gen = model.generator_parameters();
  Eigen::VectorXd dis = model.discriminator().parameters();
  Adam gen_opt(static_cast<std::size_t>(gen.size()), config);
  Adam dis_opt(static_cast<std::size_t>(dis.size()), config);
  if (history) *history = {};

  Eigen::MatrixXd x;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle(derive_seed(config.seed, "aae-shuffle", {static_cast<std::uint64_t>(epoch)}));
    const auto order = shuffle.permutation(n);
    double rec_sum = 0.0, adv_sum = 0.0, dis_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batches) {
      const std::size_t count = std::min(batch, n - start);
      x.resize(samples.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t j = 0; j < count; ++j)
        x.col(static_cast<Eigen::Index>(j)) = samples.col(static_cast<Eigen::Index>(order[start + j]));

      AAELosses l;
      const Eigen::VectorXd g = model.generator_gradient(x, &l);
      gen_opt.step(gen, g);
      model.set_generator_parameters(gen);

      Rng prior_rng(derive_seed(config.seed, "aae-prior",
                                {static_cast<std::uint64_t>(epoch), batches}));
      const Eigen::MatrixXd prior = standard_normal(prior_rng, latent, static_cast<int>(count));
      double d_loss = 0.0;
      const Eigen::VectorXd gd = model.discriminator_gradient(x, prior, &d_loss);
      dis_opt.step(dis, gd);
      model.discriminator().set_parameters(dis);

      if (!std::isfinite(l.reconstruction) || !std::isfinite(l.adversarial) ||
          !std::isfinite(d_loss) || !g.allFinite() || !gd.allFinite()) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ", batch " << batches;
        throw NumericalError(msg.str());
      }
      rec_sum += l.reconstruction;
      adv_sum += l.adversarial;
      dis_sum += d_loss;
    }
    if (history) {
      const double nb = static_cast<double>(batches);
      history->reconstruction.push_back(rec_sum / nb);
      history->adversarial.push_back(adv_sum / nb);
      history->discriminator.push_back(dis_sum / nb);
    }
  }
  return model;
}

double damage_index(const AAEModel& model, const std::vector<double>& sample) {
  const auto r = model.reconstruct(sample);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += (r[i] - sample[i]) * (r[i] - sample[i]);
  return s / static_cast<double>(r.size());
}

std::vector<double> damage_indices(const AAEModel& model, const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) return {};
  const Eigen::MatrixXd x = rows.transpose();
  const Eigen::MatrixXd r = model.reconstruct(x);
  std::vector<double> out(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    out[static_cast<std::size_t>(i)] = (r.col(i) - x.col(i)).squaredNorm() / static_cast<double>(x.rows());
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("percentile: empty input");
  if (!(q >= 0.0 && q <= 100.0)) throw InvalidInput("percentile: q must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return values[lo] + t * (values[hi] - values[lo]);
}

double fit_threshold(const std::vector<double>& reference, double q) {
  if (reference.size() < 10) throw InvalidInput("threshold: need at least 10 reference values");
  return percentile(reference, q);
}

double ConfusionCounts::accuracy() const {
  return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

double ConfusionCounts::f1() const {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

DamageAssessment classify(std::vector<double> healthy_di, std::vector<double> damaged_di,
                          double threshold) {
  DamageAssessment out;
  out.threshold = threshold;
  for (double d : healthy_di) {
    const bool flagged = d > threshold;
    out.healthy_flagged.push_back(flagged ? 1 : 0);
    ++(flagged ? out.counts.fp : out.counts.tn);
  }
  for (double d : damaged_di) {
    const bool flagged = d > threshold;
    out.damaged_flagged.push_back(flagged ? 1 : 0);
    ++(flagged ? out.counts.tp : out.counts.fn);
  }
  out.healthy_di = std::move(healthy_di);
  out.damaged_di = std::move(damaged_di);
  return out;
}

}  // namespace driveby
