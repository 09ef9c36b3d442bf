#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace driveby {

enum class Activation { linear, relu, sigmoid };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::linear;

  int inputs() const { return static_cast<int>(weight.cols()); }
  int outputs() const { return static_cast<int>(weight.rows()); }
};

/// Fully connected feed-forward stack. Samples are columns.
class Mlp {
 public:
  Mlp() = default;
  /// widths = {in, hidden..., out}; hidden layers use `hidden`, the last `output`.
  Mlp(const std::vector<int>& widths, Activation hidden, Activation output);

  /// Glorot-uniform weights, zero biases.
  void initialize(std::uint64_t seed);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  /// Forward pass that keeps per-layer outputs for backpropagation.
  /// Returns the pre-activation of the last layer in `logits` as well.
  void forward_cached(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& outputs,
                      Eigen::MatrixXd& logits) const;

  /// Backprop of dL/d(last pre-activation). Accumulates parameter gradients
  /// into `grad` (same layout as flat parameters) when non-null and returns
  /// dL/d(input).
  Eigen::MatrixXd backward(const std::vector<Eigen::MatrixXd>& outputs,
                           const Eigen::MatrixXd& input, const Eigen::MatrixXd& d_logits,
                           Eigen::VectorXd* grad) const;

  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  int input_width() const { return layers_.empty() ? 0 : layers_.front().inputs(); }
  int output_width() const { return layers_.empty() ? 0 : layers_.back().outputs(); }
  std::vector<int> widths() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

/// Layer widths of the three networks.
struct AAEArchitecture {
  std::vector<int> encoder{256, 128, 16, 8};
  std::vector<int> decoder{8, 16, 128, 256};
  std::vector<int> discriminator{8, 256, 128, 1};

  void validate() const;
};

struct TrainingConfig {
  int batch_size = 16;
  int epochs = 1000;
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Epoch means of the three loss terms.
struct TrainingHistory {
  std::vector<double> reconstruction;
  std::vector<double> adversarial;
  std::vector<double> discriminator;
};

struct AAELosses {
  double reconstruction = 0.0;  // mean squared error over components and batch
  double adversarial = 0.0;     // -mean log D(encoder(x))
  double discriminator = 0.0;   // -mean [log D(prior) + log(1 - D(encoder(x)))]
  double generator() const { return reconstruction + adversarial; }
};

class AAEModel {
 public:
  AAEModel() = default;
  AAEModel(const AAEArchitecture& arch, std::uint64_t seed);

  /// Columns are samples.
  Eigen::MatrixXd encode(const Eigen::MatrixXd& x) const { return encoder_.forward(x); }
  Eigen::MatrixXd decode(const Eigen::MatrixXd& y) const { return decoder_.forward(y); }
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& x) const;
  /// D(y) in (0, 1) per column.
  Eigen::VectorXd discriminate(const Eigen::MatrixXd& y) const;

  std::vector<double> reconstruct(const std::vector<double>& sample) const;

  AAELosses losses(const Eigen::MatrixXd& x, const Eigen::MatrixXd& prior) const;

  /// d L_G / d(encoder params, decoder params), concatenated in that order.
  Eigen::VectorXd generator_gradient(const Eigen::MatrixXd& x, AAELosses* losses = nullptr) const;
  /// d L_D / d(discriminator params).
  Eigen::VectorXd discriminator_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& prior,
                                         double* loss = nullptr) const;

  Eigen::VectorXd generator_parameters() const;
  void set_generator_parameters(const Eigen::VectorXd& flat);

  const Mlp& encoder() const { return encoder_; }
  const Mlp& decoder() const { return decoder_; }
  const Mlp& discriminator() const { return discriminator_; }
  Mlp& discriminator() { return discriminator_; }
  const AAEArchitecture& architecture() const { return arch_; }
  std::uint64_t seed() const { return seed_; }

  nlohmann::json& metadata() { return metadata_; }
  const nlohmann::json& metadata() const { return metadata_; }

  void save(const std::filesystem::path& path) const;
  static AAEModel load(const std::filesystem::path& path);

 private:
  AAEArchitecture arch_;
  std::uint64_t seed_ = 0;
  Mlp encoder_;
  Mlp decoder_;
  Mlp discriminator_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

/// Samples are rows of `data` (each of width arch.encoder.front()).
AAEModel train_aae(const Eigen::MatrixXd& data, const TrainingConfig& config,
                   const AAEArchitecture& arch = {}, TrainingHistory* history = nullptr);

/// Mean squared reconstruction error of one sample.
double damage_index(const AAEModel& model, const std::vector<double>& sample);

/// DI for every row.
std::vector<double> damage_indices(const AAEModel& model, const Eigen::MatrixXd& rows);

/// Linear-interpolated order statistic (the numpy default), q in [0, 100].
double percentile(std::vector<double> values, double q);

/// 90th percentile of healthy reference DIs. Needs >= 10 values.
double fit_threshold(const std::vector<double>& reference, double q = 90.0);

struct ConfusionCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  double accuracy() const;
  double f1() const;
};

struct DamageAssessment {
  std::vector<double> healthy_di;
  std::vector<double> damaged_di;
  double threshold = 0.0;
  std::vector<std::uint8_t> healthy_flagged;
  std::vector<std::uint8_t> damaged_flagged;
  ConfusionCounts counts;
};

/// Verdict is "damaged" iff DI > threshold.
DamageAssessment classify(std::vector<double> healthy_di, std::vector<double> damaged_di,
                          double threshold);

}  // namespace driveby
