// End-to-end training: CRF negative log-likelihood per entity plus the
// masked location cross-entropy, optimized by SGD or Adam.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "entrack/autodiff.hpp"
#include "entrack/corpus.hpp"
#include "entrack/embeddings.hpp"
#include "entrack/model.hpp"
#include "entrack/network.hpp"

namespace entrack {

enum class OptimizerKind { Sgd, Adam };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double lambda = 1.0;         // weight of the location loss
  std::size_t batch_size = 1;  // paragraphs per update
  double clip_norm = 5.0;      // global gradient norm clip; 0 disables
  // Fraction of the training corpus held out for early stopping when no
  // separate dev corpus is given. 0 disables early stopping.
  double dev_fraction = 0.0;
  std::size_t patience = 0;  // epochs without dev improvement before stopping; 0 = never
  std::size_t threads = 1;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean total loss per paragraph
  double state_nll = 0.0;
  double location_loss = 0.0;
  std::optional<double> dev_cat1, dev_cat2;
  std::optional<double> dev_score;  // micro average of Cat-1 and Cat-2
  double seconds = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochMetrics> log;
  std::size_t best_epoch = 0;  // 0 when the initial parameters were kept
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Gradient of the joint loss for one paragraph.
struct ParagraphGradient {
  ParagraphLoss loss;
  Gradients gradients;
};
ParagraphGradient paragraph_gradient(const Model& model, const PreparedParagraph& prepared, double lambda);

// Trains from a fresh model. Paragraphs without usable gold are skipped.
// When a dev corpus is given (or carved out by dev_fraction), the returned
// model holds the parameters of the best dev epoch.
TrainResult train(const std::vector<Paragraph>& corpus, const std::vector<Paragraph>* dev,
                  const ModelConfig& model_config, const Embeddings& embeddings, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Continues training an existing model in place.
TrainResult train_model(Model model, const std::vector<Paragraph>& corpus, const std::vector<Paragraph>* dev,
                        const TrainConfig& config, const EpochCallback& on_epoch = {});

// Dev micro average of Cat-1 and Cat-2 (state questions only).
struct DevScore {
  double cat1 = 0.0, cat2 = 0.0, micro = 0.0;
};
DevScore dev_score(const Model& model, const std::vector<Paragraph>& dev, std::size_t threads = 1);

}  // namespace entrack
