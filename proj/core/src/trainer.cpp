#include "entrack/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "entrack/evaluation.hpp"
#include "entrack/pipeline.hpp"
#include "entrack/random.hpp"

namespace entrack {

std::string_view optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

ParagraphGradient paragraph_gradient(const Model& model, const PreparedParagraph& prepared, double lambda) {
  Tape tape;
  ParagraphGradient out;
  out.loss = paragraph_loss(tape, model, prepared, lambda);
  out.gradients = tape.backward(out.loss.total, model.store());
  out.loss.total = Var{};
  return out;
}

DevScore dev_score(const Model& model, const std::vector<Paragraph>& dev, std::size_t threads) {
  auto predictions = decode_corpus(model, dev, threads);
  auto report = evaluate(dev, predictions);
  const auto& t = report.task1;
  DevScore s;
  s.cat1 = t.cat1.score();
  s.cat2 = t.cat2.score();
  const std::size_t total = t.cat1.total + t.cat2.total;
  s.micro = total == 0 ? 0.0 : 100.0 * static_cast<double>(t.cat1.correct + t.cat2.correct) / total;
  return s;
}

namespace {

class Optimizer {
 public:
  Optimizer(const ParameterStore& store, const TrainConfig& config) : config_(config) {
    if (config.optimizer == OptimizerKind::Adam) {
      m_ = zero_gradients(store);
      v_ = zero_gradients(store);
    }
  }

  void step(ParameterStore& store, const Gradients& g) {
    ++t_;
    const double lr = config_.learning_rate;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (ParamId p = 0; p < store.size(); ++p) {
      if (!store.trainable(p)) continue;
      auto& w = store.tensor(p).values;
      const auto& gp = g[p].values;
      if (config_.optimizer == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gp[i];
        continue;
      }
      auto& m = m_[p].values;
      auto& v = v_[p].values;
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * gp[i];
        v[i] = b2 * v[i] + (1.0 - b2) * gp[i] * gp[i];
        w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      }
    }
  }

 private:
  TrainConfig config_;
  Gradients m_, v_;
  std::size_t t_ = 0;
};

void clip(Gradients& g, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (const auto& t : g) {
    for (double x : t.values) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double f = max_norm / norm;
  for (auto& t : g) {
    for (double& x : t.values) x *= f;
  }
}

// Evaluates a batch, possibly on several threads, into per-slot results that
// are reduced in batch order afterwards.
std::vector<ParagraphGradient> batch_gradients(const Model& model, const std::vector<const PreparedParagraph*>& batch,
                                               double lambda, std::size_t threads) {
  std::vector<ParagraphGradient> out(batch.size());
  threads = std::max<std::size_t>(1, std::min(threads, batch.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = paragraph_gradient(model, *batch[i], lambda);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < batch.size(); i += threads) {
          out[i] = paragraph_gradient(model, *batch[i], lambda);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

bool finite(const Gradients& g) {
  return std::all_of(g.begin(), g.end(), [](const Tensor& t) { return t.all_finite(); });
}

}  // namespace

TrainResult train(const std::vector<Paragraph>& corpus, const std::vector<Paragraph>* dev,
                  const ModelConfig& model_config, const Embeddings& embeddings, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  return train_model(Model::create(model_config, embeddings, config.seed), corpus, dev, config, on_epoch);
}

TrainResult train_model(Model model, const std::vector<Paragraph>& corpus, const std::vector<Paragraph>* dev,
                        const TrainConfig& config, const EpochCallback& on_epoch) {
  Rng rng(config.seed ^ 0x5eedf00dULL);

  std::vector<Paragraph> held_out;
  std::vector<std::size_t> train_idx(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) train_idx[i] = i;
  if (dev == nullptr && config.dev_fraction > 0.0 && corpus.size() > 1) {
    rng.shuffle(train_idx);
    auto n_dev = static_cast<std::size_t>(std::round(config.dev_fraction * static_cast<double>(corpus.size())));
    n_dev = std::clamp<std::size_t>(n_dev, 1, corpus.size() - 1);
    for (std::size_t i = 0; i < n_dev; ++i) held_out.push_back(corpus[train_idx[i]]);
    train_idx.erase(train_idx.begin(), train_idx.begin() + static_cast<std::ptrdiff_t>(n_dev));
    std::sort(train_idx.begin(), train_idx.end());
    dev = &held_out;
  }

  std::vector<PreparedParagraph> prepared;
  for (std::size_t i : train_idx) {
    auto p = prepare(corpus[i], model.scheme());
    if (p.has_gold()) prepared.push_back(std::move(p));
  }

  TrainResult result{model, {}, 0};
  std::optional<double> best;
  std::size_t since_best = 0;
  Optimizer optimizer(model.store(), config);
  const std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);

  std::vector<std::size_t> order(prepared.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    rng.shuffle(order);
    EpochMetrics m;
    m.epoch = epoch;
    for (std::size_t b = 0; b < order.size(); b += batch_size) {
      std::vector<const PreparedParagraph*> batch;
      for (std::size_t i = b; i < std::min(order.size(), b + batch_size); ++i) batch.push_back(&prepared[order[i]]);
      auto results = batch_gradients(model, batch, config.lambda, config.threads);
      Gradients total = zero_gradients(model.store());
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (!std::isfinite(r.loss.state_nll) || !std::isfinite(r.loss.location_loss) || !finite(r.gradients)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", paragraph '" +
                              batch[i]->paragraph->id + "'");
        }
        m.state_nll += r.loss.state_nll;
        m.location_loss += r.loss.location_loss;
        accumulate(total, r.gradients, 1.0 / static_cast<double>(batch.size()));
      }
      clip(total, config.clip_norm);
      optimizer.step(model.store(), total);
    }
    if (!prepared.empty()) {
      m.state_nll /= static_cast<double>(prepared.size());
      m.location_loss /= static_cast<double>(prepared.size());
    }
    m.loss = m.state_nll + config.lambda * m.location_loss;

    bool stop = false;
    if (dev != nullptr && !dev->empty()) {
      auto s = dev_score(model, *dev, config.threads);
      m.dev_cat1 = s.cat1;
      m.dev_cat2 = s.cat2;
      m.dev_score = s.micro;
      if (!best || s.micro > *best) {
        best = s.micro;
        result.model = model;
        result.best_epoch = epoch;
        since_best = 0;
      } else if (config.patience > 0 && ++since_best >= config.patience) {
        stop = true;
      }
    }
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(m);
    if (on_epoch) on_epoch(m);
    if (stop) break;
  }
  if (dev == nullptr || dev->empty()) {
    result.model = std::move(model);
    result.best_epoch = config.epochs;
  }
  return result;
}

}  // namespace entrack
