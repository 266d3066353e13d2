#include "ecodse/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ecodse/errors.hpp"
#include "ecodse/metrics.hpp"

namespace ecodse {

double EpochRecord::train_rmse_sum() const {
  double s = 0.0;
  for (const auto& [target, m] : train) s += m.rmse;
  return s;
}

double EpochRecord::validation_rmse_sum() const {
  double s = 0.0;
  for (const auto& [target, m] : validation) s += m.rmse;
  return s;
}

namespace {

Matrix label_row(const CdfgGraph& g, const std::vector<std::string>& targets) {
  check(g.label.has_value(), "training graph '" + g.benchmark_id + "' has no label");
  Matrix row(1, static_cast<int>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i)
    row.at(0, static_cast<int>(i)) = g.label->get(targets[i]);
  return row;
}

std::uint64_t sample_noise_seed(std::uint64_t root, int epoch, std::size_t position) {
  return mix_seed(root, (static_cast<std::uint64_t>(epoch) << 32) ^ position);
}

struct AdamState {
  std::map<std::string, Matrix> m;
  std::map<std::string, Matrix> v;
  long step = 0;
};

}  // namespace

std::map<std::string, TargetMetrics> evaluate_metrics(const EcognnModel& model,
                                                      const std::vector<CdfgGraph>& graphs,
                                                      std::uint64_t eval_seed) {
  const auto& targets = model.config().targets;
  std::map<std::string, std::vector<double>> preds, labels;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    ForwardOptions opts;
    opts.noise_seed = mix_seed(eval_seed, i);
    const Matrix out = model.predict_vector(GraphTensors::from_graph(graphs[i]), opts);
    const Matrix lab = label_row(graphs[i], targets);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      preds[targets[k]].push_back(out.at(0, static_cast<int>(k)));
      labels[targets[k]].push_back(lab.at(0, static_cast<int>(k)));
    }
  }
  std::map<std::string, TargetMetrics> metrics;
  for (const auto& target : targets) {
    TargetMetrics tm;
    tm.rmse = rmse(preds[target], labels[target]);
    tm.mae = mae(preds[target], labels[target]);
    const bool has_zero =
        std::any_of(labels[target].begin(), labels[target].end(), [](double v) { return v == 0.0; });
    if (!has_zero) tm.mape = mape(preds[target], labels[target]);
    metrics[target] = tm;
  }
  return metrics;
}

TrainResult train(const EcognnModel& initial, const std::vector<CdfgGraph>& train_set,
                  const std::vector<CdfgGraph>& validation_set, const TrainConfig& config) {
  check(!train_set.empty(), "train: empty training set");
  check(config.epochs >= 1 && config.batch_size >= 1, "train: bad epochs or batch size");

  EcognnModel model = initial;
  const auto& targets = model.config().targets;
  const int t_count = static_cast<int>(targets.size());

  std::vector<GraphTensors> tensors;
  std::vector<Matrix> labels;
  tensors.reserve(train_set.size());
  for (const auto& g : train_set) {
    tensors.push_back(GraphTensors::from_graph(g));
    labels.push_back(label_row(g, targets));
  }

  AdamState adam;
  for (const auto& name : model.param_names()) {
    const auto& p = model.param(name);
    adam.m[name] = Matrix(p.rows(), p.cols());
    adam.v[name] = Matrix(p.rows(), p.cols());
  }

  const std::uint64_t shuffle_seed = seed_for(config.seed, "train-shuffle");
  const std::uint64_t noise_root = seed_for(config.seed, "train-noise");
  const std::uint64_t eval_seed = seed_for(config.seed, "train-eval");

  TrainResult result;
  EcognnModel last_finite = model;
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng = make_rng(mix_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    int batch_count = 0;
    bool finite = true;

    for (std::size_t start = 0; start < order.size() && finite;
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto batch = static_cast<double>(stop - start);

      Tape tape;
      auto pn = model.register_params(tape);
      Tape::NodeId sq_acc = -1;
      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t idx = order[pos];
        ForwardOptions opts;
        opts.noise_seed = sample_noise_seed(noise_root, epoch, pos);
        auto pred = model.forward_on_tape(tape, pn, tensors[idx], opts);
        auto err = tape.add_const(pred, [&] {
          Matrix neg = labels[idx];
          for (double& v : neg.flat()) v = -v;
          return neg;
        }());
        auto sq = tape.mul(err, err);
        sq_acc = (sq_acc < 0) ? sq : tape.add(sq_acc, sq);
      }
      auto mse = tape.affine(sq_acc, 1.0 / batch, 0.0);  // 1 x T
      Tape::NodeId loss;
      if (config.joint_rmse) {
        loss = tape.sqrt_(tape.affine(tape.sum_all(mse), 1.0 / t_count, 1e-12));
      } else {
        loss = tape.sum_all(tape.sqrt_(tape.affine(mse, 1.0, 1e-12)));
      }

      const double loss_value = tape.scalar(loss);
      if (!std::isfinite(loss_value)) {
        finite = false;
        break;
      }
      epoch_loss += loss_value;
      ++batch_count;

      tape.backward(loss);
      ++adam.step;
      const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(adam.step));
      const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(adam.step));
      for (const auto& name : model.param_names()) {
        const Matrix& g = tape.grad(pn.at(name));
        Matrix& p = model.param(name);
        Matrix& m = adam.m[name];
        Matrix& v = adam.v[name];
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double gi = g.data()[i];
          m.data()[i] = config.adam_beta1 * m.data()[i] + (1.0 - config.adam_beta1) * gi;
          v.data()[i] = config.adam_beta2 * v.data()[i] + (1.0 - config.adam_beta2) * gi * gi;
          const double mhat = m.data()[i] / bc1;
          const double vhat = v.data()[i] / bc2;
          p.data()[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
        }
      }
    }

    bool params_finite = finite;
    if (params_finite)
      for (const auto& name : model.param_names())
        if (!model.param(name).all_finite()) params_finite = false;

    if (!params_finite) {
      result.diverged = true;
      model = last_finite;
      break;
    }

    EpochRecord record;
    record.epoch = epoch + 1;
    record.train_loss = batch_count > 0 ? epoch_loss / batch_count : 0.0;
    record.train = evaluate_metrics(model, train_set, eval_seed);
    if (!validation_set.empty())
      record.validation = evaluate_metrics(model, validation_set, eval_seed);
    result.history.push_back(record);

    const double val_score =
        validation_set.empty() ? record.train_rmse_sum() : record.validation_rmse_sum();
    if (val_score < best_val) {
      best_val = val_score;
      result.model = model;
      result.best_epoch = record.epoch;
    }
    last_finite = model;
  }

  if (result.best_epoch < 0) {
    result.model = model;
    result.best_epoch = result.history.empty() ? 0 : result.history.back().epoch;
  }
  return result;
}

std::pair<std::vector<double>, std::vector<double>> feature_normalization_from_manifest(
    const DatasetManifest& manifest) {
  std::vector<double> scale(manifest.feature_dim, 1.0);
  std::vector<double> offset(manifest.feature_dim, 0.0);
  const int base = manifest.numeric_offset();
  for (std::size_t i = 0; i < manifest.numeric_fields.size(); ++i) {
    const auto it = manifest.normalization.find(manifest.numeric_fields[i]);
    if (it != manifest.normalization.end()) {
      scale[base + i] = it->second.scale;
      offset[base + i] = it->second.offset;
    }
  }
  return {scale, offset};
}

double grad_check(const EcognnModel& model, const CdfgGraph& graph, double epsilon,
                  const std::vector<std::string>& only_blocks) {
  check(epsilon > 0.0, "grad_check: epsilon must be positive");
  const GraphTensors tensors = GraphTensors::from_graph(graph);
  const int t_count = static_cast<int>(model.config().targets.size());

  // Fixed synthetic target; the exact values are irrelevant to the check.
  Matrix target(1, t_count);
  for (int i = 0; i < t_count; ++i) target.at(0, i) = 0.3 + 0.1 * i;

  ForwardOptions opts;
  opts.noise_seed = 0x5eedULL;  // frozen relaxed sampling

  auto loss_of = [&](const EcognnModel& m) {
    Tape tape;
    auto pn = m.register_params(tape);
    auto pred = m.forward_on_tape(tape, pn, tensors, opts);
    double acc = 0.0;
    const Matrix& out = tape.value(pred);
    for (int i = 0; i < t_count; ++i) {
      const double d = out.at(0, i) - target.at(0, i);
      acc += std::sqrt(d * d + 1e-12);
    }
    return acc;
  };

  // Reverse-mode gradients.
  Tape tape;
  auto pn = model.register_params(tape);
  auto pred = model.forward_on_tape(tape, pn, tensors, opts);
  auto err = tape.add_const(pred, [&] {
    Matrix neg = target;
    for (double& v : neg.flat()) v = -v;
    return neg;
  }());
  auto loss = tape.sum_all(tape.sqrt_(tape.affine(tape.mul(err, err), 1.0, 1e-12)));
  tape.backward(loss);

  double worst = 0.0;
  EcognnModel probe = model;
  for (const auto& name : model.param_names()) {
    if (!only_blocks.empty() &&
        std::find(only_blocks.begin(), only_blocks.end(), name) == only_blocks.end())
      continue;
    const Matrix& ad = tape.grad(pn.at(name));
    Matrix& p = probe.param(name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + epsilon;
      const double up = loss_of(probe);
      p.data()[i] = saved - epsilon;
      const double down = loss_of(probe);
      p.data()[i] = saved;
      const double fd = (up - down) / (2.0 * epsilon);
      const double rel =
          std::abs(ad.data()[i] - fd) / std::max({std::abs(ad.data()[i]), std::abs(fd), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

void write_metrics_csv(const std::string& path, const std::vector<EpochRecord>& history,
                       const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw Error("metrics: cannot write '" + path + "'");
  if (!config_echo.empty()) out << "# " << config_echo << '\n';
  out << "epoch,split,target,rmse,mae,mape\n";
  out.precision(17);
  auto emit = [&](int epoch, const char* split,
                  const std::map<std::string, TargetMetrics>& metrics) {
    for (const auto& [target, m] : metrics) {
      out << epoch << ',' << split << ',' << target << ',' << m.rmse << ',' << m.mae << ',';
      if (m.mape) out << *m.mape;
      out << '\n';
    }
  };
  for (const auto& rec : history) {
    emit(rec.epoch, "train", rec.train);
    emit(rec.epoch, "validation", rec.validation);
  }
}

}  // namespace ecodse
