#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "lobgen/seed.hpp"
#include "lobgen/tabl.hpp"

namespace lobgen {

LossGrad sample_loss(const ModelConfig& config, const TablModel::Logits& logits,
                     const TrainingSample& sample, Eigen::VectorXd* dsecondary) {
    LossGrad out;
    if (config.head == HeadKind::OrderType) {
        // Two logits, binary loss on the log-odds logits[1] - logits[0].
        const double z = logits.primary[1] - logits.primary[0];
        const LossGrad binary =
            weighted_binary_loss_with_logit(z, sample.label_primary, config.pos_weight);
        out.loss = binary.loss;
        out.dlogits.resize(2);
        out.dlogits[0] = -binary.dlogits[0];
        out.dlogits[1] = binary.dlogits[0];
        return out;
    }
    const LossGrad primary =
        focal_loss_with_logits(logits.primary, sample.label_primary, config.focal_gamma);
    out.loss = primary.loss;
    out.dlogits = primary.dlogits;
    if (config.head == HeadKind::Limit) {
        const LossGrad secondary =
            focal_loss_with_logits(logits.secondary, sample.label_secondary, config.focal_gamma);
        out.loss += secondary.loss;
        if (dsecondary) *dsecondary = secondary.dlogits;
    }
    return out;
}

namespace {

double forward_loss(TablModel& model, const TrainingSample& sample) {
    const auto logits = model.forward(sample.book, sample.msg);
    return sample_loss(model.config(), logits, sample, nullptr).loss;
}

std::vector<Matrix> snapshot_params(TablModel& model) {
    std::vector<Matrix> values;
    for (auto& ref : model.params()) values.push_back(*ref.value);
    return values;
}

void restore_params(TablModel& model, const std::vector<Matrix>& values) {
    auto refs = model.params();
    for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].value = values[i];
}

}  // namespace

double mean_loss(TablModel& model, const SampleSource& samples) {
    if (samples.size() == 0) throw std::invalid_argument("mean_loss: empty sample set");
    double total = 0.0;
    for (int i = 0; i < samples.size(); ++i) total += forward_loss(model, samples.get(i));
    return total / samples.size();
}

double accuracy(TablModel& model, const SampleSource& samples) {
    if (samples.size() == 0) throw std::invalid_argument("accuracy: empty sample set");
    int correct = 0;
    for (int i = 0; i < samples.size(); ++i) {
        const TrainingSample sample = samples.get(i);
        const auto logits = model.forward(sample.book, sample.msg);
        Eigen::Index pred = 0;
        logits.primary.maxCoeff(&pred);
        bool ok = pred == sample.label_primary;
        if (model.config().head == HeadKind::Limit) {
            Eigen::Index pred2 = 0;
            logits.secondary.maxCoeff(&pred2);
            ok = ok && pred2 == sample.label_secondary;
        }
        if (ok) ++correct;
    }
    return static_cast<double>(correct) / samples.size();
}

TrainResult train(TablModel& model, const SampleSource& train_set, const SampleSource& val_set,
                  const TrainSchedule& schedule) {
    if (train_set.size() == 0 || val_set.size() == 0)
        throw std::invalid_argument("train: empty dataset");

    TrainResult result;
    auto refs = model.params();
    std::vector<Matrix> velocity;
    velocity.reserve(refs.size());
    for (auto& ref : refs) velocity.push_back(Matrix::Zero(ref.value->rows(), ref.value->cols()));

    std::mt19937_64 shuffle_rng(derive_seed(schedule.seed, "train_shuffle"));
    std::mt19937_64 dropout_rng(derive_seed(schedule.seed, "train_dropout"));
    std::vector<int> order(static_cast<std::size_t>(train_set.size()));
    std::iota(order.begin(), order.end(), 0);

    double lr = schedule.lr;
    double best_val = std::numeric_limits<double>::infinity();
    double plateau_ref = std::numeric_limits<double>::infinity();
    int lr_wait = 0, stop_wait = 0;
    std::vector<Matrix> best_params = snapshot_params(model);
    result.best_epoch = 0;

    for (int epoch = 0; epoch < schedule.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double train_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(schedule.batch)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(schedule.batch));
            model.zero_grads();
            for (std::size_t i = start; i < stop; ++i) {
                const TrainingSample sample = train_set.get(order[i]);
                const auto logits = model.forward(sample.book, sample.msg, true, &dropout_rng);
                TablModel::Logits dlogits;
                Eigen::VectorXd dsecondary;
                const LossGrad lg = sample_loss(model.config(), logits, sample, &dsecondary);
                train_loss += lg.loss;
                dlogits.primary = lg.dlogits;
                if (dsecondary.size() > 0) dlogits.secondary = dsecondary;
                model.backward(dlogits);
            }
            const double inv_batch = 1.0 / static_cast<double>(stop - start);
            for (std::size_t p = 0; p < refs.size(); ++p) {
                velocity[p] = schedule.momentum * velocity[p] - lr * inv_batch * (*refs[p].grad);
                *refs[p].value += velocity[p];
            }
            model.constrain();
        }
        train_loss /= static_cast<double>(order.size());
        const double val_loss = mean_loss(model, val_set);

        EpochRecord record{epoch, train_loss, val_loss, lr, false};
        if (val_loss < best_val) {
            best_val = val_loss;
            best_params = snapshot_params(model);
            result.best_epoch = epoch;
        }
        if (val_loss < plateau_ref - schedule.min_delta) {
            plateau_ref = val_loss;
            lr_wait = 0;
            stop_wait = 0;
        } else {
            ++lr_wait;
            ++stop_wait;
        }
        if (stop_wait >= schedule.stop_patience) {
            result.history.push_back(record);
            result.early_stopped = true;
            break;
        }
        if (lr_wait >= schedule.lr_patience) {
            lr *= schedule.lr_factor;
            lr_wait = 0;
            record.lr_dropped = true;
        }
        result.history.push_back(record);
    }

    restore_params(model, best_params);
    result.best_val_loss = best_val;
    return result;
}

double grad_check(TablModel& model, const TrainingSample& sample, double epsilon) {
    model.zero_grads();
    const auto logits = model.forward(sample.book, sample.msg);
    Eigen::VectorXd dsecondary;
    const LossGrad lg = sample_loss(model.config(), logits, sample, &dsecondary);
    TablModel::Logits dlogits;
    dlogits.primary = lg.dlogits;
    if (dsecondary.size() > 0) dlogits.secondary = dsecondary;
    model.backward(dlogits);

    std::vector<Matrix> analytic;
    for (auto& ref : model.params()) analytic.push_back(*ref.grad);

    double max_rel = 0.0;
    auto refs = model.params();
    for (std::size_t p = 0; p < refs.size(); ++p) {
        Matrix& value = *refs[p].value;
        for (Eigen::Index i = 0; i < value.rows(); ++i) {
            for (Eigen::Index j = 0; j < value.cols(); ++j) {
                const double original = value(i, j);
                value(i, j) = original + epsilon;
                const double up = forward_loss(model, sample);
                value(i, j) = original - epsilon;
                const double down = forward_loss(model, sample);
                value(i, j) = original;
                const double numeric = (up - down) / (2.0 * epsilon);
                const double a = analytic[p](i, j);
                const double rel = std::abs(a - numeric) /
                                   std::max(std::abs(a) + std::abs(numeric), 1e-3);
                max_rel = std::max(max_rel, rel);
            }
        }
    }
    return max_rel;
}

void save_params(TablModel& model, const std::string& stem) {
    auto refs = model.params();
    nlohmann::json manifest;
    manifest["layers"] = nlohmann::json::array();
    std::ofstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("save_params: cannot open " + stem + ".bin");
    for (auto& ref : refs) {
        manifest["layers"].push_back(
            {{"name", ref.name}, {"rows", ref.value->rows()}, {"cols", ref.value->cols()}});
        // row-major float64 stream
        for (Eigen::Index i = 0; i < ref.value->rows(); ++i)
            for (Eigen::Index j = 0; j < ref.value->cols(); ++j) {
                const double v = (*ref.value)(i, j);
                bin.write(reinterpret_cast<const char*>(&v), sizeof(double));
            }
    }
    std::ofstream meta(stem + ".json");
    if (!meta) throw std::runtime_error("save_params: cannot open " + stem + ".json");
    meta << manifest.dump(2) << "\n";
}

void load_params(TablModel& model, const std::string& stem) {
    std::ifstream meta(stem + ".json");
    if (!meta) throw std::runtime_error("load_params: cannot open " + stem + ".json");
    nlohmann::json manifest;
    meta >> manifest;
    std::ifstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("load_params: cannot open " + stem + ".bin");

    auto refs = model.params();
    const auto& layers = manifest.at("layers");
    if (layers.size() != refs.size())
        throw std::runtime_error("load_params: layer count mismatch");
    for (std::size_t p = 0; p < refs.size(); ++p) {
        const auto& entry = layers[p];
        if (entry.at("name").get<std::string>() != refs[p].name ||
            entry.at("rows").get<Eigen::Index>() != refs[p].value->rows() ||
            entry.at("cols").get<Eigen::Index>() != refs[p].value->cols())
            throw std::runtime_error("load_params: shape manifest mismatch at " + refs[p].name);
        for (Eigen::Index i = 0; i < refs[p].value->rows(); ++i)
            for (Eigen::Index j = 0; j < refs[p].value->cols(); ++j) {
                double v = 0.0;
                if (!bin.read(reinterpret_cast<char*>(&v), sizeof(double)))
                    throw std::runtime_error("load_params: truncated parameter file");
                (*refs[p].value)(i, j) = v;
            }
    }
}

}  // namespace lobgen
