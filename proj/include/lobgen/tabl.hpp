#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lobgen {

using Matrix = Eigen::MatrixXd;

enum class Activation { Identity, ReLU, Tanh, Sigmoid };

/// Named view of one learnable tensor and its gradient accumulator.
struct ParamRef {
    std::string name;
    Matrix* value;
    Matrix* grad;
};

/// Y = act(W1 * X * W2 + B): one bilinear map over the feature axis (W1) and
/// the time axis (W2) simultaneously.
class BilinearLayer {
public:
    BilinearLayer(std::string name, int in_rows, int out_rows, int in_cols, int out_cols,
                  Activation act, std::mt19937_64& init_rng);

    Matrix forward(const Matrix& x);
    /// Accumulates parameter gradients from dL/dY and returns dL/dX.
    Matrix backward(const Matrix& dy);
    void collect(std::vector<ParamRef>& out);

private:
    std::string name_;
    Activation act_;
    Matrix w1_, w2_, b_;
    Matrix gw1_, gw2_, gb_;
    Matrix x_, z_, y_;  // forward caches
};

/// Soft temporal re-weighting: E = X * W, A = row-wise softmax of E over
/// time, output = lambda (X ⊙ A) + (1 - lambda) X. Each row of A sums to 1.
/// lambda is learned and projected back into [0, 1] after each update.
class TemporalAttention {
public:
    TemporalAttention(std::string name, int time, std::mt19937_64& init_rng);

    Matrix forward(const Matrix& x);
    Matrix backward(const Matrix& dy);
    void collect(std::vector<ParamRef>& out);
    /// Projects lambda back into [0, 1]; call after parameter updates.
    void constrain();
    const Matrix& attention_weights() const { return a_; }
    double lambda() const { return lambda_(0, 0); }

private:
    std::string name_;
    Matrix w_, gw_;
    Matrix lambda_, glambda_;  // 1x1
    Matrix x_, e_, a_;
};

/// Dual-axis standardization: z-scores along time (per feature row) and along
/// features (per time column), each followed by a learned per-index scale and
/// shift, mixed by two learned scalar weights. A degenerate axis (length 1)
/// passes through unnormalized.
class BiNLayer {
public:
    BiNLayer(std::string name, int features, int time);

    Matrix forward(const Matrix& x);
    Matrix backward(const Matrix& dy);
    void collect(std::vector<ParamRef>& out);

    /// z-score of x along rows (dim=0 normalizes each column over features)
    /// with the layer's epsilon guard; exposed for direct moment checks.
    static Matrix standardize(const Matrix& x, int axis);

private:
    std::string name_;
    Matrix scale_t_, shift_t_;  // length-T column vectors
    Matrix scale_f_, shift_f_;  // length-D column vectors
    Matrix w_mix_, gw_mix_;     // 2x1: temporal and feature branch weights
    Matrix gscale_t_, gshift_t_, gscale_f_, gshift_f_;
    Matrix x_, xt_, xf_, yt_, yf_;
    bool temporal_active_ = true, feature_active_ = true;
};

/// Inverted dropout on hidden activations; identity in eval mode.
class Dropout {
public:
    explicit Dropout(double rate) : rate_(rate) {}
    Matrix forward(const Matrix& x, bool training, std::mt19937_64* rng);
    Matrix backward(const Matrix& dy);

private:
    double rate_;
    Matrix mask_;
};

Matrix apply_activation(Activation act, const Matrix& z);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

struct LossGrad {
    double loss = 0.0;
    Eigen::VectorXd dlogits;
};

/// Focal loss -(1 - p_t)^gamma ln(p_t) on softmax probabilities, with the
/// analytic logit gradient. gamma = 0 reduces to cross-entropy.
LossGrad focal_loss_with_logits(const Eigen::VectorXd& logits, int target, double gamma);

/// Numerically stable binary cross-entropy on a single logit with the
/// positive term multiplied by pos_weight.
LossGrad weighted_binary_loss_with_logit(double logit, int target, double pos_weight);

/// Plain focal loss on an already-formed probability vector.
double focal_loss(const Eigen::VectorXd& probs, int target, double gamma);
double weighted_binary_loss(double prob_positive, int target, double pos_weight);

enum class HeadKind { OrderType, Limit, Market };

struct ModelConfig {
    HeadKind head = HeadKind::OrderType;
    int book_features = 40;
    int msg_features = 5;
    int window = 500;
    int book_hidden = 32;
    int trunk_hidden = 32;
    int trunk_time = 16;
    double dropout = 0.3;
    double focal_gamma = 2.0;
    double pos_weight = 2.0;
    int size_classes = 20;
    int price_classes = 40;
    Activation hidden_activation = Activation::ReLU;

    /// Logit rows of the primary head: 2, size_classes, or size_classes.
    int primary_classes() const;
    /// Price-distance classes for the limit head, 0 otherwise.
    int secondary_classes() const;
};

/// Three-head order-state model: the book window runs through BiN and a
/// bilinear layer, is concatenated with the message window along the feature
/// axis, then a temporal-attention block, a bilinear trunk with dropout and
/// one output layer per logit group.
class TablModel {
public:
    TablModel(const ModelConfig& config, std::uint64_t init_seed);

    struct Logits {
        Eigen::VectorXd primary;
        Eigen::VectorXd secondary;  // limit head only
    };

    /// Eval-mode forward is a pure deterministic function of (params, input);
    /// pass training=true plus an rng to activate dropout.
    Logits forward(const Matrix& book_window, const Matrix& msg_window, bool training = false,
                   std::mt19937_64* dropout_rng = nullptr);

    /// Backpropagates logit gradients from the latest forward call.
    void backward(const Logits& dlogits);

    std::vector<ParamRef> params();
    void zero_grads();
    void constrain();
    std::size_t parameter_count();
    const ModelConfig& config() const { return config_; }

private:
    ModelConfig config_;
    BiNLayer bin_;
    BilinearLayer book_layer_;
    TemporalAttention attention_;
    BilinearLayer trunk_;
    Dropout dropout_;
    BilinearLayer out_primary_;
    std::optional<BilinearLayer> out_secondary_;
    int book_rows_ = 0;
    Matrix hd_;  // trunk output fed to both heads
};

/// One labeled window. label_secondary is ignored unless the head is Limit.
struct TrainingSample {
    Matrix book;
    Matrix msg;
    int label_primary = 0;
    int label_secondary = -1;
};

/// Random-access view over training samples; lets large datasets materialize
/// windows lazily.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual int size() const = 0;
    virtual TrainingSample get(int index) const = 0;
};

class VectorSampleSource final : public SampleSource {
public:
    explicit VectorSampleSource(std::vector<TrainingSample> samples)
        : samples_(std::move(samples)) {}
    int size() const override { return static_cast<int>(samples_.size()); }
    TrainingSample get(int index) const override {
        return samples_[static_cast<std::size_t>(index)];
    }

private:
    std::vector<TrainingSample> samples_;
};

struct TrainSchedule {
    double lr = 1e-3;
    double momentum = 0.9;
    int batch = 64;
    int max_epochs = 200;
    int lr_patience = 5;     // plateau epochs before the rate drops
    int stop_patience = 10;  // plateau epochs before training halts
    double lr_factor = 0.1;
    double min_delta = 1e-4;  // improvement below this counts as a plateau
    std::uint64_t seed = 1;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
    bool lr_dropped = false;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    double best_val_loss = 0.0;
    int best_epoch = 0;
    bool early_stopped = false;
};

/// Loss and logit gradient for one sample under the model's head.
LossGrad sample_loss(const ModelConfig& config, const TablModel::Logits& logits,
                     const TrainingSample& sample, Eigen::VectorXd* dsecondary);

/// Mini-batch SGD with momentum, a plateau learning-rate scheduler and early
/// stopping that reverts to the best checkpoint seen.
TrainResult train(TablModel& model, const SampleSource& train_set, const SampleSource& val_set,
                  const TrainSchedule& schedule);

double mean_loss(TablModel& model, const SampleSource& samples);
/// Primary-head classification accuracy; for the limit head both groups must
/// be right.
double accuracy(TablModel& model, const SampleSource& samples);

/// Central-difference check of every parameter against the analytic
/// gradients. Returns the maximum relative error.
double grad_check(TablModel& model, const TrainingSample& sample, double epsilon = 1e-5);

/// Writes <stem>.bin (row-major float64) plus <stem>.json shape manifest.
void save_params(TablModel& model, const std::string& stem);
void load_params(TablModel& model, const std::string& stem);

}  // namespace lobgen
