#include "lobgen/tabl.hpp"

#include "lobgen/seed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lobgen {

namespace {

Matrix glorot_uniform(int rows, int cols, int fan_in, int fan_out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

Matrix activation_grad_from_output(Activation act, const Matrix& z, const Matrix& y) {
    switch (act) {
        case Activation::Identity: return Matrix::Ones(z.rows(), z.cols());
        case Activation::ReLU: return (z.array() > 0.0).cast<double>().matrix();
        case Activation::Tanh: return (1.0 - y.array().square()).matrix();
        case Activation::Sigmoid: return (y.array() * (1.0 - y.array())).matrix();
    }
    return Matrix();
}

}  // namespace

Matrix apply_activation(Activation act, const Matrix& z) {
    switch (act) {
        case Activation::Identity: return z;
        case Activation::ReLU: return z.cwiseMax(0.0);
        case Activation::Tanh: return z.array().tanh().matrix();
        case Activation::Sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    }
    return z;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
    const Eigen::ArrayXd e = shifted.exp();
    return (e / e.sum()).matrix();
}

// ---------------------------------------------------------------------------
// BilinearLayer

BilinearLayer::BilinearLayer(std::string name, int in_rows, int out_rows, int in_cols,
                             int out_cols, Activation act, std::mt19937_64& init_rng)
    : name_(std::move(name)),
      act_(act),
      w1_(glorot_uniform(out_rows, in_rows, in_rows, out_rows, init_rng)),
      w2_(glorot_uniform(in_cols, out_cols, in_cols, out_cols, init_rng)),
      b_(Matrix::Zero(out_rows, out_cols)),
      gw1_(Matrix::Zero(out_rows, in_rows)),
      gw2_(Matrix::Zero(in_cols, out_cols)),
      gb_(Matrix::Zero(out_rows, out_cols)) {}

Matrix BilinearLayer::forward(const Matrix& x) {
    if (x.rows() != w1_.cols() || x.cols() != w2_.rows())
        throw std::invalid_argument(name_ + ": input shape mismatch");
    x_ = x;
    z_ = w1_ * x * w2_ + b_;
    y_ = apply_activation(act_, z_);
    return y_;
}

Matrix BilinearLayer::backward(const Matrix& dy) {
    const Matrix dz = dy.cwiseProduct(activation_grad_from_output(act_, z_, y_));
    gw1_ += dz * (x_ * w2_).transpose();
    gw2_ += (w1_ * x_).transpose() * dz;
    gb_ += dz;
    return w1_.transpose() * dz * w2_.transpose();
}

void BilinearLayer::collect(std::vector<ParamRef>& out) {
    out.push_back({name_ + ".w1", &w1_, &gw1_});
    out.push_back({name_ + ".w2", &w2_, &gw2_});
    out.push_back({name_ + ".b", &b_, &gb_});
}

// ---------------------------------------------------------------------------
// TemporalAttention

TemporalAttention::TemporalAttention(std::string name, int time, std::mt19937_64& init_rng)
    : name_(std::move(name)),
      w_(glorot_uniform(time, time, time, time, init_rng)),
      gw_(Matrix::Zero(time, time)),
      lambda_(Matrix::Constant(1, 1, 0.5)),
      glambda_(Matrix::Zero(1, 1)) {}

Matrix TemporalAttention::forward(const Matrix& x) {
    if (x.cols() != w_.rows()) throw std::invalid_argument(name_ + ": time dim mismatch");
    x_ = x;
    e_ = x * w_;
    a_.resize(e_.rows(), e_.cols());
    for (Eigen::Index i = 0; i < e_.rows(); ++i) {
        const Eigen::ArrayXd row = e_.row(i).array() - e_.row(i).maxCoeff();
        const Eigen::ArrayXd ex = row.exp();
        a_.row(i) = (ex / ex.sum()).matrix().transpose();
    }
    const double lam = lambda_(0, 0);
    return lam * x.cwiseProduct(a_) + (1.0 - lam) * x;
}

Matrix TemporalAttention::backward(const Matrix& dy) {
    const double lam = lambda_(0, 0);
    glambda_(0, 0) += (dy.cwiseProduct(x_.cwiseProduct(a_) - x_)).sum();
    Matrix dx = lam * dy.cwiseProduct(a_) + (1.0 - lam) * dy;
    const Matrix da = lam * dy.cwiseProduct(x_);
    Matrix de(da.rows(), da.cols());
    for (Eigen::Index i = 0; i < da.rows(); ++i) {
        const double dot = da.row(i).dot(a_.row(i));
        de.row(i) = a_.row(i).cwiseProduct((da.row(i).array() - dot).matrix());
    }
    gw_ += x_.transpose() * de;
    dx += de * w_.transpose();
    return dx;
}

void TemporalAttention::collect(std::vector<ParamRef>& out) {
    out.push_back({name_ + ".w", &w_, &gw_});
    out.push_back({name_ + ".lambda", &lambda_, &glambda_});
}

void TemporalAttention::constrain() {
    lambda_(0, 0) = std::clamp(lambda_(0, 0), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// BiNLayer

namespace {
constexpr double kBinEpsilon = 1e-8;
}

BiNLayer::BiNLayer(std::string name, int features, int time)
    : name_(std::move(name)),
      scale_t_(Matrix::Ones(time, 1)),
      shift_t_(Matrix::Zero(time, 1)),
      scale_f_(Matrix::Ones(features, 1)),
      shift_f_(Matrix::Zero(features, 1)),
      w_mix_(Matrix::Constant(2, 1, 0.5)),
      gw_mix_(Matrix::Zero(2, 1)),
      gscale_t_(Matrix::Zero(time, 1)),
      gshift_t_(Matrix::Zero(time, 1)),
      gscale_f_(Matrix::Zero(features, 1)),
      gshift_f_(Matrix::Zero(features, 1)) {}

Matrix BiNLayer::standardize(const Matrix& x, int axis) {
    if (axis == 1) {  // along time: each feature row gets mean 0, std 1
        const Eigen::VectorXd mu = x.rowwise().mean();
        const Matrix centered = x.colwise() - mu;
        const Eigen::ArrayXd sd =
            (centered.array().square().rowwise().mean() + kBinEpsilon).sqrt();
        return (centered.array().colwise() / sd).matrix();
    }
    // along features: each time column gets mean 0, std 1
    const Eigen::RowVectorXd mu = x.colwise().mean();
    const Matrix centered = x.rowwise() - mu;
    const Eigen::Array<double, 1, Eigen::Dynamic> sd =
        (centered.array().square().colwise().mean() + kBinEpsilon).sqrt();
    return (centered.array().rowwise() / sd).matrix();
}

Matrix BiNLayer::forward(const Matrix& x) {
    x_ = x;
    temporal_active_ = x.cols() >= 2;
    feature_active_ = x.rows() >= 2;
    xt_ = temporal_active_ ? standardize(x, 1) : x;
    xf_ = feature_active_ ? standardize(x, 0) : x;
    yt_ = (xt_.array().rowwise() * scale_t_.col(0).transpose().array()).matrix();
    yt_ = (yt_.array().rowwise() + shift_t_.col(0).transpose().array()).matrix();
    yf_ = (xf_.array().colwise() * scale_f_.col(0).array()).matrix();
    yf_ = (yf_.array().colwise() + shift_f_.col(0).array()).matrix();
    return w_mix_(0, 0) * yt_ + w_mix_(1, 0) * yf_;
}

namespace {

// Backprop through a row-wise (axis=1) or column-wise (axis=0) z-score.
Matrix standardize_backward(const Matrix& x, const Matrix& xhat, const Matrix& dxhat, int axis) {
    if (axis == 1) {
        const Eigen::VectorXd mu = x.rowwise().mean();
        const Matrix centered = x.colwise() - mu;
        const Eigen::ArrayXd sd =
            (centered.array().square().rowwise().mean() + kBinEpsilon).sqrt();
        const Eigen::VectorXd mean_d = dxhat.rowwise().mean();
        const Eigen::VectorXd mean_dx = dxhat.cwiseProduct(xhat).rowwise().mean();
        Matrix dx = dxhat;
        dx.colwise() -= mean_d;
        dx -= (xhat.array().colwise() * mean_dx.array()).matrix();
        return (dx.array().colwise() / sd).matrix();
    }
    const Eigen::RowVectorXd mu = x.colwise().mean();
    const Matrix centered = x.rowwise() - mu;
    const Eigen::Array<double, 1, Eigen::Dynamic> sd =
        (centered.array().square().colwise().mean() + kBinEpsilon).sqrt();
    const Eigen::RowVectorXd mean_d = dxhat.colwise().mean();
    const Eigen::RowVectorXd mean_dx = dxhat.cwiseProduct(xhat).colwise().mean();
    Matrix dx = dxhat;
    dx.rowwise() -= mean_d;
    dx -= (xhat.array().rowwise() * mean_dx.array()).matrix();
    return (dx.array().rowwise() / sd).matrix();
}

}  // namespace

Matrix BiNLayer::backward(const Matrix& dy) {
    const Matrix dyt = w_mix_(0, 0) * dy;
    const Matrix dyf = w_mix_(1, 0) * dy;
    gw_mix_(0, 0) += dy.cwiseProduct(yt_).sum();
    gw_mix_(1, 0) += dy.cwiseProduct(yf_).sum();

    gscale_t_.col(0) += dyt.cwiseProduct(xt_).colwise().sum().transpose();
    gshift_t_.col(0) += dyt.colwise().sum().transpose();
    const Matrix dxt = (dyt.array().rowwise() * scale_t_.col(0).transpose().array()).matrix();

    gscale_f_.col(0) += dyf.cwiseProduct(xf_).rowwise().sum();
    gshift_f_.col(0) += dyf.rowwise().sum();
    const Matrix dxf = (dyf.array().colwise() * scale_f_.col(0).array()).matrix();

    Matrix dx = temporal_active_ ? standardize_backward(x_, xt_, dxt, 1) : dxt;
    dx += feature_active_ ? standardize_backward(x_, xf_, dxf, 0) : dxf;
    return dx;
}

void BiNLayer::collect(std::vector<ParamRef>& out) {
    out.push_back({name_ + ".scale_t", &scale_t_, &gscale_t_});
    out.push_back({name_ + ".shift_t", &shift_t_, &gshift_t_});
    out.push_back({name_ + ".scale_f", &scale_f_, &gscale_f_});
    out.push_back({name_ + ".shift_f", &shift_f_, &gshift_f_});
    out.push_back({name_ + ".mix", &w_mix_, &gw_mix_});
}

// ---------------------------------------------------------------------------
// Dropout

Matrix Dropout::forward(const Matrix& x, bool training, std::mt19937_64* rng) {
    if (!training || rate_ <= 0.0 || rng == nullptr) {
        mask_.resize(0, 0);
        return x;
    }
    std::bernoulli_distribution keep(1.0 - rate_);
    mask_.resize(x.rows(), x.cols());
    const double inv_keep = 1.0 / (1.0 - rate_);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) mask_(i, j) = keep(*rng) ? inv_keep : 0.0;
    return x.cwiseProduct(mask_);
}

Matrix Dropout::backward(const Matrix& dy) {
    if (mask_.size() == 0) return dy;
    return dy.cwiseProduct(mask_);
}

// ---------------------------------------------------------------------------
// Losses

double focal_loss(const Eigen::VectorXd& probs, int target, double gamma) {
    const double pt = std::max(probs[target], 1e-12);
    return -std::pow(1.0 - pt, gamma) * std::log(pt);
}

LossGrad focal_loss_with_logits(const Eigen::VectorXd& logits, int target, double gamma) {
    LossGrad out;
    const Eigen::VectorXd p = softmax(logits);
    const double pt = std::max(p[target], 1e-12);
    const double one_minus = 1.0 - pt;
    out.loss = -std::pow(one_minus, gamma) * std::log(pt);
    // dL/dp_t, then through the softmax Jacobian row for the target class.
    double dl_dpt = -std::pow(one_minus, gamma) / pt;
    if (gamma > 0.0) dl_dpt += gamma * std::pow(one_minus, gamma - 1.0) * std::log(pt);
    out.dlogits = dl_dpt * pt * (Eigen::VectorXd::Unit(logits.size(), target) - p);
    return out;
}

namespace {
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double weighted_binary_loss(double prob_positive, int target, double pos_weight) {
    const double p = std::clamp(prob_positive, 1e-12, 1.0 - 1e-12);
    return target == 1 ? -pos_weight * std::log(p) : -std::log(1.0 - p);
}

LossGrad weighted_binary_loss_with_logit(double logit, int target, double pos_weight) {
    LossGrad out;
    if (target == 1) {
        out.loss = pos_weight * softplus(-logit);
        out.dlogits = Eigen::VectorXd::Constant(1, -pos_weight * sigmoid(-logit));
    } else {
        out.loss = softplus(logit);
        out.dlogits = Eigen::VectorXd::Constant(1, sigmoid(logit));
    }
    return out;
}

// ---------------------------------------------------------------------------
// TablModel

int ModelConfig::primary_classes() const {
    return head == HeadKind::OrderType ? 2 : size_classes;
}

int ModelConfig::secondary_classes() const {
    return head == HeadKind::Limit ? price_classes : 0;
}

namespace {
std::mt19937_64 layer_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(derive_seed(seed, "tabl_init", index));
}
}  // namespace

TablModel::TablModel(const ModelConfig& config, std::uint64_t init_seed)
    : config_(config),
      bin_("bin", config.book_features, config.window),
      book_layer_([&] {
          auto rng = layer_rng(init_seed, 0);
          return BilinearLayer("book", config.book_features, config.book_hidden, config.window,
                               config.window, config.hidden_activation, rng);
      }()),
      attention_([&] {
          auto rng = layer_rng(init_seed, 1);
          return TemporalAttention("attention", config.window, rng);
      }()),
      trunk_([&] {
          auto rng = layer_rng(init_seed, 2);
          return BilinearLayer("trunk", config.book_hidden + config.msg_features,
                               config.trunk_hidden, config.window, config.trunk_time,
                               config.hidden_activation, rng);
      }()),
      dropout_(config.dropout),
      out_primary_([&] {
          auto rng = layer_rng(init_seed, 3);
          return BilinearLayer("out_primary", config.trunk_hidden, config.primary_classes(),
                               config.trunk_time, 1, Activation::Identity, rng);
      }()),
      book_rows_(config.book_hidden) {
    if (config.secondary_classes() > 0) {
        auto rng = layer_rng(init_seed, 4);
        out_secondary_.emplace("out_secondary", config.trunk_hidden, config.secondary_classes(),
                               config.trunk_time, 1, Activation::Identity, rng);
    }
}

TablModel::Logits TablModel::forward(const Matrix& book_window, const Matrix& msg_window,
                                     bool training, std::mt19937_64* dropout_rng) {
    if (book_window.cols() != msg_window.cols())
        throw std::invalid_argument("TablModel: book and message windows cover different spans");
    const Matrix hb = book_layer_.forward(bin_.forward(book_window));
    Matrix z(hb.rows() + msg_window.rows(), hb.cols());
    z.topRows(hb.rows()) = hb;
    z.bottomRows(msg_window.rows()) = msg_window;
    const Matrix za = attention_.forward(z);
    const Matrix h = trunk_.forward(za);
    hd_ = dropout_.forward(h, training, dropout_rng);
    Logits logits;
    logits.primary = out_primary_.forward(hd_).col(0);
    if (out_secondary_) logits.secondary = out_secondary_->forward(hd_).col(0);
    return logits;
}

void TablModel::backward(const Logits& dlogits) {
    Matrix dhd = out_primary_.backward(dlogits.primary);
    if (out_secondary_ && dlogits.secondary.size() > 0)
        dhd += out_secondary_->backward(dlogits.secondary);
    const Matrix dh = dropout_.backward(dhd);
    const Matrix dza = trunk_.backward(dh);
    const Matrix dz = attention_.backward(dza);
    const Matrix dhb = dz.topRows(book_rows_);
    bin_.backward(book_layer_.backward(dhb));
}

std::vector<ParamRef> TablModel::params() {
    std::vector<ParamRef> refs;
    bin_.collect(refs);
    book_layer_.collect(refs);
    attention_.collect(refs);
    trunk_.collect(refs);
    out_primary_.collect(refs);
    if (out_secondary_) out_secondary_->collect(refs);
    return refs;
}

void TablModel::zero_grads() {
    for (auto& ref : params()) ref.grad->setZero();
}

void TablModel::constrain() { attention_.constrain(); }

std::size_t TablModel::parameter_count() {
    std::size_t n = 0;
    for (auto& ref : params()) n += static_cast<std::size_t>(ref.value->size());
    return n;
}

}  // namespace lobgen
