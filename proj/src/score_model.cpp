#include "semidiff/score_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace semidiff {

namespace {

using MatMap = Eigen::Map<const Mat>;
using VecMap = Eigen::Map<const Vec>;

// Walks the flat parameter layout: per hidden layer W (out x in, column-major)
// then b; then the v head (W, c) and the g head (W, c).
struct Layout {
    struct Block {
        Eigen::Index w_off, b_off, rows, cols;
    };
    std::vector<Block> hidden;
    Block head_v{}, head_g{};
    Eigen::Index total = 0;

    explicit Layout(const ModelClassSpec& spec) {
        Eigen::Index in = spec.input_dim();
        auto add = [&](Eigen::Index rows, Eigen::Index cols) {
            Block b{total, total + rows * cols, rows, cols};
            total += rows * cols + rows;
            return b;
        };
        for (int w : spec.widths) {
            hidden.push_back(add(w, in));
            in = w;
        }
        head_v = add(spec.d_x, in);
        head_g = add(spec.d_x, in);
    }
};

// tanh through the vectorized exp; Eigen's double tanh is scalar. Arguments are
// clamped where tanh and the sigmoid are already 1 to double precision, which
// keeps exp away from subnormal results (slow on x86).
constexpr double kSaturate = 20.0;

Mat fast_tanh(const Mat& a) {
    const auto z = (2.0 * a.array()).cwiseMax(-2.0 * kSaturate).cwiseMin(2.0 * kSaturate);
    return (1.0 - 2.0 / (z.exp() + 1.0)).matrix();
}

Mat sigmoid(const Mat& w) {
    const auto z = w.array().cwiseMax(-2.0 * kSaturate).cwiseMin(2.0 * kSaturate);
    return (1.0 / (1.0 + (-z).exp())).matrix();
}

}  // namespace

std::string to_string(ModelFamily f) { return f == ModelFamily::specialist ? "specialist" : "generalist"; }

ModelFamily model_family_from_string(const std::string& s) {
    if (s == "specialist") return ModelFamily::specialist;
    if (s == "generalist") return ModelFamily::generalist;
    throw std::invalid_argument("unknown model family '" + s + "'");
}

void ModelClassSpec::validate() const {
    if (d_x < 1 || d_y < 1) throw std::invalid_argument("model spec: dimensions must be positive");
    if (widths.empty()) throw std::invalid_argument("model spec: at least one hidden layer required");
    for (int w : widths)
        if (w < 1) throw std::invalid_argument("model spec: widths must be positive");
    if (!(caps.m0 >= 1.0) || !(caps.m1 >= 1.0))
        throw std::invalid_argument("model spec: growth caps must satisfy m0, m1 >= 1");
    if (!(init_scale >= 0.0)) throw std::invalid_argument("model spec: init_scale must be non-negative");
}

std::size_t capacity_report(const ModelClassSpec& spec) {
    spec.validate();
    return static_cast<std::size_t>(Layout(spec).total);
}

Mat model_features(const Mat& x, const Mat& y, const Vec& t) {
    const Eigen::Index B = x.cols();
    Mat z(x.rows() + y.rows() + 3, B);
    z.topRows(x.rows()) = x;
    z.middleRows(x.rows(), y.rows()) = y;
    const Eigen::Index r = x.rows() + y.rows();
    for (Eigen::Index i = 0; i < B; ++i) {
        const double ti = t(i);
        if (!(ti > 0.0)) throw std::invalid_argument("score model: requires t > 0");
        z(r, i) = ti;
        z(r + 1, i) = std::exp(-ti);
        z(r + 2, i) = 1.0 / std::sqrt(-std::expm1(-2.0 * ti));
    }
    return z;
}

struct ScoreModel::Cache {
    std::vector<Mat> h;  // h[0] = features, h[l] = tanh activations
    Mat v, sig;
    Eigen::VectorXd q;   // 1 / sqrt(1 + ||v||^2) per column
};

ScoreModel::ScoreModel(ModelClassSpec spec, Vec params) : spec_(std::move(spec)), params_(std::move(params)) {
    spec_.validate();
    const Layout layout(spec_);
    if (params_.size() != layout.total)
        throw std::invalid_argument("score model: parameter vector has wrong length");
    for (Eigen::Index i = 0; i < params_.size(); ++i)
        if (!std::isfinite(params_(i))) {
            std::ostringstream os;
            os << "score model: non-finite parameter at index " << i;
            throw NumericalError(os.str());
        }
}

ScoreModel ScoreModel::initialize(const ModelClassSpec& spec) {
    spec.validate();
    const Layout layout(spec);
    Vec p = Vec::Zero(layout.total);
    Rng rng = make_rng(spec.init_seed, {0x5c0e});
    std::normal_distribution<double> normal(0.0, 1.0);
    auto fill = [&](const Layout::Block& b) {
        const double sd = spec.init_scale / std::sqrt(static_cast<double>(b.cols));
        for (Eigen::Index i = 0; i < b.rows * b.cols; ++i) p(b.w_off + i) = sd * normal(rng);
    };
    for (const auto& b : layout.hidden) fill(b);
    fill(layout.head_v);
    fill(layout.head_g);
    return ScoreModel(spec, std::move(p));
}

ScoreModel ScoreModel::zeros(const ModelClassSpec& spec) {
    return ScoreModel(spec, Vec::Zero(static_cast<Eigen::Index>(capacity_report(spec))));
}

Mat ScoreModel::forward(const Mat& x, const Mat& y, const Vec& t, Cache* cache) const {
    if (x.rows() != spec_.d_x || y.rows() != spec_.d_y || x.cols() != y.cols() || t.size() != x.cols())
        throw std::invalid_argument("score model: input shape mismatch");
    const Layout layout(spec_);
    const double* p = params_.data();
    Mat h = model_features(x, y, t);
    if (cache) cache->h.push_back(h);
    for (const auto& b : layout.hidden) {
        MatMap W(p + b.w_off, b.rows, b.cols);
        VecMap c(p + b.b_off, b.rows);
        Mat a = W * h;
        a.colwise() += c;
        h = fast_tanh(a);
        if (cache) cache->h.push_back(h);
    }
    const auto& hv = layout.head_v;
    const auto& hg = layout.head_g;
    Mat v = MatMap(p + hv.w_off, hv.rows, hv.cols) * h;
    v.colwise() += VecMap(p + hv.b_off, hv.rows);
    Mat w = MatMap(p + hg.w_off, hg.rows, hg.cols) * h;
    w.colwise() += VecMap(p + hg.b_off, hg.rows);

    const Eigen::VectorXd q = (1.0 + v.colwise().squaredNorm().array()).rsqrt().matrix().transpose();
    const Mat sig = sigmoid(w);
    Mat out = spec_.caps.m0 * (v * q.asDiagonal()) - spec_.caps.m1 * x.cwiseProduct(sig);
    if (cache) {
        cache->v = std::move(v);
        cache->sig = sig;
        cache->q = q;
    }
    return out;
}

Mat ScoreModel::eval(const Mat& x, const Mat& y, const Vec& t) const { return forward(x, y, t, nullptr); }

Vec ScoreModel::eval(const Vec& x, const Vec& y, double t) const {
    Vec tt(1);
    tt(0) = t;
    return forward(Mat(x), Mat(y), tt, nullptr).col(0);
}

ScoreField ScoreModel::field() const {
    ScoreModel copy = *this;
    return ScoreField{spec_.d_x, spec_.d_y,
                      [copy](const Mat& x, const Mat& y, const Vec& t) { return copy.eval(x, y, t); }};
}

Vec ScoreModel::backward(const Mat& x, const Mat& y, const Vec& t, const Mat& upstream) const {
    Cache cache;
    forward(x, y, t, &cache);
    return backprop(cache, x, upstream);
}

Vec ScoreModel::backprop(const Cache& cache, const Mat& x, const Mat& upstream) const {
    const Layout layout(spec_);
    const double* p = params_.data();
    Vec grad = Vec::Zero(layout.total);

    // out = m0 * v q - m1 * x .* sig
    const Mat d_b = spec_.caps.m0 * upstream;
    const Eigen::RowVectorXd vdotdb = cache.v.cwiseProduct(d_b).colwise().sum();
    Mat d_v(cache.v.rows(), cache.v.cols());
    for (Eigen::Index i = 0; i < d_v.cols(); ++i) {
        const double q = cache.q(i);
        d_v.col(i) = q * d_b.col(i) - (q * q * q * vdotdb(i)) * cache.v.col(i);
    }
    const Mat d_w = (-spec_.caps.m1 * x.cwiseProduct(upstream))
                        .cwiseProduct(cache.sig.cwiseProduct((1.0 - cache.sig.array()).matrix()));

    const Mat& h_last = cache.h.back();
    auto head_grad = [&](const Layout::Block& b, const Mat& d) {
        Eigen::Map<Mat>(grad.data() + b.w_off, b.rows, b.cols) = d * h_last.transpose();
        Eigen::Map<Vec>(grad.data() + b.b_off, b.rows) = d.rowwise().sum();
    };
    head_grad(layout.head_v, d_v);
    head_grad(layout.head_g, d_w);

    Mat d_h = MatMap(p + layout.head_v.w_off, layout.head_v.rows, layout.head_v.cols).transpose() * d_v +
              MatMap(p + layout.head_g.w_off, layout.head_g.rows, layout.head_g.cols).transpose() * d_w;
    for (std::size_t l = layout.hidden.size(); l-- > 0;) {
        const auto& b = layout.hidden[l];
        const Mat& h_out = cache.h[l + 1];
        const Mat& h_in = cache.h[l];
        const Mat d_a = d_h.cwiseProduct((1.0 - h_out.array().square()).matrix());
        Eigen::Map<Mat>(grad.data() + b.w_off, b.rows, b.cols) = d_a * h_in.transpose();
        Eigen::Map<Vec>(grad.data() + b.b_off, b.rows) = d_a.rowwise().sum();
        if (l > 0) d_h = MatMap(p + b.w_off, b.rows, b.cols).transpose() * d_a;
    }
    return grad;
}

GradResult ScoreModel::loss_grad(const RegressionBatch& batch) const {
    const Eigen::Index B = batch.x.cols();
    if (B == 0) throw std::invalid_argument("model_grad: empty batch");
    if (batch.target.rows() != spec_.d_x || batch.target.cols() != B)
        throw std::invalid_argument("model_grad: target shape mismatch");
    if (batch.weight.size() != 0 && batch.weight.size() != B)
        throw std::invalid_argument("model_grad: weight length mismatch");
    Cache cache;
    const Mat out = forward(batch.x, batch.y, batch.t, &cache);
    Mat resid = out - batch.target;
    Vec w = batch.weight.size() ? batch.weight : Vec::Ones(B);
    GradResult r;
    r.sq_err = resid.colwise().squaredNorm().transpose();
    r.loss = r.sq_err.cwiseProduct(w).sum() / static_cast<double>(B);
    const Mat upstream = resid * ((2.0 / static_cast<double>(B)) * w).asDiagonal();
    r.grad = backprop(cache, batch.x, upstream);
    for (Eigen::Index i = 0; i < r.grad.size(); ++i)
        if (!std::isfinite(r.grad(i))) {
            std::ostringstream os;
            os << "model_grad: non-finite gradient at parameter index " << i;
            throw NumericalError(os.str());
        }
    return r;
}

GradResult model_grad(const ScoreModel& s, const RegressionBatch& batch) { return s.loss_grad(batch); }

}  // namespace semidiff
