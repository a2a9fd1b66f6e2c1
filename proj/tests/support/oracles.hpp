#pragma once

// Independent reference computations used only by tests. None of these call
// the library routine they are checking.

#include "nidsrobust/neuralnet.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using nidsrobust::DenseNetwork;
using nidsrobust::Matrix;
using nidsrobust::Vector;

/// Mean cross-entropy from scratch: per-row log-sum-exp over logits.
inline double cross_entropy(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y,
                            const std::vector<Matrix>* masks = nullptr) {
    Matrix a = x;
    const auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Matrix z = a * layers[l].weights;
        z.rowwise() += layers[l].bias.transpose();
        if (l + 1 == layers.size()) {
            double total = 0.0;
            for (Eigen::Index i = 0; i < z.rows(); ++i) {
                const double m = z.row(i).maxCoeff();
                const double lse = m + std::log((z.row(i).array() - m).exp().sum());
                const double logp = z(i, y[static_cast<std::size_t>(i)]) - lse;
                total += -std::max(logp, std::log(1e-12));
            }
            return total / static_cast<double>(z.rows());
        }
        switch (net.spec().hidden[l].activation) {
            case nidsrobust::Activation::relu: a = z.cwiseMax(0.0); break;
            case nidsrobust::Activation::tanh: a = z.array().tanh().matrix(); break;
            case nidsrobust::Activation::elu:
                a = z.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
                break;
        }
        if (masks) a.array() *= (*masks)[l].array();
    }
    return 0.0;
}

/// Sign pattern of ReLU/ELU pre-activations, for kink detection; tanh layers
/// are smooth and contribute nothing.
inline std::vector<bool> relu_pattern(const DenseNetwork& net, const Matrix& x, double tol,
                                      bool* near_kink = nullptr) {
    std::vector<bool> pattern;
    Matrix a = x;
    const auto& layers = net.layers();
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        Matrix z = a * layers[l].weights;
        z.rowwise() += layers[l].bias.transpose();
        if (net.spec().hidden[l].activation != nidsrobust::Activation::tanh)
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                pattern.push_back(z.data()[i] > 0.0);
                if (near_kink && std::abs(z.data()[i]) < tol) *near_kink = true;
            }
        switch (net.spec().hidden[l].activation) {
            case nidsrobust::Activation::relu: a = z.cwiseMax(0.0); break;
            case nidsrobust::Activation::tanh: a = z.array().tanh().matrix(); break;
            case nidsrobust::Activation::elu:
                a = z.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
                break;
        }
    }
    return pattern;
}

/// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero derivatives from
/// turning rounding noise into large relative errors.
inline double relative_error(double analytic, double numeric, double floor = 1e-4) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheck {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
};

inline constexpr double kKinkTol = 1e-6;

/// Central differences of the from-scratch loss against param_gradients,
/// every weight and bias, infer mode. Coordinates whose +/-h perturbation
/// moves a ReLU/ELU unit across its kink are skipped.
inline GradCheck check_param_gradients(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y,
                                       double h = 1e-5) {
    const auto fr = nidsrobust::forward(net, x, nidsrobust::Mode::infer);
    const auto grads = nidsrobust::param_gradients(net, x, y, fr.trace);
    GradCheck out;
    bool base_kink = false;
    const auto base = relu_pattern(net, x, kKinkTol, &base_kink);
    DenseNetwork probe = net;
    auto visit = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double lp = cross_entropy(probe, x, y);
        const auto pp = relu_pattern(probe, x, 0.0);
        param = saved - h;
        const double lm = cross_entropy(probe, x, y);
        const auto pm = relu_pattern(probe, x, 0.0);
        param = saved;
        if (base_kink || pp != base || pm != base) {
            ++out.skipped;
            return;
        }
        out.max_rel_err = std::max(out.max_rel_err, relative_error(analytic, (lp - lm) / (2.0 * h)));
        ++out.checked;
    };
    auto& layers = probe.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (Eigen::Index i = 0; i < layers[l].weights.size(); ++i)
            visit(layers[l].weights.data()[i], grads[l].weights.data()[i]);
        for (Eigen::Index i = 0; i < layers[l].bias.size(); ++i) visit(layers[l].bias(i), grads[l].bias(i));
    }
    return out;
}

/// Central differences of each sample's own loss against input_gradients.
inline GradCheck check_input_gradients(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y,
                                       double h = 1e-5) {
    const Matrix g = nidsrobust::input_gradients(net, x, y);
    GradCheck out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const std::vector<int> yi{y[static_cast<std::size_t>(i)]};
        Matrix row = x.row(i);
        bool kink = false;
        const auto base = relu_pattern(net, row, kKinkTol, &kink);
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double saved = row(0, j);
            row(0, j) = saved + h;
            const double lp = cross_entropy(net, row, yi);
            const auto pp = relu_pattern(net, row, 0.0);
            row(0, j) = saved - h;
            const double lm = cross_entropy(net, row, yi);
            const auto pm = relu_pattern(net, row, 0.0);
            row(0, j) = saved;
            if (kink || pp != base || pm != base) {
                ++out.skipped;
                continue;
            }
            out.max_rel_err = std::max(out.max_rel_err, relative_error(g(i, j), (lp - lm) / (2.0 * h)));
            ++out.checked;
        }
    }
    return out;
}

/// Random architecture with small widths so every coordinate can be checked.
inline nidsrobust::ArchitectureSpec random_arch(std::mt19937_64& rng, int depth, nidsrobust::Activation act,
                                                std::size_t input_dim, std::size_t classes) {
    std::uniform_int_distribution<std::size_t> width(2, 9);
    nidsrobust::ArchitectureSpec spec;
    spec.input_dim = input_dim;
    spec.output_classes = classes;
    for (int l = 0; l < depth; ++l) spec.hidden.push_back({width(rng), act});
    return spec;
}

/// One-way ANOVA F through SST = SSB + SSW with two-pass sums.
inline double anova_f(const std::vector<double>& v, const std::vector<int>& labels) {
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    const double n = static_cast<double>(v.size());
    const double grand = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double sst = 0.0;
    for (double x : v) sst += (x - grand) * (x - grand);
    double ssw = 0.0;
    int groups = 0;
    for (int c = 0; c < k; ++c) {
        double s = 0.0;
        double m = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (labels[i] == c) {
                s += v[i];
                m += 1.0;
            }
        if (m == 0.0) continue;
        ++groups;
        const double mean = s / m;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (labels[i] == c) ssw += (v[i] - mean) * (v[i] - mean);
    }
    const double ssb = sst - ssw;
    return (ssb / (groups - 1)) / (ssw / (n - groups));
}

/// Average ranks (ties share the mean rank), 1-based.
inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
        i = j + 1;
    }
    return r;
}

/// Spearman rank correlation: Pearson correlation of average ranks.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Fisher linear discriminant with pooled covariance; returns test accuracy.
inline double lda_accuracy(const Matrix& train_x, const std::vector<int>& train_y, const Matrix& test_x,
                           const std::vector<int>& test_y) {
    const auto d = train_x.cols();
    Vector mu[2] = {Vector::Zero(d), Vector::Zero(d)};
    double count[2] = {0.0, 0.0};
    for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
        const int c = train_y[static_cast<std::size_t>(i)];
        mu[c] += train_x.row(i).transpose();
        count[c] += 1.0;
    }
    mu[0] /= count[0];
    mu[1] /= count[1];
    Matrix cov = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
        const Vector r = train_x.row(i).transpose() - mu[train_y[static_cast<std::size_t>(i)]];
        cov += r * r.transpose();
    }
    cov /= (count[0] + count[1] - 2.0);
    const Vector w = cov.ldlt().solve(mu[1] - mu[0]);
    const double b = -0.5 * w.dot(mu[0] + mu[1]) + std::log(count[1] / count[0]);
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < test_x.rows(); ++i) {
        const int pred = test_x.row(i).dot(w) + b > 0.0 ? 1 : 0;
        if (pred == test_y[static_cast<std::size_t>(i)]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test_x.rows());
}

}  // namespace oracle
