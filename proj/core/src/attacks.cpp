#include "nidsrobust/attacks.hpp"

#include "nidsrobust/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

namespace nidsrobust {

std::string_view to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::fgsm: return "fgsm";
        case AttackKind::bim: return "bim";
        case AttackKind::pgd: return "pgd";
    }
    return "?";
}

AttackKind parse_attack_kind(std::string_view name) {
    if (name == "fgsm") return AttackKind::fgsm;
    if (name == "bim") return AttackKind::bim;
    if (name == "pgd") return AttackKind::pgd;
    throw SchemaError("unknown attack kind: " + std::string(name));
}

AttackConfig AttackConfig::defaults(AttackKind kind, double epsilon, Seed seed) {
    AttackConfig cfg;
    cfg.kind = kind;
    cfg.epsilon = epsilon;
    cfg.alpha = epsilon / 4.0;
    cfg.iterations = 10;
    cfg.random_start_radius = kind == AttackKind::pgd ? epsilon : 0.0;
    cfg.seed = seed;
    return cfg;
}

void AttackConfig::validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw SchemaError("attack epsilon must be >= 0");
    if (kind != AttackKind::fgsm) {
        if (!(alpha > 0.0)) throw SchemaError("attack step alpha must be > 0");
        if (alpha > epsilon) throw SchemaError("attack step alpha must not exceed epsilon");
        if (iterations < 1) throw SchemaError("iterative attacks need at least one iteration");
    }
    if (kind == AttackKind::pgd && !(random_start_radius >= 0.0 && random_start_radius <= epsilon))
        throw SchemaError("PGD random start radius must lie in [0, epsilon]");
    if (clip_to_feature_range) {
        if (!feature_range) throw SchemaError("feature-range clipping requested without a feature range");
        if (feature_range->lower.size() != feature_range->upper.size())
            throw SchemaError("feature range bounds differ in length");
    }
}

double AttackOutcome::max_linf() const {
    return perturbation.size() == 0 ? 0.0 : perturbation.cwiseAbs().maxCoeff();
}

namespace {

// Optional range clip, then projection onto the epsilon-ball around the
// origin point. The ball is the hard invariant so it is applied last; the
// nextafter loop absorbs the rare rounding of (x + eps) - x above eps.
void finalize(Matrix& x_adv, const Matrix& x, const AttackConfig& cfg) {
    const double eps = cfg.epsilon;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double v = x_adv(i, j);
            if (cfg.clip_to_feature_range)
                v = std::clamp(v, cfg.feature_range->lower(j), cfg.feature_range->upper(j));
            const double o = x(i, j);
            v = std::clamp(v, o - eps, o + eps);
            while (v - o > eps) v = std::nextafter(v, o);
            while (o - v > eps) v = std::nextafter(v, o);
            x_adv(i, j) = v;
        }
    }
}

void check_batch(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, const AttackConfig& cfg) {
    cfg.validate();
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw SchemaError("attack labels are not paired with inputs");
    if (static_cast<std::size_t>(x.cols()) != net.spec().input_dim)
        throw SchemaError("attack input width does not match the network");
    if (cfg.clip_to_feature_range && cfg.feature_range->lower.size() != x.cols())
        throw SchemaError("feature range width does not match inputs");
}

void sign_step(Matrix& x_adv, const Matrix& grad, double step) {
    x_adv += grad.unaryExpr([step](double g) { return step * sign(g); });
}

AttackOutcome complete(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, Matrix x_adv,
                       std::size_t evaluations) {
    AttackOutcome out;
    out.perturbation = x_adv - x;
    const auto clean = argmax_rows(predict_proba(net, x));
    const auto adv = argmax_rows(predict_proba(net, x_adv));
    out.flipped.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out.flipped[i] = clean[i] == y[i] && adv[i] != y[i];
    out.x_adv = std::move(x_adv);
    out.gradient_evaluations = evaluations;
    out.gradient_rows = evaluations * y.size();
    return out;
}

Matrix iterate(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, const AttackConfig& cfg,
               Matrix x_adv) {
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        sign_step(x_adv, input_gradients(net, x_adv, y), cfg.alpha);
        finalize(x_adv, x, cfg);
    }
    return x_adv;
}

}  // namespace

AttackOutcome fgsm(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, const AttackConfig& cfg) {
    check_batch(net, x, y, cfg);
    Matrix x_adv = x;
    sign_step(x_adv, input_gradients(net, x, y), cfg.epsilon);
    finalize(x_adv, x, cfg);
    return complete(net, x, y, std::move(x_adv), 1);
}

AttackOutcome bim(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, const AttackConfig& cfg) {
    check_batch(net, x, y, cfg);
    return complete(net, x, y, iterate(net, x, y, cfg, x), cfg.iterations);
}

AttackOutcome pgd(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, const AttackConfig& cfg) {
    check_batch(net, x, y, cfg);
    Matrix start = x;
    if (cfg.random_start_radius > 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-cfg.random_start_radius, cfg.random_start_radius);
        for (Eigen::Index i = 0; i < start.rows(); ++i)
            for (Eigen::Index j = 0; j < start.cols(); ++j) start(i, j) += u(rng);
        finalize(start, x, cfg);
    }
    return complete(net, x, y, iterate(net, x, y, cfg, std::move(start)), cfg.iterations);
}

AttackOutcome run_attack(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y,
                         const AttackConfig& cfg) {
    switch (cfg.kind) {
        case AttackKind::fgsm: return fgsm(net, x, y, cfg);
        case AttackKind::bim: return bim(net, x, y, cfg);
        case AttackKind::pgd: return pgd(net, x, y, cfg);
    }
    throw SchemaError("unknown attack kind");
}

BatchAttack attack_batch(const DenseNetwork& net, const DatasetBundle& bundle, AttackConfig cfg) {
    if (bundle.test_x.samples() == 0) throw SchemaError("cannot attack an empty test split");
    if (cfg.clip_to_feature_range && !cfg.feature_range) cfg.feature_range = train_feature_range(bundle);

    BatchAttack r;
    const auto& x = bundle.test_x.values;
    r.y_true = bundle.test_y.ids;
    r.outcome = run_attack(net, x, r.y_true, cfg);
    r.p_clean = predict_proba(net, x);
    r.p_adv = predict_proba(net, r.outcome.x_adv);
    r.clean_pred = argmax_rows(r.p_clean);
    r.adv_pred = argmax_rows(r.p_adv);
    return r;
}

std::string outcome_to_csv(const BatchAttack& result) {
    const auto before = sample_losses(result.p_clean, result.y_true);
    const auto after = sample_losses(result.p_adv, result.y_true);
    std::ostringstream out;
    out << "row_id,flipped,linf_norm,loss_before,loss_after,p_correct_before,p_correct_after\n";
    char buf[64];
    auto put = [&](double v) {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, ptr - buf);
    };
    for (std::size_t i = 0; i < result.y_true.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const auto c = static_cast<Eigen::Index>(result.y_true[i]);
        out << i << ',' << (result.outcome.flipped[i] ? 1 : 0) << ',';
        put(result.outcome.perturbation.row(r).cwiseAbs().maxCoeff());
        out << ',';
        put(before(r));
        out << ',';
        put(after(r));
        out << ',';
        put(result.p_clean(r, c));
        out << ',';
        put(result.p_adv(r, c));
        out << '\n';
    }
    return out.str();
}

}  // namespace nidsrobust
