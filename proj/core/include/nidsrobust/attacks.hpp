#pragma once

// Untargeted L-infinity gradient-sign evasion attacks: FGSM, BIM and PGD.

#include "nidsrobust/attack_config.hpp"
#include "nidsrobust/datapipe.hpp"
#include "nidsrobust/neuralnet.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace nidsrobust {

struct AttackOutcome {
    Matrix x_adv;
    Matrix perturbation;        ///< x_adv - x, exactly
    std::vector<bool> flipped;  ///< clean prediction correct and adversarial prediction wrong
    std::size_t gradient_evaluations = 0;  ///< batched input-gradient calls
    std::size_t gradient_rows = 0;         ///< evaluations * rows

    /// Largest per-coordinate |x_adv - x| over the whole batch.
    [[nodiscard]] double max_linf() const;
};

/// Three-valued sign; both signed zeros map to 0.
inline double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

AttackOutcome fgsm(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, const AttackConfig& cfg);
AttackOutcome bim(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, const AttackConfig& cfg);
AttackOutcome pgd(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y, const AttackConfig& cfg);

/// Dispatches on cfg.kind.
AttackOutcome run_attack(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y,
                         const AttackConfig& cfg);

/// Everything downstream metrics need from one attack over a test split.
struct BatchAttack {
    AttackOutcome outcome;
    std::vector<int> y_true;
    std::vector<int> clean_pred;
    std::vector<int> adv_pred;
    Matrix p_clean;
    Matrix p_adv;
};

/// Attacks the bundle's test split. With clipping enabled and no explicit
/// range, the train-split feature range is used.
BatchAttack attack_batch(const DenseNetwork& net, const DatasetBundle& bundle, AttackConfig cfg);

/// Columnar per-row report:
/// row_id,flipped,linf_norm,loss_before,loss_after,p_correct_before,p_correct_after
std::string outcome_to_csv(const BatchAttack& result);

}  // namespace nidsrobust
