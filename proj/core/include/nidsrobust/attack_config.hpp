#pragma once

#include "nidsrobust/datapipe.hpp"
#include "nidsrobust/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace nidsrobust {

enum class AttackKind { fgsm, bim, pgd };

std::string_view to_string(AttackKind kind);
/// Throws SchemaError for anything but fgsm/bim/pgd.
AttackKind parse_attack_kind(std::string_view name);

/// L-infinity evasion attack settings. Budgets are in standardized feature
/// units. FGSM ignores alpha, iterations and the random start.
struct AttackConfig {
    AttackKind kind = AttackKind::fgsm;
    double epsilon = 0.1;
    double alpha = 0.025;
    std::size_t iterations = 10;
    double random_start_radius = 0.0;
    bool clip_to_feature_range = false;
    Seed seed = 0;
    /// Train-split per-feature bounds; required when clip_to_feature_range.
    std::optional<FeatureRange> feature_range;

    /// Ten iterations, alpha = epsilon / 4, PGD start radius = epsilon.
    static AttackConfig defaults(AttackKind kind, double epsilon, Seed seed = 0);

    void validate() const;
};

}  // namespace nidsrobust
