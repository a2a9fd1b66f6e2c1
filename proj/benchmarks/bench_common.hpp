#pragma once

#include "nidsrobust/datapipe.hpp"

namespace bench {

// Desk-shaped corpus: ten informative columns among `d`.
inline nidsrobust::DatasetBundle corpus(std::size_t n, std::size_t d) {
    nidsrobust::SynthSpec s;
    s.separation = 3.0;
    s.informative = 10;
    s.decay = 0.7;
    auto [x, y] = nidsrobust::synth_dataset(s, n, d, 11);
    return nidsrobust::make_bundle(x, y, 0.8, false, 11);
}

}  // namespace bench
