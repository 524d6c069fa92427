#pragma once

#include <array>

namespace inplay {

// Decimal odds for home win, draw and away win.
struct OddsTriple {
    double home = 0.0;
    double draw = 0.0;
    double away = 0.0;
};

struct ProbTriple {
    double home = 0.0;
    double draw = 0.0;
    double away = 0.0;

    double sum() const { return home + draw + away; }
};

/// Margin-corrected implied probabilities: each inverse odd divided by the
/// booksum. Throws std::domain_error if any odd is <= 1 or not finite.
ProbTriple implied_probs(const OddsTriple& odds);

/// Bookmaker margin (overround), sum of inverse odds minus one.
double margin(const OddsTriple& odds);

/// Decimal odds that reproduce `probs` exactly under implied_probs and carry
/// the given margin. Throws std::domain_error if any resulting odd is <= 1.
OddsTriple odds_from_probs(const ProbTriple& probs, double margin);

}  // namespace inplay
