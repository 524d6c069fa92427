#include "inplay/odds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace inplay {
namespace {

void check_odd(double o, const char* label) {
    if (!std::isfinite(o) || o <= 1.0) {
        throw std::domain_error(std::string("decimal odds must be > 1, got ") + label + " = " +
                                std::to_string(o));
    }
}

}  // namespace

ProbTriple implied_probs(const OddsTriple& odds) {
    check_odd(odds.home, "home");
    check_odd(odds.draw, "draw");
    check_odd(odds.away, "away");
    const double ih = 1.0 / odds.home;
    const double id = 1.0 / odds.draw;
    const double ia = 1.0 / odds.away;
    const double booksum = ih + id + ia;
    return {ih / booksum, id / booksum, ia / booksum};
}

double margin(const OddsTriple& odds) {
    check_odd(odds.home, "home");
    check_odd(odds.draw, "draw");
    check_odd(odds.away, "away");
    return 1.0 / odds.home + 1.0 / odds.draw + 1.0 / odds.away - 1.0;
}

OddsTriple odds_from_probs(const ProbTriple& probs, double margin_level) {
    if (!(margin_level >= 0.0)) {
        throw std::domain_error("margin must be >= 0");
    }
    const double total = probs.sum();
    const double scale = (1.0 + margin_level) / total;
    OddsTriple out{1.0 / (probs.home * scale), 1.0 / (probs.draw * scale),
                   1.0 / (probs.away * scale)};
    check_odd(out.home, "home");
    check_odd(out.draw, "draw");
    check_odd(out.away, "away");
    return out;
}

}  // namespace inplay
