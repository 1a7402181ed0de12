#pragma once

#include "qdet/model.hpp"

#include <string>

namespace qdet {

/// Parses the flat key-value problem config. Recognised keys:
///   n, mu, lambda, c, pi0, mode (exact|general), k, probs, entries
/// `probs` is a comma list over the lexicographic C(n,k) subsets, or the
/// word `uniform`; `entries` is a semicolon list of subset:prob pairs with
/// comma-separated members, e.g. "1:0.4; 1,2:0.3; 1,2,3:0.3".
/// Unknown keys and malformed values are errors; blank lines and lines
/// starting with '#' are ignored.
ProblemSpec parse_config_text(const std::string& text);
ProblemSpec parse_config_file(const std::string& path);

}  // namespace qdet
