#pragma once

// Error injection: mutates a verified program so that one error class
// shows up, mirroring the hand-made faults used to exercise the checker.

#include <optional>
#include <stdexcept>
#include <string>

#include "dmfv/isa.hpp"
#include "dmfv/pins.hpp"

namespace dmfv {

class MutationInapplicable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InjectionSpec {
    std::string code;              // "e1".."e7"
    std::optional<int> at;         // target timestamp
    std::optional<std::string> insert;  // instruction text for e1/e2/e4
};

/// e1/e2: append `insert` to the line at `at` (required).
/// e3: first dispense moves to its first non-reservoir neighbour.
/// e4: move a mixer endpoint out one tick after the mix starts (last mix, or the mix at `at`).
/// e5: pull a mix one line earlier (first mix line, or the line at `at`).
/// e6: halve the mixing time of the last mix (or the mix at `at`).
/// e7: swap the reagents of the first reservoir pair whose swap changes the realized graph.
Program inject(const Program& program, const InjectionSpec& spec);

PinMap remap_pin(const PinMap& map, Loc cell, int pin);

}  // namespace dmfv
