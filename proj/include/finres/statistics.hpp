#pragma once

namespace finres {

enum class Statistics { fermi, bose };

// sign convention: +1 for bosons, -1 for fermions; every +/- branch in the
// occupation and rate formulas derives from this and from nothing else
constexpr int statistics_sign(Statistics s) {
    return s == Statistics::bose ? +1 : -1;
}

constexpr const char* statistics_name(Statistics s) {
    return s == Statistics::bose ? "bose" : "fermi";
}

} // namespace finres
