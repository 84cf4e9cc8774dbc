#pragma once

namespace finres {

// Real-argument polylogarithms Li_2 and Li_3 on (-inf, 1), the range needed
// by the harmonic-trap population integrals of both statistics:
//   fermions: integral x^2/(e^(x-eta)+1) dx = -2 Li_3(-e^eta)
//   bosons:   integral x^2/(e^(x-eta)-1) dx =  2 Li_3(e^eta), eta < 0
double polylog2(double x);
double polylog3(double x);

// Li_s(-e^eta) for arbitrary real eta, evaluated without forming e^eta
// (stable in the degenerate fermionic regime eta >> 1).
double polylog2_neg_exp(double eta);
double polylog3_neg_exp(double eta);

} // namespace finres
