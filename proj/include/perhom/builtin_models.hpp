#pragma once

#include "perhom/model.hpp"

#include <string>
#include <vector>

namespace perhom {

/// Named reference models shipped with the library:
///
///   harmonic       d=1, b=0, c=2+sin(2 pi x), no jumps (Sigma = sqrt(3))
///   sine_drift     d=1, b=sin(2 pi x), c=1, no jumps
///   const_levy     d=1, b=0, c=1, atoms at +-0.5 with rate 1 (Sigma = 1.5)
///   asym_atom      d=1, b=0.3+0.2 sin, c=1+0.5 cos, one atom at 0.4 with rate 1+0.5 sin
///   stable_like    d=1, truncated stable-like pure-jump kernel, R_cut = 2, with drift
///   convolution    d=1, lambda(x) mu(x+y) a(y) kernel plus weak diffusion
///   bm, bm2        standard Brownian motion in d = 1, 2
///   deterministic  d=1, constant drift 0.5, no noise
///   aniso2d        d=2, variable anisotropic diffusion, drift and two atoms
///   bad_atom       d=1, atom with negative rate (fails validation)
///   bad_stable     d=1, stable-like kernel with alpha = 2.5 (fails validation)
LevyTripletModel builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

}  // namespace perhom
