#pragma once

#include <functional>
#include <span>

#include "contab/tensor.hpp"

namespace contab {

/// Scalar function of one input, rebuilt on a fresh tape per evaluation.
using TapeFunction = std::function<Var(Tape&, Var)>;

/// Compares the reverse-mode gradient of `f` at `x` against central differences
/// (f(x+h) - f(x-h)) / 2h. Returns max over coordinates of |delta| / max(1, |analytic|).
/// Throws InputError if `f` is not 1x1 or h lies outside [1e-7, 1e-3].
double grad_check(const TapeFunction& f, const Matrix& x, double h = 1e-5);

/// Same comparison with respect to parameters that `f` binds itself via Tape::param.
/// At most `max_coords` coordinates per parameter are probed (evenly strided).
double grad_check_params(const std::function<Var(Tape&)>& f, std::span<Parameter* const> params, double h = 1e-5,
                         Eigen::Index max_coords = 64);

}  // namespace contab
