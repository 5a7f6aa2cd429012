#pragma once

#include <vector>

#include "itm/certificates.hpp"
#include "itm/methods.hpp"
#include "itm/pep.hpp"
#include "itm/sdp.hpp"

namespace itm {

/// A synthesized method with its certified worst-case value.
struct DesignResult {
  double tau;
  FixedStepMethod method_alpha;
  FixedStepMethod method_h;
  DualCertificate certificate;
  LinearizedRows linearized;  // the b_{i,j} = multiplier * alpha products
};

struct RecoverySettings {
  double zero_tol = 1e-9;   // multiplier below this counts as zero
  double resid_tol = 1e-7;  // |b| allowed when its multiplier vanished
};

/// Inverts the change of variables b = lambda * alpha row by row; flags
/// solutions where a vanished multiplier left a significantly nonzero b.
std::vector<std::vector<double>> recover_alpha(const LinearizedRows& b,
                                               const DualCertificate& lambdas,
                                               const RecoverySettings& rs = {});

SdpSettings design_solver_settings();

/// Optimal fixed-step method for |w_N - w_star|^2 / |w_0 - w_star|^2.
DesignResult design_distance(const ClassParams& params, int N,
                             const SdpSettings& settings = design_solver_settings());

/// Optimal fixed-step method for (f(w_N) - f_star) /
/// (c_w |w_0 - w_star|^2 + c_f (f(w_0) - f_star)).
DesignResult design_function_value(const ClassParams& params, int N, double c_w, double c_f,
                                   const SdpSettings& settings = design_solver_settings());

}  // namespace itm
