#ifndef TSG_LOSS_HPP
#define TSG_LOSS_HPP

#include <string>

#include "tsg/types.hpp"

namespace tsg {

// Non-convex losses applied to unlabeled scores. Ramp carries its shelf
// parameter s (< 1); the others ignore it.
enum class UnlabeledLossKind { SHG, SSHG, Ramp, DA };

struct UnlabeledLoss {
  UnlabeledLossKind kind = UnlabeledLossKind::SHG;
  double ramp_s = 0.0;
  // When set, SHG/SSHG derivatives reproduce the published table verbatim,
  // i.e. without the sign(r) factor the chain rule on |r| introduces. The
  // default keeps the derivative odd so both sides of the margin band are
  // pushed outward.
  bool table_fidelity = false;
};

struct LossValue {
  double value = 0.0;
  double derivative = 0.0;
};

// Derivative and Lipschitz bounds of the configured loss pair; feeds the
// constants M = C*M_l + C**M_u and M' = C*L' + C**U'.
struct LossBounds {
  double M_l = 1.0;
  double M_u = 1.0;
  double L_prime = 1.0;
  double U_prime = 1.0;
};

// Hinge max(0, 1 - y*r) with subgradient 0 when y*r >= 1, else -y.
LossValue hinge(double r, int y);

LossValue unlabeled(const UnlabeledLoss& loss, double r);

LossBounds loss_bounds(const UnlabeledLoss& loss);

UnlabeledLoss parse_loss_name(const std::string& name);  // "shg" | "sshg" | "ramp:<s>" | "da"
std::string loss_name(const UnlabeledLoss& loss);

void validate(const UnlabeledLoss& loss);

}  // namespace tsg

#endif
