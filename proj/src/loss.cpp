#include "tsg/loss.hpp"

#include <cmath>
#include <cstdlib>

#include "tsg/errors.hpp"

namespace tsg {

namespace {

double sign(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

// H_s(z) = max(0, s - z); H_s'(z) = 0 if z >= s else -1. Ties take the
// z >= s branch.
double ramp_h(double s, double z) { return std::max(0.0, s - z); }
double ramp_h_deriv(double s, double z) { return z >= s ? 0.0 : -1.0; }

}  // namespace

LossValue hinge(double r, int y) {
  if (y != 1 && y != -1)
    throw ConfigError("hinge label must be +1 or -1, got " + std::to_string(y));
  const double margin = static_cast<double>(y) * r;
  if (margin >= 1.0) return {0.0, 0.0};
  return {1.0 - margin, -static_cast<double>(y)};
}

LossValue unlabeled(const UnlabeledLoss& loss, double r) {
  validate(loss);
  const double a = std::abs(r);
  switch (loss.kind) {
    case UnlabeledLossKind::SHG: {
      if (a >= 1.0) return {0.0, 0.0};
      const double dir = loss.table_fidelity ? 1.0 : sign(r);
      return {1.0 - a, -dir};
    }
    case UnlabeledLossKind::SSHG: {
      if (a >= 1.0) return {0.0, 0.0};
      const double gap = 1.0 - a;
      const double dir = loss.table_fidelity ? 1.0 : sign(r);
      return {0.5 * gap * gap, (a - 1.0) * dir};
    }
    case UnlabeledLossKind::Ramp:
      return {ramp_h(1.0, r) - ramp_h(loss.ramp_s, r),
              ramp_h_deriv(1.0, r) - ramp_h_deriv(loss.ramp_s, r)};
    case UnlabeledLossKind::DA: {
      const double e = std::exp(-5.0 * r * r);
      return {e, -10.0 * r * e};
    }
  }
  throw ConfigError("unknown unlabeled loss kind");
}

LossBounds loss_bounds(const UnlabeledLoss& loss) {
  validate(loss);
  LossBounds b;
  switch (loss.kind) {
    case UnlabeledLossKind::SHG:
    case UnlabeledLossKind::SSHG:
    case UnlabeledLossKind::Ramp:
      b.M_u = 1.0;
      b.U_prime = 1.0;
      break;
    case UnlabeledLossKind::DA:
      // sup |10 r exp(-5 r^2)| attained at r = 1/sqrt(10).
      b.M_u = std::sqrt(10.0) * std::exp(-0.5);
      b.U_prime = b.M_u;
      break;
  }
  return b;
}

UnlabeledLoss parse_loss_name(const std::string& name) {
  UnlabeledLoss loss;
  if (name == "shg") {
    loss.kind = UnlabeledLossKind::SHG;
  } else if (name == "sshg") {
    loss.kind = UnlabeledLossKind::SSHG;
  } else if (name == "da") {
    loss.kind = UnlabeledLossKind::DA;
  } else if (name.rfind("ramp", 0) == 0) {
    loss.kind = UnlabeledLossKind::Ramp;
    if (name.size() > 4) {
      if (name[4] != ':') throw ConfigError("bad ramp loss spelling: " + name);
      char* end = nullptr;
      loss.ramp_s = std::strtod(name.c_str() + 5, &end);
      if (end == name.c_str() + 5 || *end != '\0')
        throw ConfigError("bad ramp parameter in: " + name);
    }
  } else {
    throw ConfigError("unknown loss \"" + name + "\" (expected shg, sshg, ramp:<s>, da)");
  }
  validate(loss);
  return loss;
}

std::string loss_name(const UnlabeledLoss& loss) {
  switch (loss.kind) {
    case UnlabeledLossKind::SHG:
      return "shg";
    case UnlabeledLossKind::SSHG:
      return "sshg";
    case UnlabeledLossKind::Ramp:
      return "ramp:" + std::to_string(loss.ramp_s);
    case UnlabeledLossKind::DA:
      return "da";
  }
  return "?";
}

void validate(const UnlabeledLoss& loss) {
  if (loss.kind == UnlabeledLossKind::Ramp && !(loss.ramp_s < 1.0))
    throw ConfigError("ramp parameter s must satisfy s < 1, got " +
                      std::to_string(loss.ramp_s));
}

}  // namespace tsg
