// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/phase_field.hpp"

#include "chainfield/errors.hpp"

namespace chainfield {

void FractureParams::validate() const {
  if (!(g_c > 0.0)) throw ValidationError("fracture: g_c must be > 0");
  if (!(ell_f > 0.0)) throw ValidationError("fracture: ell_f must be > 0");
  if (!(zeta > 0.0 && zeta <= 1e-3)) throw ValidationError("fracture: zeta must lie in (0, 1e-3]");
  if (!(viscosity >= 0.0)) throw ValidationError("fracture: viscosity must be non-negative");
}

double critical_energy(double lambda_c, const FractureParams& fp, const ChainSurvival& survival) {
  if (fp.ec_mode == CriticalEnergyMode::constant) return fp.g_c;
  return survival.at(lambda_c).value * fp.g_c;
}

double critical_energy(double lambda_c, const FractureParams& fp, const WesslauParams& p) {
  return critical_energy(lambda_c, fp, ChainSurvival(p));
}

}  // namespace chainfield
