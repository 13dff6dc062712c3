#include "cptclock/laser.hpp"

#include <cmath>
#include <stdexcept>

namespace cptclock {

void LaserParams::validate() const {
    const double vals[] = {omega_B, omega_R, omega_W, delta_B, delta_R,
                           delta_W, dephase_B, dephase_R, dephase_W};
    for (double v : vals)
        if (!std::isfinite(v)) throw std::invalid_argument("LaserParams: non-finite value");
    if (omega_B < 0 || omega_R < 0 || omega_W < 0)
        throw std::invalid_argument("LaserParams: Rabi frequencies must be >= 0");
    if (dephase_B < 0 || dephase_R < 0 || dephase_W < 0)
        throw std::invalid_argument("LaserParams: dephasing rates must be >= 0");
}

}  // namespace cptclock
