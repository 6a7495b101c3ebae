#pragma once

#include "phaselab/errors.hpp"
#include "phaselab/quadrature.hpp"
#include "phaselab/vmf.hpp"
#include "phaselab/model.hpp"
#include "phaselab/equilibria.hpp"
#include "phaselab/spectral.hpp"
#include "phaselab/rates_soh.hpp"
#include "phaselab/kinetic.hpp"
#include "phaselab/particles.hpp"
#include "phaselab/io.hpp"
