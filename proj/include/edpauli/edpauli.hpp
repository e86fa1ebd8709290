#pragma once

// Umbrella header for the full library.

#include "edpauli/config.hpp"
#include "edpauli/crank_nicolson.hpp"
#include "edpauli/errors.hpp"
#include "edpauli/field.hpp"
#include "edpauli/fit.hpp"
#include "edpauli/grid.hpp"
#include "edpauli/io.hpp"
#include "edpauli/maxent.hpp"
#include "edpauli/ops.hpp"
#include "edpauli/params.hpp"
#include "edpauli/pauli.hpp"
#include "edpauli/phase_space.hpp"
#include "edpauli/rng.hpp"
#include "edpauli/rotations.hpp"
#include "edpauli/sampler.hpp"
#include "edpauli/scenario.hpp"
