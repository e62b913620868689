#pragma once

// Umbrella header for the epiopt library: controlled SIR dynamics, neural
// control policies, adjoint gradients, Adam training, optimality-structure
// verification and the experiment/report layer.

#include "epiopt/errors.hpp"
#include "epiopt/rk4.hpp"
#include "epiopt/sir.hpp"
#include "epiopt/quadrature.hpp"
#include "epiopt/cost.hpp"
#include "epiopt/control_net.hpp"
#include "epiopt/adjoint.hpp"
#include "epiopt/costate.hpp"
#include "epiopt/verify.hpp"
#include "epiopt/trainer.hpp"
#include "epiopt/experiment.hpp"
#include "epiopt/io.hpp"
#include "epiopt/report.hpp"
