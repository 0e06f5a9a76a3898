#pragma once

#include "stlab/bnb.hpp"
#include "stlab/common.hpp"
#include "stlab/dg_scheme.hpp"
#include "stlab/grid.hpp"
#include "stlab/linsolve.hpp"
#include "stlab/modal.hpp"
#include "stlab/norms.hpp"
#include "stlab/quadrature.hpp"
#include "stlab/theta_scheme.hpp"
#include "stlab/timepoly.hpp"
#include "stlab/triple.hpp"
