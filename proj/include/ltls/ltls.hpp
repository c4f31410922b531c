#pragma once

#include "ltls/errors.hpp"
#include "ltls/core_model.hpp"
#include "ltls/ode.hpp"
#include "ltls/quadrature.hpp"
#include "ltls/propagator.hpp"
#include "ltls/adiabatic.hpp"
#include "ltls/elliptic.hpp"
#include "ltls/ddp.hpp"
#include "ltls/stokes.hpp"
#include "ltls/heun.hpp"
#include "ltls/sweep.hpp"
#include "ltls/report.hpp"
