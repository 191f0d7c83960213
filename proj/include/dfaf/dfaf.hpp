#ifndef DFAF_DFAF_HPP
#define DFAF_DFAF_HPP

#include "dfaf/analytic.hpp"
#include "dfaf/channel.hpp"
#include "dfaf/errors.hpp"
#include "dfaf/experiments.hpp"
#include "dfaf/montecarlo.hpp"
#include "dfaf/quadrature.hpp"
#include "dfaf/specfun.hpp"

#endif  // DFAF_DFAF_HPP
