#pragma once

// Batch reliability estimation under ambiguous censoring: iterative
// proportional imputation, exact-likelihood baseline, batch simulation and
// field-failure forecasting.

#include "propimp/dataset.hpp"
#include "propimp/distribution.hpp"
#include "propimp/errors.hpp"
#include "propimp/estimator.hpp"
#include "propimp/exact.hpp"
#include "propimp/fitters.hpp"
#include "propimp/forecast.hpp"
#include "propimp/imputation.hpp"
#include "propimp/numeric.hpp"
#include "propimp/random.hpp"
#include "propimp/simulate.hpp"
