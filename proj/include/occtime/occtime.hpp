#pragma once

#include "occtime/errors.hpp"
#include "occtime/polynomial.hpp"
#include "occtime/expmix.hpp"
#include "occtime/partial_fraction.hpp"
#include "occtime/model.hpp"
#include "occtime/model_io.hpp"
#include "occtime/wiener_hopf.hpp"
#include "occtime/occupation.hpp"
#include "occtime/scale_engine.hpp"
#include "occtime/inversion.hpp"
#include "occtime/mc_oracle.hpp"
#include "occtime/pricing.hpp"
