#pragma once

#include "mnshape/bessel.hpp"
#include "mnshape/error.hpp"
#include "mnshape/experiments.hpp"
#include "mnshape/geometry.hpp"
#include "mnshape/linalg.hpp"
#include "mnshape/mn_model.hpp"
#include "mnshape/optimize.hpp"
#include "mnshape/rbf.hpp"
#include "mnshape/scalar.hpp"
