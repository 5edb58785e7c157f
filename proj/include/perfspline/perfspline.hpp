#pragma once

#include "perfspline/error.hpp"
#include "perfspline/extremal.hpp"
#include "perfspline/kernels.hpp"
#include "perfspline/perfect_spline.hpp"
#include "perfspline/refine.hpp"
#include "perfspline/simplex.hpp"
#include "perfspline/spectral.hpp"
