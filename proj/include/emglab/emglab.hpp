#pragma once

// emglab: EMG mixture residual modeling, a generalized EM optimizer, robust
// regression baselines, and RKHS-constrained probabilistic matrix
// factorization for spectroscopic background inference.

#include "emglab/csv.hpp"
#include "emglab/descent.hpp"
#include "emglab/em.hpp"
#include "emglab/emg.hpp"
#include "emglab/erfcx.hpp"
#include "emglab/imodpoly.hpp"
#include "emglab/kernel.hpp"
#include "emglab/losses.hpp"
#include "emglab/matrix.hpp"
#include "emglab/model.hpp"
#include "emglab/numeric_util.hpp"
#include "emglab/pmf.hpp"
#include "emglab/regression.hpp"
#include "emglab/report.hpp"
#include "emglab/sampling.hpp"
#include "emglab/spectra.hpp"
#include "emglab/svg.hpp"
