#pragma once

#include "carma_hf/asymptotics.hpp"
#include "carma_hf/carma_core.hpp"
#include "carma_hf/error.hpp"
#include "carma_hf/factorization.hpp"
#include "carma_hf/matrix_exp.hpp"
#include "carma_hf/parallel.hpp"
#include "carma_hf/poly.hpp"
#include "carma_hf/sampling.hpp"
#include "carma_hf/simulate.hpp"
#include "carma_hf/version.hpp"
