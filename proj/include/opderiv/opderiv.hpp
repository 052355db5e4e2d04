// Umbrella header for the operator-derivative toolkit: spectral band
// decompositions of a self-adjoint D, the block-matrix interpretation of
// commutators [D, a], weak/strong differentiability classification, and the
// circle-model examples.
#pragma once

#include "opderiv/blockspace.hpp"
#include "opderiv/config.hpp"
#include "opderiv/derivatives.hpp"
#include "opderiv/dynamics.hpp"
#include "opderiv/fourier.hpp"
#include "opderiv/model.hpp"
#include "opderiv/norms.hpp"
#include "opderiv/report.hpp"
#include "opderiv/spectral.hpp"
#include "opderiv/threading.hpp"
#include "opderiv/torus.hpp"
#include "opderiv/types.hpp"
