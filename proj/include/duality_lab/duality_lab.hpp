#pragma once

#include "duality_lab/combinatorics.hpp"
#include "duality_lab/duality.hpp"
#include "duality_lab/errors.hpp"
#include "duality_lab/fock.hpp"
#include "duality_lab/interferometer.hpp"
#include "duality_lab/io.hpp"
#include "duality_lab/measurement.hpp"
#include "duality_lab/moments.hpp"
#include "duality_lab/random_states.hpp"
