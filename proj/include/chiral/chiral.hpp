#pragma once

#include "chiral/angmom.hpp"
#include "chiral/basis.hpp"
#include "chiral/config.hpp"
#include "chiral/error.hpp"
#include "chiral/interference.hpp"
#include "chiral/molecule.hpp"
#include "chiral/observables.hpp"
#include "chiral/output.hpp"
#include "chiral/propagator.hpp"
#include "chiral/pulsetrain.hpp"
#include "chiral/sweep.hpp"
#include "chiral/units.hpp"
#include "chiral/version.hpp"
