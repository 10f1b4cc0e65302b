#pragma once

#include "monostat/bounds.hpp"
#include "monostat/csv.hpp"
#include "monostat/errors.hpp"
#include "monostat/fock.hpp"
#include "monostat/numeric.hpp"
#include "monostat/observables.hpp"
#include "monostat/parallel.hpp"
#include "monostat/series.hpp"
#include "monostat/spectrum.hpp"
#include "monostat/spectrum_io.hpp"
