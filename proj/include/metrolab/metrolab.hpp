#pragma once

// Convenience umbrella for the library. The command-line front end lives in
// metrolab/cli.hpp and is left out here so library consumers do not inherit
// its argument-parsing dependency.

#include "metrolab/errors.hpp"
#include "metrolab/experiments.hpp"
#include "metrolab/generators.hpp"
#include "metrolab/hilbert.hpp"
#include "metrolab/measurement.hpp"
#include "metrolab/metrology.hpp"
#include "metrolab/types.hpp"
