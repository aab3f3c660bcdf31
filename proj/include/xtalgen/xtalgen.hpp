#pragma once

// Umbrella header.

#include "xtalgen/core/crystal.hpp"
#include "xtalgen/core/elements.hpp"
#include "xtalgen/core/error.hpp"
#include "xtalgen/core/lattice.hpp"
#include "xtalgen/core/rng.hpp"
#include "xtalgen/graph.hpp"
#include "xtalgen/io/config.hpp"
#include "xtalgen/io/dataset.hpp"
#include "xtalgen/io/files.hpp"
#include "xtalgen/io/report.hpp"
#include "xtalgen/io/toml_lite.hpp"
#include "xtalgen/metrics/assignment.hpp"
#include "xtalgen/metrics/coverage.hpp"
#include "xtalgen/metrics/emd.hpp"
#include "xtalgen/metrics/fingerprint.hpp"
#include "xtalgen/metrics/match.hpp"
#include "xtalgen/metrics/properties.hpp"
#include "xtalgen/metrics/validity.hpp"
#include "xtalgen/sampling/langevin.hpp"
#include "xtalgen/sampling/noise.hpp"
#include "xtalgen/sampling/schedule.hpp"
#include "xtalgen/sampling/score_field.hpp"
#include "xtalgen/workflows.hpp"
