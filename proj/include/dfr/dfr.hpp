#pragma once

#include "dfr/bench.hpp"
#include "dfr/checkpoint.hpp"
#include "dfr/config.hpp"
#include "dfr/csv.hpp"
#include "dfr/errors.hpp"
#include "dfr/evaluate.hpp"
#include "dfr/fixedpoint.hpp"
#include "dfr/nonlinearity.hpp"
#include "dfr/quantized.hpp"
#include "dfr/readout.hpp"
#include "dfr/reservoir.hpp"
#include "dfr/rng.hpp"
#include "dfr/stream.hpp"
#include "dfr/sweep.hpp"
