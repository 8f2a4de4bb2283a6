#pragma once

#include "cpi/analog_pipeline.hpp"
#include "cpi/calibration.hpp"
#include "cpi/config_io.hpp"
#include "cpi/dsp.hpp"
#include "cpi/exact_oracle.hpp"
#include "cpi/fft.hpp"
#include "cpi/generate.hpp"
#include "cpi/instances.hpp"
#include "cpi/netlist.hpp"
#include "cpi/reductions.hpp"
#include "cpi/signal.hpp"
#include "cpi/spectrum.hpp"
