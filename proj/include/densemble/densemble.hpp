#pragma once

// Umbrella header.

#include "densemble/config.hpp"
#include "densemble/corruptions.hpp"
#include "densemble/datagen.hpp"
#include "densemble/dataset.hpp"
#include "densemble/ensemble.hpp"
#include "densemble/errors.hpp"
#include "densemble/experiment.hpp"
#include "densemble/filter.hpp"
#include "densemble/losses.hpp"
#include "densemble/matrix.hpp"
#include "densemble/metrics.hpp"
#include "densemble/net.hpp"
#include "densemble/noise.hpp"
#include "densemble/rng.hpp"
#include "densemble/sgd.hpp"
#include "densemble/trainer.hpp"
